"""Timing of the compiled chart kernels against the numpy reference.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""

import argparse
import timeit

import numpy as np

from spaceform.core import SpaceForm, TotallyGeodesic
from spaceform.kernels import _pure

try:
    from spaceform.kernels import _ext
except ImportError:  # extension not built
    _ext = None


def _inputs(c, n, j, K, rng):
    sp = SpaceForm(n, c)
    p0 = sp.random_point(rng, 1.0)
    E = TotallyGeodesic.through(sp, p0, [sp.random_tangent(p0, rng) for _ in range(j)]).frame
    q = sp.random_point(rng, 1.0)
    T = np.column_stack([sp.random_tangent(q, rng) for _ in range(n - 1)])
    A = rng.uniform(-0.5, 0.5, size=(K, j))
    return p0, E, q, T, A


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'c':>5}{'K':>6}{'pure us':>10}{'ext us':>10}{'speedup':>9}")
    for c in (1.0, 0.0, -1.0):
        for K in (8, 64, 512):
            p0, E, q, T, A = _inputs(c, 3, 2, K, rng)
            cases = {
                "chart_points": lambda m: m.chart_points(c, p0, E, A),
                "chart_log_components": lambda m: m.chart_log_components(c, q, p0, E, T, A),
            }
            for name, call in cases.items():
                t_pure = timeit.timeit(lambda: call(_pure), number=args.repeat) / args.repeat * 1e6
                if _ext is None:
                    print(f"{name:<22}{c:>5}{K:>6}{t_pure:>10.1f}{'n/a':>10}{'n/a':>9}")
                    continue
                t_ext = timeit.timeit(lambda: call(_ext), number=args.repeat) / args.repeat * 1e6
                print(f"{name:<22}{c:>5}{K:>6}{t_pure:>10.1f}{t_ext:>10.1f}{t_pure / t_ext:>8.1f}x")


if __name__ == "__main__":
    main()
