"""Searches over W for points whose direction from q satisfies a condition.

W is explored through its exponential chart at its base point.  For c > 0 the
chart covers the whole sphere W within radius pi/sqrt(c); for c < 0 the chart
is cut off at ``config.chart_radius / sqrt(-c)``, so intersections "at
infinity" never count as hits.
"""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .config import DEFAULT, Config
from .core import TotallyGeodesic


class SearchResult(NamedTuple):
    residual: float
    coords: np.ndarray
    evaluations: int
    antipode_excluded: bool


def chart_radius(W: TotallyGeodesic, config: Config = DEFAULT) -> float:
    sp = W.space
    if sp.c > 0:
        return math.pi / sp.k
    if sp.c < 0:
        return config.chart_radius / sp.k
    return math.inf


class ChartFunction:
    """Batched residuals r(a) of unit log directions from q to chart(a).

    ``frame`` holds the vectors the unit log direction is paired with; the
    residual row for chart point a is ``<frame_i, unit log_q(chart(a))>``.
    Points within ``tol_antipode`` of the antipode of q (c > 0) evaluate to nan.
    """

    def __init__(self, q, W: TotallyGeodesic, frame, config: Config = DEFAULT):
        self.q = np.asarray(q, dtype=float)
        self.W = W
        self.frame = np.ascontiguousarray(np.asarray(frame, dtype=float).reshape(W.space.ambient_dim, -1))
        self.config = config
        self.calls = 0
        self.antipode_hit = False
        sp = W.space
        self._cutoff = math.pi / sp.k - config.tol_antipode if sp.c > 0 else math.inf

    def __call__(self, A):
        A = np.ascontiguousarray(np.atleast_2d(np.asarray(A, dtype=float)))
        self.calls += A.shape[0]
        c = self.W.space.c
        comps, dist = kernels.chart_log_components(c, self.q, self.W.base, self.W.frame, self.frame, A)
        if c > 0:
            bad = dist >= self._cutoff
            if np.any(bad):
                self.antipode_hit = True
                comps[bad] = np.nan
        return comps


def _ball_starts(rng: np.random.Generator, count: int, dim: int, radius: float) -> np.ndarray:
    # one draw per start, so a larger count extends the same sequence of starts
    out = np.empty((count, dim))
    for i in range(count):
        d = rng.normal(size=dim)
        out[i] = d / np.linalg.norm(d) * radius * rng.uniform() ** (1.0 / dim)
    return out


def _clamp(A, radius):
    if not math.isfinite(radius):
        return A
    n = np.linalg.norm(A, axis=1, keepdims=True)
    return np.where(n > radius, A * (radius / np.maximum(n, 1e-300)), A)


def damped_gauss_newton(fun: Callable, starts: np.ndarray, radius: float, config: Config = DEFAULT,
                        clamp: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Levenberg-style damped Gauss-Newton run from every start at once.

    Returns the final coordinates (S x j) and residual norms (S,).
    """
    A = np.array(starts, dtype=float)
    S, j = A.shape
    R = fun(A)
    cost = np.where(np.all(np.isfinite(R), axis=1), np.sum(R * R, axis=1), np.inf)
    lam = np.full(S, 1e-3)
    target = (1e-4 * config.tol_predicate) ** 2
    h = 1e-7 * max(1.0, radius if math.isfinite(radius) else 1.0)
    eye = np.eye(j)
    active = np.isfinite(cost) & (cost > target)
    for _ in range(config.max_iter):
        if not np.any(active):
            break
        idx = np.flatnonzero(active)
        Aa = A[idx]
        stack = [Aa + h * eye[i] for i in range(j)] + [Aa - h * eye[i] for i in range(j)]
        Rs = fun(np.concatenate(stack, axis=0)).reshape(2 * j, len(idx), -1)
        Jac = np.transpose((Rs[:j] - Rs[j:]) / (2 * h), (1, 2, 0))  # (s, r, j)
        Ra = R[idx]
        JtJ = np.einsum("sri,srk->sik", Jac, Jac)
        g = np.einsum("sri,sr->si", Jac, Ra)
        damp = lam[idx, None, None] * (np.einsum("sii->si", JtJ)[:, :, None] * eye + 1e-12 * eye)
        ok = np.all(np.isfinite(JtJ), axis=(1, 2)) & np.all(np.isfinite(g), axis=1)
        step = np.zeros_like(Aa)
        if np.any(ok):
            step[ok] = -np.linalg.solve(JtJ[ok] + damp[ok], g[ok][:, :, None])[:, :, 0]
        Anew = Aa + step
        if clamp:
            Anew = _clamp(Anew, radius)
        Rnew = fun(Anew)
        cnew = np.where(np.all(np.isfinite(Rnew), axis=1), np.sum(Rnew * Rnew, axis=1), np.inf)
        better = cnew < cost[idx]
        acc = idx[better]
        A[acc] = Anew[better]
        R[acc] = Rnew[better]
        rel = (cost[acc] - cnew[better]) / np.maximum(cost[acc], 1e-300)
        cost[acc] = cnew[better]
        lam[acc] = np.maximum(lam[acc] / 3.0, 1e-12)
        rej = idx[~better]
        lam[rej] = lam[rej] * 4.0
        stalled = np.zeros(S, dtype=bool)
        stalled[acc[rel < 1e-14]] = True
        stalled[rej[lam[rej] > 1e10]] = True
        active = active & ~stalled & (cost > target)
    return A, np.sqrt(cost)


def minimize_over_W(fun: ChartFunction, extra_starts=(), rng: np.random.Generator | None = None,
                    config: Config = DEFAULT, starts: int | None = None) -> SearchResult:
    """Multistart minimisation of |r(a)| over the chart ball of W."""
    W = fun.W
    radius = chart_radius(W, config)
    rng = np.random.default_rng(0) if rng is None else rng
    count = config.multistart if starts is None else starts
    S0 = [np.atleast_2d(np.asarray(e, dtype=float)).reshape(-1, W.dim) for e in extra_starts]
    S0.append(_ball_starts(rng, max(count - sum(len(s) for s in S0), 1), W.dim, 0.95 * radius))
    A, res = damped_gauss_newton(fun, np.concatenate(S0), radius, config, clamp=W.space.c < 0)
    best = int(np.argmin(res))
    return SearchResult(float(res[best]), A[best].copy(), fun.calls, fun.antipode_hit)


def _grid(W: TotallyGeodesic, config: Config) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Coarse chart grid and the index pairs of its edges."""
    radius = chart_radius(W, config)
    j = W.dim
    if j == 1:
        g = config.sign_grid
        if W.space.c > 0:
            pts = np.linspace(-radius, radius, g, endpoint=False)[:, None]
            edges = [(i, (i + 1) % g) for i in range(g)]
        else:
            pts = np.linspace(-radius, radius, g)[:, None]
            edges = [(i, i + 1) for i in range(g - 1)]
        return pts, edges
    side = max(4, int(round(config.sign_grid ** (2.0 / j) / 4)))
    axes = [np.linspace(-radius, radius, side)] * j
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, j)
    shape = (side,) * j
    edges = []
    for flat in range(mesh.shape[0]):
        idx = np.unravel_index(flat, shape)
        for ax in range(j):
            if idx[ax] + 1 < side:
                nb = list(idx)
                nb[ax] += 1
                edges.append((flat, int(np.ravel_multi_index(nb, shape))))
    return mesh, edges


def bracket_root_over_W(fun: ChartFunction, config: Config = DEFAULT, max_roots: int = 1) -> SearchResult | None:
    """Sign-change detection of a scalar residual on a coarse chart grid, refined by Brent's method."""
    W = fun.W
    pts, edges = _grid(W, config)
    vals = fun(pts)[:, 0]
    best = None
    found = 0
    for a, b in edges:
        va, vb = vals[a], vals[b]
        if not (np.isfinite(va) and np.isfinite(vb)) or va * vb > 0:
            continue
        pa, pb = pts[a], pts[b]
        if W.space.c > 0 and W.dim == 1 and b < a:
            pb = pb + 2 * chart_radius(W, config)

        def line(t, pa=pa, pb=pb):
            return float(fun((1 - t) * pa + t * pb)[0, 0])

        try:
            t = 0.0 if va == 0 else (1.0 if vb == 0 else brentq(line, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps))
        except ValueError:
            continue
        x = (1 - t) * pa + t * pb
        r = abs(line(t))
        if best is None or r < best.residual:
            best = SearchResult(r, x, fun.calls, fun.antipode_hit)
        found += 1
        if found >= max_roots and best.residual < 1e-3 * config.tol_predicate:
            break
    return best


def scan_over_W(fun: ChartFunction, count: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Brute-force residual norms on a dense 1D chart grid (j = 1 only)."""
    W = fun.W
    if W.dim != 1:
        raise ValueError("dense scans are only provided for one-dimensional W")
    radius = chart_radius(W, DEFAULT if fun.config is None else fun.config)
    pts = np.linspace(-radius, radius, count)[:, None]
    R = fun(pts)
    return pts[:, 0], np.sqrt(np.sum(R * R, axis=1))
