import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spaceform import kernels
from spaceform.core import SpaceForm
from spaceform.kernels import _pure

from conftest import CURVATURES, random_W

try:
    from spaceform.kernels import _ext
except ImportError:  # pragma: no cover - extension not built
    _ext = None

needs_ext = pytest.mark.skipif(_ext is None, reason="compiled kernels not built")


def _setup(c, seed, j=2):
    rng = np.random.default_rng(seed)
    sp = SpaceForm(3, c)
    W = random_W(sp, rng, j)
    q = sp.random_point(rng, 1.5)
    T = np.column_stack([sp.random_tangent(q, rng) for _ in range(2)])
    A = rng.normal(size=(40, j))
    return sp, W, q, T, A


def test_backend_is_reported():
    assert kernels.BACKEND in ("pure", "cython")


@pytest.mark.parametrize("c", CURVATURES)
def test_chart_points_match_exp_map(c):
    sp, W, _, _, A = _setup(c, 1)
    P = _pure.chart_points(c, W.base, W.frame, A)
    for a, p in zip(A, P):
        assert np.allclose(p, sp.exp_map(W.base, W.frame @ a), atol=1e-10 * max(1, np.abs(p).max()))


@pytest.mark.parametrize("c", CURVATURES)
def test_chart_log_components_match_log_map(c):
    sp, W, q, T, A = _setup(c, 2)
    A = A[np.linalg.norm(A, axis=1) < 2.5]
    comps, dist = _pure.chart_log_components(c, q, W.base, W.frame, T, A)
    for a, row, d in zip(A, comps, dist):
        w = W.chart(a)
        v = sp.log_map(q, w)
        assert np.isclose(d, sp.dist(q, w), atol=1e-9)
        assert np.allclose(row, sp.lower(T.T) @ (v / sp.norm(v)), atol=1e-9)


@needs_ext
@given(c=st.sampled_from(CURVATURES), seed=st.integers(0, 2**32 - 1), j=st.integers(1, 2))
def test_compiled_kernels_agree_with_numpy(c, seed, j):
    _, W, q, T, A = _setup(c, seed, j)
    P0 = _pure.chart_points(c, W.base, W.frame, A)
    P1 = _ext.chart_points(c, W.base, W.frame, A)
    assert np.allclose(P0, P1, rtol=1e-12, atol=1e-12)
    c0, d0 = _pure.chart_log_components(c, q, W.base, W.frame, T, A)
    c1, d1 = _ext.chart_log_components(c, q, W.base, W.frame, T, A)
    assert np.allclose(c0, c1, rtol=1e-10, atol=1e-12, equal_nan=True)
    assert np.allclose(d0, d1, rtol=1e-10, atol=1e-12)


def test_zero_chart_offset_is_the_base():
    sp = SpaceForm(3, -1)
    W = random_W(sp, np.random.default_rng(0), 2)
    assert np.allclose(kernels.chart_points(-1.0, W.base, W.frame, np.zeros((1, 2)))[0], W.base)
