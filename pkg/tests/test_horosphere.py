import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spaceform import corpus
from spaceform.core import SpaceForm
from spaceform.errors import ModelViolation
from spaceform.horosphere import (
    IdealPoint,
    asymptotic_direction,
    busemann,
    busemann_gradient,
    busemann_truncated,
    check_theorem_1_3,
    horosphere_residual,
)
from spaceform.immersion import SamplePlan, sample_parameters
from spaceform.patches import geodesic_sphere_patch, horosphere_patch, tilted_plane, totally_geodesic_patch

H = SpaceForm(3, -1)
XI = IdealPoint.from_direction(H, [0, 0, 0, 1.0])
PLAN = SamplePlan(32, 32, 0)


def test_gauge_and_nullity():
    assert math.isclose(H.form(H.origin(), XI.xi), -1.0)
    assert abs(H.form(XI.xi, XI.xi)) < 1e-12
    with pytest.raises(ModelViolation):
        IdealPoint(H, np.array([1.0, 0.5, 0, 0]))


def test_value_at_origin_and_along_ray():
    assert busemann(H.origin(), XI) == 0.0
    for s in np.linspace(0, 10, 41):
        assert abs(busemann(XI.ray(s), XI) + s) < 1e-9


@given(seed=st.integers(0, 2**32 - 1))
def test_closed_form_matches_truncated_limit(seed):
    rng = np.random.default_rng(seed)
    x = H.random_point(rng, 3.0)
    assert abs(busemann(x, XI) - busemann_truncated(x, XI, 30.0)) < 1e-8


@pytest.mark.parametrize("c", [-1.0, -4.0])
def test_gradient_matches_central_differences(c):
    sp = SpaceForm(3, c)
    xi = IdealPoint.from_direction(sp, [0, 0.6, 0, 0.8])
    rng = np.random.default_rng(2)
    h = 1e-5
    worst = 0.0
    for _ in range(100):
        p = sp.random_point(rng, 2.0)
        g = busemann_gradient(p, xi)
        v = sp.random_tangent(p, rng)
        v /= sp.norm(v)
        fd = (busemann(sp.exp_map(p, v, h), xi) - busemann(sp.exp_map(p, v, -h), xi)) / (2 * h)
        worst = max(worst, abs(fd - float(sp.form(g, v))))
    assert worst < 1e-6


def test_asymptotic_direction_at_origin_is_the_ray():
    eta = asymptotic_direction(H.origin(), XI)
    assert np.allclose(eta, [0, 0, 0, 1.0])


@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 5.0))
def test_busemann_drops_linearly_along_its_ray(seed, t):
    rng = np.random.default_rng(seed)
    p = H.random_point(rng, 2.0)
    g = H.exp_map(p, asymptotic_direction(p, XI), t)
    assert abs(busemann(g, XI) - (busemann(p, XI) - t)) < 1e-9


def test_one_lipschitz_on_pairs():
    rng = np.random.default_rng(3)
    worst = -np.inf
    for _ in range(1000):
        x, y = H.random_point(rng, 3.0), H.random_point(rng, 3.0)
        worst = max(worst, abs(busemann(x, XI) - busemann(y, XI)) - H.dist(x, y))
    assert worst <= 1e-7


def test_rays_to_the_same_ideal_point_differ_by_a_constant():
    rng = np.random.default_rng(6)
    p = H.random_point(rng, 1.0)
    eta = asymptotic_direction(p, XI)
    T = 30.0
    gT = H.exp_map(p, eta, T)
    diffs = []
    for _ in range(50):
        x = H.random_point(rng, 2.0)
        diffs.append((H.dist(x, gT) - T) - busemann(x, XI))
    assert max(diffs) - min(diffs) < 1e-8


def test_isometries_fixing_the_ideal_point_shift_levels():
    rng = np.random.default_rng(8)
    t = 0.7
    boost = np.eye(4)
    boost[0, 0] = boost[3, 3] = math.cosh(t)
    boost[0, 3] = boost[3, 0] = math.sinh(t)
    assert np.allclose(boost @ XI.xi, math.exp(t) * XI.xi)
    a = 0.9
    rot = np.eye(4)
    rot[1:3, 1:3] = [[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]]
    for L, shift in ((boost, t), (rot, 0.0), (rot @ boost, t)):
        d = []
        for _ in range(40):
            x = H.random_point(rng, 2.0)
            d.append(busemann(L @ x, XI) - busemann(x, XI))
        assert np.ptp(d) < 1e-9 and math.isclose(np.mean(d), -shift, abs_tol=1e-9)


def test_horosphere_patch_passes():
    rep = check_theorem_1_3(horosphere_patch(H), XI, PLAN)
    assert rep.max_residual < 1e-9 and rep.spread < 1e-9 and rep.ok
    assert rep.gauge == "<o, xi> = -1"


def test_geodesic_sphere_is_not_a_horosphere():
    patch = geodesic_sphere_patch(H, H.exp_map(H.origin(), [0, 0.3, 0.2, 0], 1.0), 0.8)
    rep = check_theorem_1_3(patch, XI, PLAN)
    assert rep.max_residual > 1e-2 and rep.spread > 1e-2 and not rep.hypothesis_holds


def test_tilted_plane_residual_is_positive():
    patch = totally_geodesic_patch(tilted_plane(H, 0.5, 0.3), 0.8)
    res = [horosphere_residual(patch, u, XI) for u in sample_parameters(patch, PLAN)]
    assert np.median(res) > 1e-2


def test_horosphere_entry_uses_the_same_ideal_point():
    e = corpus.entry("horosphere-h3")
    assert np.allclose(e.ideal.xi, XI.xi)


def test_requires_negative_curvature():
    with pytest.raises(ValueError):
        IdealPoint(SpaceForm(3, 0), np.array([1.0, 0, 0]))
