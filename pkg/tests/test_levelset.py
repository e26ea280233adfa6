import math

import numpy as np
import pytest

from spaceform import corpus
from spaceform.config import DEFAULT
from spaceform.core import SpaceForm, TotallyGeodesic
from spaceform.errors import LipschitzViolation
from spaceform.immersion import ImmersedPatch, SamplePlan, frame_at, sample_parameters
from spaceform.levelset import (
    LipschitzField,
    check_lipschitz,
    distance_to_W,
    distance_to_points,
    hypothesis_residual,
    sample_residual,
    verify_level,
)
from spaceform.patches import revolution_patch, tilted_plane, totally_geodesic_patch

PLAN = SamplePlan(32, 32, 0)


def _tangent_vectors(patch, u, rng, count=5):
    fr = frame_at(patch, u)
    return [fr.tangent_frame @ rng.normal(size=patch.param_dim) for _ in range(count)]


def test_round_sphere_residual_vanishes_for_all_tangents():
    e = corpus.entry("classic-round-sphere")
    rng = np.random.default_rng(0)
    for u in sample_parameters(e.patch, SamplePlan(8, 8, 0)):
        for v in _tangent_vectors(e.patch, u, rng):
            assert hypothesis_residual(e.field, e.patch, u, v) < 1e-12


def test_round_sphere_level_is_the_radius():
    e = corpus.entry("classic-round-sphere")
    rep = verify_level(e.field, e.patch, PLAN)
    assert rep.constant and rep.hypothesis_holds
    assert rep.spread < 1e-10 and math.isclose(rep.level, 1.5, abs_tol=1e-12)


def test_tilted_plane_normals_miss_an_off_plane_point():
    sp = SpaceForm(3, 0)
    patch = totally_geodesic_patch(tilted_plane(sp, 0.4), 1.0)
    field = distance_to_points(sp, [[0.2, 0.1, 1.0]])
    res = [sample_residual(field, patch, u) for u in sample_parameters(patch, PLAN)]
    assert np.median(res) > 1e-2
    assert not verify_level(field, patch, PLAN).constant


def test_cylinder_about_an_axis():
    sp = SpaceForm(3, 0)
    W = TotallyGeodesic.through(sp, np.zeros(3), [[0, 0, 1.0]])
    patch = revolution_patch(W, lambda s: 1.0)
    field = distance_to_W(W)
    rep = verify_level(field, patch, PLAN)
    assert rep.max_residual < 1e-9
    assert rep.constant and math.isclose(rep.level, 1.0, abs_tol=1e-12)


def test_paraboloid_is_not_a_level_set_of_focal_distance():
    sp = SpaceForm(3, 0)
    f = 0.5

    def par(u):
        x, y = u
        return np.array([x, y, (x * x + y * y) / (4 * f)])

    patch = ImmersedPatch(sp, (-1, -1), (1, 1), par)
    focus = np.array([0, 0, f])
    vals = [np.linalg.norm(par(u) - focus) for u in np.stack(np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-1, 1, 9)), -1).reshape(-1, 2)]
    assert max(vals) - min(vals) > 1e3 * DEFAULT.tol_level
    rep = verify_level(distance_to_points(sp, [focus]), patch, PLAN)
    assert not rep.constant and not rep.hypothesis_holds and rep.implication_ok


def test_hyperbolic_cylinder_distance_is_constant_only_on_circles():
    e = corpus.entry("ex-4.3-hyperbolic-cylinder")
    G = distance_to_W(e.W)
    rep = verify_level(G, e.patch, PLAN)
    assert not rep.constant
    for z in (0.3, 0.6, 0.85):
        vals = [G(e.patch.eval([th, z])) for th in np.linspace(0, 2 * math.pi, 17)]
        assert max(vals) - min(vals) < 1e-10
        assert math.isclose(vals[0], math.asinh(1 / z), rel_tol=1e-10)


@pytest.mark.parametrize("lam", [0.01, 3.0, 250.0])
def test_scale_covariance(lam):
    for eid in ("classic-round-sphere", "ex-4.3-hyperbolic-cylinder"):
        e = corpus.entry(eid)
        a = verify_level(e.field, e.patch, PLAN)
        b = verify_level(e.field.scaled(lam), e.patch, PLAN)
        assert b.lipschitz_constant == pytest.approx(lam * a.lipschitz_constant)
        assert b.spread == pytest.approx(lam * a.spread, rel=1e-9, abs=1e-12)
        assert a.constant == b.constant


def test_lipschitz_violation_is_raised():
    sp = SpaceForm(3, 0)
    e = corpus.entry("classic-round-sphere")

    class Overclaiming(LipschitzField):
        @property
        def lipschitz_constant(self):
            return 0.5 * self.scale

    bad = Overclaiming(sp, "distance", np.array([[1.0, -2.0, 0.5]]))
    with pytest.raises(LipschitzViolation):
        verify_level(bad, e.patch, PLAN)


def test_distance_fields_are_lipschitz():
    rng = np.random.default_rng(4)
    for eid in ("ex-4.3-hyperbolic-cylinder", "ex-4.4-sphere-cap", "classic-round-sphere"):
        e = corpus.entry(eid)
        pts = np.array([e.patch.eval(u) for u in sample_parameters(e.patch, SamplePlan(8, 8, 0))])
        assert check_lipschitz(e.field, pts, rng, 1000) <= DEFAULT.lipschitz_slack
