"""Executable encodings of the worked examples and classical fixtures.

Each entry carries a space, a totally geodesic W, a patch, and a table of
expected verdicts with provenance tags.  :func:`regress` re-derives every
expectation with the checkers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Callable

import numpy as np

from . import checkers
from .config import DEFAULT, Config
from .core import SpaceForm, TotallyGeodesic, project_W
from .errors import ExcludedBasePoint, UnknownEntry
from .horosphere import IdealPoint, check_theorem_1_3
from .immersion import ImmersedPatch, SamplePlan, ball_exclusion, sample_parameters
from .levelset import LipschitzField, distance_to_points, distance_to_W, verify_level, busemann_field
from .patches import geodesic_sphere_patch, horosphere_patch


@dataclass(frozen=True)
class Expectation:
    """Expected status of one predicate.

    ``points`` pins explicit parameters; otherwise the sample plan is used.
    ``directions(patch, u)`` optionally overrides the kernel for (C).
    ``value`` is the expected level for "level" expectations.
    """

    predicate: str
    verdict: str
    provenance: str
    points: tuple = ()
    directions: Callable | None = None
    value: float | None = None


@dataclass(frozen=True, eq=False)
class CorpusEntry:
    id: str
    space: SpaceForm
    W: TotallyGeodesic | None
    patch: ImmersedPatch
    expected: tuple
    notes: str
    field: LipschitzField | None = None
    ideal: IdealPoint | None = None
    params: dict = dc_field(default_factory=dict)


# -- half-space model of H^3 ----------------------------------------------------


def halfspace_to_hyperboloid(p) -> np.ndarray:
    """Isometry from the upper half-space model (c = -1, n = 3) to the hyperboloid."""
    x, y, z = np.asarray(p, dtype=float)
    if z <= 0:
        raise ValueError("half-space points need z > 0")
    s = x * x + y * y + z * z
    return np.array([(s + 1) / (2 * z), x / z, y / z, (s - 1) / (2 * z)])


def halfspace_jacobian(p) -> np.ndarray:
    x, y, z = np.asarray(p, dtype=float)
    s = x * x + y * y + z * z
    return np.array([
        [x / z, y / z, 1 - (s + 1) / (2 * z * z)],
        [1 / z, 0.0, -x / (z * z)],
        [0.0, 1 / z, -y / (z * z)],
        [x / z, y / z, 1 - (s - 1) / (2 * z * z)],
    ])


def hyperboloid_to_halfspace(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    z = 1.0 / (X[0] - X[3])
    return np.array([X[1] * z, X[2] * z, z])


# -- entries -------------------------------------------------------------------


def _radial_directions(W: TotallyGeodesic):
    """Unit direction at q of the normal geodesic from q toward its foot on W."""
    sp = W.space

    def directions(patch, u):
        q = patch.eval(u)
        foot = project_W(q, W).foot
        v = sp.log_map(q, foot)
        return [v / sp.norm(v)]

    return directions


def annulus_entry(c: float = 0.0, n: int = 3, a: float = 0.5, b: float = 1.5) -> CorpusEntry:
    sp = SpaceForm(n, c)
    o = sp.origin()
    e = np.eye(sp.ambient_dim)
    i0 = 0 if c == 0 else 1
    W = TotallyGeodesic.through(sp, o, [e[i0 + n - 1]])
    if n == 2:
        def f(u):
            return sp.exp_map(o, e[i0], u[0])
        lower, upper = (a,), (b,)
    elif n == 3:
        def f(u):
            r, th = u
            return sp.exp_map(o, math.cos(th) * e[i0] + math.sin(th) * e[i0 + 1], r)
        lower, upper = (a, 0.0), (b, 2 * math.pi)
    else:
        raise ValueError("the annulus entry is shipped for n = 2 and n = 3")
    patch = ImmersedPatch(sp, lower, upper, f, name="annulus")
    expected = (
        Expectation("submersion", "fails", "PAPER: annulus inside one fiber, pi_W is constant on it"),
        Expectation("A", "not_applicable", "PAPER: submersion hypothesis fails"),
        Expectation("C", "fails", "PAPER: no geodesic orthogonal to the radial direction meets W",
                    directions=_radial_directions(W)),
    )
    return CorpusEntry("ex-4.1-annulus", sp, W, patch, expected,
                       f"annulus a < d(z, W) < b in the fiber over the origin, a={a}, b={b}, c={c}, n={n}",
                       field=distance_to_W(W), params={"c": c, "n": n})


def _nu(t):
    return math.exp(1.0 / t) if t < 0 else 0.0


def _mu(t):
    return math.exp(-1.0 / t) if t > 0 else 0.0


def _dnu(t):
    return -math.exp(1.0 / t) / (t * t) if t < 0 else 0.0


def _dmu(t):
    return math.exp(-1.0 / t) / (t * t) if t > 0 else 0.0


def cone_cylinder_curve(t: float) -> np.ndarray:
    nu, mu = _nu(t), _mu(t)
    ct, st = math.cos(t), math.sin(t)
    return np.array([(1 - nu) * ct, (1 - nu) * st, nu - mu])


def cone_cylinder_entry(eps: float = 0.5) -> CorpusEntry:
    sp = SpaceForm(3, 0.0)
    W = TotallyGeodesic.through(sp, [0.0, 0.0, 0.0], [[0.0, 0.0, 1.0]])

    def jac(u):
        t = float(u[0])
        nu, dnu, dmu = _nu(t), _dnu(t), _dmu(t)
        ct, st = math.cos(t), math.sin(t)
        return np.array([[-dnu * ct - (1 - nu) * st], [-dnu * st + (1 - nu) * ct], [dnu - dmu]])

    patch = ImmersedPatch(sp, (-eps,), (eps,), lambda u: cone_cylinder_curve(float(u[0])), jac, name="cone-cylinder")
    expected = (
        Expectation("B", "holds", "PAPER: the curve lies on the cone and the cylinder, whose normals meet the axis"),
        Expectation("submersion", "fails", "PAPER: d(pi_W) kills beta'(0) = (0, 1, 0)", points=((0.0,),)),
    )
    return CorpusEntry("ex-4.2-cone-cylinder", sp, W, patch, expected,
                       f"nu(t) = exp(1/t) for t < 0, mu(t) = exp(-1/t) for t > 0, eps = {eps}",
                       field=distance_to_W(W))


def hyperbolic_cylinder_entry(zmin: float = 0.2, zmax: float = 0.9) -> CorpusEntry:
    sp = SpaceForm(3, -1.0)
    W = TotallyGeodesic.from_span(sp, [[1.0, 0, 0, 0], [0, 0, 0, 1.0]])

    def f(u):
        th, z = u
        return halfspace_to_hyperboloid((math.cos(th), math.sin(th), z))

    def jac(u):
        th, z = u
        J = halfspace_jacobian((math.cos(th), math.sin(th), z))
        return J @ np.array([[-math.sin(th), 0.0], [math.cos(th), 0.0], [0.0, 1.0]])

    patch = ImmersedPatch(sp, (0.0, zmin), (2 * math.pi, zmax), f, jac, name="hyperbolic-cylinder")
    expected = (
        Expectation("submersion", "holds", "PAPER: vertical direction maps to (0, 0, z / sqrt(1 + z^2))"),
        Expectation("A", "holds", "PAPER: rotation-invariant hypersurface around W"),
        Expectation("B", "fails", "PAPER: normal geodesics stay on the sphere of radius z about (x, y, 0) for z <= 1"),
        Expectation("C", "holds", "DERIVED: the kernel is the rotation direction; the foot direction is orthogonal to it"),
    )
    return CorpusEntry("ex-4.3-hyperbolic-cylinder", sp, W, patch, expected,
                       f"half-space cylinder x^2 + y^2 = 1, z in [{zmin}, {zmax}], mapped to the hyperboloid",
                       field=distance_to_W(W))


def sphere_cap_center(offset: float = 0.6) -> np.ndarray:
    return np.array([math.cos(offset), 0.0, math.sin(offset), 0.0])


def sphere_cap_entry(offset: float = 0.6, radius: float = 0.4) -> CorpusEntry:
    sp = SpaceForm(3, 1.0)
    W = TotallyGeodesic.from_span(sp, [[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
    p = sphere_cap_center(offset)
    e1 = np.array([0.0, 1.0, 0.0, 0.0])
    e2 = np.array([-math.sin(offset), 0.0, math.cos(offset), 0.0])

    def f(u):
        return sp.exp_map(p, u[0] * e1 + u[1] * e2)

    patch = ImmersedPatch(sp, (-radius, -radius), (radius, radius), f,
                          excluded=lambda u: bool(np.hypot(u[0], u[1]) >= radius), name="sphere-cap")
    expected = (
        Expectation("submersion", "holds", "PAPER: open subset of S^2 away from W and V_W"),
        Expectation("C", "holds", "PAPER: every geodesic of S^2 through q meets the great circle W"),
        Expectation("A", "fails", "PAPER: G_W-orbits of an open subset of S^2 fill an open subset of S^3"),
        Expectation("B", "fails", "DERIVED: the normal geodesic of S^2 in S^3 meets W only from points of W"),
    )
    return CorpusEntry("ex-4.4-sphere-cap", sp, W, patch, expected,
                       f"geodesic disc of radius {radius} in S^2 = {{x_4 = 0}} centred at distance {offset} from W",
                       field=distance_to_W(W))


def exp_graph(u) -> np.ndarray:
    x, y = u
    ex = math.exp(x)
    return np.array([x, y, ex * math.cos(y), ex * math.sin(y)])


def exp_graph_jacobian(u) -> np.ndarray:
    x, y = u
    ex = math.exp(x)
    return np.array([[1.0, 0.0], [0.0, 1.0], [ex * math.cos(y), -ex * math.sin(y)], [ex * math.sin(y), ex * math.cos(y)]])


def exp_graph_entry(half_x: float = 1.5, guard: float | None = None) -> CorpusEntry:
    sp = SpaceForm(4, 0.0)
    W = TotallyGeodesic.through(sp, np.zeros(4), [[0, 0, 1.0, 0], [0, 0, 0, 1.0]])
    guard = DEFAULT.guard_radius if guard is None else guard
    patch = ImmersedPatch(sp, (-half_x, -math.pi), (half_x, math.pi), exp_graph, exp_graph_jacobian,
                          excluded=ball_exclusion((0.0, 0.0), guard), name="exp-graph")
    expected = (
        Expectation("submersion", "holds", "PAPER: projected partials (0,0,e^x cos y, e^x sin y), (0,0,-e^x sin y, e^x cos y) are independent"),
        Expectation("B", "holds", "PAPER: the 2x2 linear system for the normal plane always has a solution"),
        Expectation("fibers", "holds", "PAPER: S_pW meets the graph at (log sqrt(a^2+b^2), theta + 2 k pi)",
                    points=((math.e, 0.0), (0.0, 1.0), (-0.7, 0.4), (2.0, -3.0))),
    )
    return CorpusEntry("ex-4.5-exp-graph", sp, W, patch, expected,
                       "f(x, y) = (x, y, e^x cos y, e^x sin y), W = {(0, 0)} x R^2, parameter plane punctured at 0")


def round_sphere_entry(center=(1.0, -2.0, 0.5), radius: float = 1.5) -> CorpusEntry:
    sp = SpaceForm(3, 0.0)
    p = np.asarray(center, dtype=float)
    W = TotallyGeodesic.through(sp, p)
    patch = geodesic_sphere_patch(sp, p, radius)
    expected = (Expectation("level", "holds", "PAPER: normal lines through p force a round sphere about p", value=radius),)
    return CorpusEntry("classic-round-sphere", sp, W, patch, expected, f"S(p, r), p = {tuple(center)}, r = {radius}",
                       field=distance_to_points(sp, [p]))


def horosphere_entry() -> CorpusEntry:
    sp = SpaceForm(3, -1.0)
    xi = IdealPoint.from_direction(sp, [0.0, 0.0, 0.0, 1.0])
    patch = horosphere_patch(sp)
    expected = (Expectation("horosphere", "holds", "TRIVIAL: the patch is a Busemann level set"),
                Expectation("level", "holds", "TRIVIAL: level 0 by the gauge", value=0.0))
    return CorpusEntry("horosphere-h3", sp, None, patch, expected, "horosphere through o, gauge <o, xi> = -1",
                       field=busemann_field(xi), ideal=xi)


_BUILDERS = {
    "ex-4.1-annulus": annulus_entry,
    "ex-4.2-cone-cylinder": cone_cylinder_entry,
    "ex-4.3-hyperbolic-cylinder": hyperbolic_cylinder_entry,
    "ex-4.4-sphere-cap": sphere_cap_entry,
    "ex-4.5-exp-graph": exp_graph_entry,
    "classic-round-sphere": round_sphere_entry,
    "horosphere-h3": horosphere_entry,
}

ENTRY_IDS = tuple(_BUILDERS)

# variants exercised by the regression suite besides the defaults
VARIANTS = (("ex-4.1-annulus", {"c": -1.0}),)


def entry(id: str, **options) -> CorpusEntry:
    """Look up a shipped entry; ``options`` go to its builder (e.g. c=-1 for the annulus)."""
    try:
        builder = _BUILDERS[id]
    except KeyError:
        raise UnknownEntry(f"unknown corpus entry {id!r}; shipped: {', '.join(ENTRY_IDS)}") from None
    return builder(**options)


def fiber_intersection_4_5(alpha: float, beta: float, k_max: int = 3) -> list[np.ndarray]:
    """Parameters (x, y) whose image lies on the plane over (0, 0, alpha, beta)."""
    if math.hypot(alpha, beta) == 0.0 or math.hypot(alpha - 1.0, beta) == 0.0:
        raise ExcludedBasePoint("base points (0, 0, 0, 0) and (0, 0, 1, 0) are excluded")
    x = math.log(math.hypot(alpha, beta))
    theta = math.atan2(beta, alpha)
    return [np.array([x, theta + 2 * k * math.pi]) for k in range(-k_max, k_max + 1)]


# -- regression ----------------------------------------------------------------


@dataclass
class ExpectationOutcome:
    entry_id: str
    expectation: Expectation
    passed: bool
    observed: str
    records: list
    summary: dict

    def to_record(self) -> dict:
        return {
            "entry": self.entry_id,
            "predicate": self.expectation.predicate,
            "expected": self.expectation.verdict,
            "observed": self.observed,
            "passed": self.passed,
            "provenance": self.expectation.provenance,
            "summary": self.summary,
            "samples": self.records,
        }


SAMPLE_PREDICATES = ("submersion", "A", "B", "C")


def evaluate_predicate(e: CorpusEntry, predicate: str, u, config: Config = DEFAULT, seed: int = 0,
                       directions=None) -> checkers.PredicateVerdict:
    """Verdict of one per-sample predicate at u."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if predicate == "submersion":
        return checkers.check_submersion(e.patch, u, e.W, config)
    if predicate == "A":
        return checkers.fiber_spread(e.patch, u, e.W, config)
    if predicate == "B":
        return checkers.check_B(e.patch, u, e.W, config, seed=seed)
    if predicate == "C":
        dirs = directions(e.patch, u) if directions is not None else None
        return checkers.check_C(e.patch, u, e.W, config, seed=seed, directions=dirs)
    raise ValueError(f"unknown per-sample predicate {predicate!r}")


def expectation_points(e: CorpusEntry, x: Expectation, plan: SamplePlan) -> np.ndarray:
    if x.points:
        return np.array(x.points, dtype=float).reshape(len(x.points), -1)
    return sample_parameters(e.patch, plan)


def judge_samples(e: CorpusEntry, x: Expectation, verdicts: list) -> ExpectationOutcome:
    """Compare per-sample verdicts against an expectation."""
    if x.predicate == "A":
        agg = checkers.aggregate_A(verdicts)
        observed = agg.status
        summary = {"residual": agg.residual if math.isfinite(agg.residual) else None}
    else:
        statuses = {v.status for v in verdicts}
        observed = statuses.pop() if len(statuses) == 1 else "mixed"
        res = [v.residual for v in verdicts]
        summary = {"min_residual": min(res), "max_residual": max(res)}
    summary["count"] = len(verdicts)
    return ExpectationOutcome(e.id, x, observed == x.verdict, observed, [v.to_record() for v in verdicts], summary)


def judge_aggregate(e: CorpusEntry, x: Expectation, plan: SamplePlan, config: Config = DEFAULT) -> ExpectationOutcome:
    """Expectations that are decided on the whole sample at once."""
    if x.predicate == "level":
        rep = verify_level(e.field, e.patch, plan, config)
        ok = rep.constant and rep.hypothesis_holds and (x.value is None or abs(rep.level - x.value) < config.tol_level)
        return ExpectationOutcome(e.id, x, ok == (x.verdict == "holds"), "holds" if ok else "fails", [], rep.to_record())
    if x.predicate == "horosphere":
        rep = check_theorem_1_3(e.patch, e.ideal, plan, config)
        ok = rep.ok and rep.hypothesis_holds and rep.on_horosphere
        return ExpectationOutcome(e.id, x, ok == (x.verdict == "holds"), "holds" if ok else "fails", [], rep.to_record())
    if x.predicate == "fibers":
        rows, worst = [], 0.0
        for a, b in x.points:
            pts = fiber_intersection_4_5(a, b)
            fiber = TotallyGeodesic.through(e.space, [0.0, 0.0, a, b], [[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
            for u in pts:
                err = float(np.linalg.norm(e.patch.eval(u)[2:] - np.array([a, b])))
                worst = max(worst, err)
                rows.append({"base": [a, b], "param": u.tolist(), "error": err, "on_fiber": fiber.contains(e.patch.eval(u))})
        ok = worst < 1e-9
        return ExpectationOutcome(e.id, x, ok == (x.verdict == "holds"), "holds" if ok else "fails", rows,
                                  {"max_error": worst})
    raise ValueError(f"unknown aggregate predicate {x.predicate!r}")


def regress(e: CorpusEntry, plan: SamplePlan = SamplePlan(), config: Config = DEFAULT,
            map_fn=map) -> list[ExpectationOutcome]:
    """Re-derive every expectation of an entry.  ``map_fn`` may fan out per-sample work."""
    out = []
    for x in e.expected:
        if x.predicate in SAMPLE_PREDICATES:
            params = expectation_points(e, x, plan)
            verdicts = list(map_fn(lambda u: evaluate_predicate(e, x.predicate, u, config, plan.seed, x.directions), params))
            out.append(judge_samples(e, x, verdicts))
        else:
            out.append(judge_aggregate(e, x, plan, config))
    return out


def all_entries() -> list[CorpusEntry]:
    return [entry(i) for i in ENTRY_IDS] + [entry(i, **opts) for i, opts in VARIANTS]
