"""Acceptance gate: the ten desk-scale criteria, one test each.

Every test prints (and records for the terminal summary) a single
``criterion N: PASS|FAIL ...`` line before asserting.
"""

import json
import math
import time
from collections import Counter

import numpy as np
import pytest

from spaceform import checkers, corpus
from spaceform.cli.main import main
from spaceform.config import DEFAULT
from spaceform.core import SpaceForm, TotallyGeodesic, project_W, s_pw_frame
from spaceform.errors import OnFocalSet
from spaceform.horosphere import IdealPoint, busemann, busemann_truncated, check_theorem_1_3
from spaceform.immersion import SamplePlan, local_data, sample_parameters
from spaceform.levelset import verify_level
from spaceform.patches import geodesic_sphere_patch, horosphere_patch, random_patch

from conftest import ACCEPTANCE, random_W

TOL = DEFAULT.tol_predicate


def _report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    print(line)
    ACCEPTANCE.append(line)
    return ok


@pytest.fixture(scope="module")
def regress_runs(tmp_path_factory):
    """corpus-regress through the CLI: once serial, once on four workers."""
    d = tmp_path_factory.mktemp("regress")
    runs = {}
    for workers in (1, 4):
        out = d / f"w{workers}.json"
        start = time.perf_counter()
        code = main(["corpus-regress", "--seed", "0", "--workers", str(workers), "--out", str(out)])
        runs[workers] = (code, out.read_bytes(), time.perf_counter() - start)
    return runs


def test_criterion_1_corpus_regression(regress_runs):
    code, data, elapsed = regress_runs[1]
    rep = json.loads(data)
    ids = {t["id"] for t in rep["targets"]}
    failed = [f"{o['target']}:{o['predicate']}" for o in rep["expectations"] if not o["passed"]]
    ok = code == 0 and not failed and set(corpus.ENTRY_IDS) <= ids and elapsed < 300
    assert _report(1, ok, f"{len(rep['expectations'])} expectations over {len(ids)} targets, failed={failed}, "
                          f"{elapsed:.1f}s"), failed


def _margins_ok(verdicts):
    bad = []
    for v in verdicts:
        if v.holds and v.residual > TOL / 100:
            bad.append((v.predicate, v.param, v.residual))
        if not v.holds and v.applicable and v.residual < 100 * TOL:
            bad.append((v.predicate, v.param, v.residual))
    return bad


def test_criterion_2_implication_tables():
    plan = SamplePlan()
    notes, problems = [], []
    e3 = corpus.entry("ex-4.3-hyperbolic-cylinder")
    r3 = checkers.theorem1_consistency(e3.patch, e3.W, plan)
    if not (r3.ok and set(r3.patterns) == {"A~BC"} and not r3.skipped):
        problems.append(f"ex-4.3 {r3.patterns}")
    notes.append(f"ex-4.3 {r3.patterns}")
    e4 = corpus.entry("ex-4.4-sphere-cap")
    r4 = checkers.theorem1_consistency(e4.patch, e4.W, plan)
    if not (r4.ok and all(k.startswith("~A") and k.endswith("C") and "~C" not in k for k in r4.patterns)):
        problems.append(f"ex-4.4 {r4.patterns}")
    notes.append(f"ex-4.4 {r4.patterns}")
    used = [s[p] for r in (r3, r4) for s in r.samples for p in "ABC"]
    for eid in ("ex-4.2-cone-cylinder", "ex-4.5-exp-graph"):
        e = corpus.entry(eid)
        r = checkers.theorem1_consistency(e.patch, e.W, plan)
        mixed = [s["A"].param for s in r.samples if len({s["A"].holds, s["B"].holds, s["C"].holds}) > 1]
        if mixed or not r.ok or not r.samples:
            problems.append(f"{eid} mixed at {mixed[:3]}")
        notes.append(f"{eid} {r.patterns} skipped={len(r.skipped)}")
        used += [s[p] for s in r.samples for p in "ABC"]
    # the flat annulus violates the submersion hypothesis: (A) is not applicable, B and C still agree
    e1 = corpus.entry("ex-4.1-annulus")
    evs = [checkers.evaluate_sample(e1.patch, u, e1.W, seed=plan.seed) for u in sample_parameters(e1.patch, plan)]
    if any(ev["B"].holds != ev["C"].holds for ev in evs):
        problems.append("ex-4.1 B/C disagree")
    used += [ev[p] for ev in evs for p in "BC"]
    bad = _margins_ok(used)
    if bad:
        problems.append(f"margins {bad[:3]}")
    ok = not problems
    assert _report(2, ok, f"{'; '.join(notes)}; {len(used)} verdicts with margin >= 100x tol_predicate"), problems


def test_criterion_3_exp_graph_formulas():
    e = corpus.entry("ex-4.5-exp-graph")
    worst_fiber = 0.0
    for a, b in ((math.e, 0.0), (0.0, 1.0), (-0.7, 0.4), (2.0, -3.0), (0.3, -0.2)):
        base = np.array([0.0, 0.0, a, b])
        for u in corpus.fiber_intersection_4_5(a, b):
            assert np.allclose(u, [math.log(math.hypot(a, b)), u[1]])
            assert math.isclose((u[1] - math.atan2(b, a)) / (2 * math.pi), round((u[1] - math.atan2(b, a)) / (2 * math.pi)),
                                abs_tol=1e-12)
            worst_fiber = max(worst_fiber, float(np.linalg.norm(project_W(e.patch.eval(u), e.W).foot - base)))
    params = sample_parameters(e.patch, SamplePlan(32, 32, 0))
    worst_dpi, worst_b = 0.0, 0.0
    for x, y in params:
        ex = math.exp(x)
        ld = local_data(e.patch, (x, y), e.W)
        img = e.W.tangent_frame(ld.foot) @ ld.dpi_param
        ref = np.array([[0, 0, ex * math.cos(y), ex * math.sin(y)], [0, 0, -ex * math.sin(y), ex * math.cos(y)]]).T
        worst_dpi = max(worst_dpi, float(np.abs(img - ref).max()))
        worst_b = max(worst_b, checkers.check_B(e.patch, (x, y), e.W).residual)
    ok = worst_fiber < 1e-9 and worst_dpi < 1e-5 and worst_b < 1e-8 and len(params) == 64
    assert _report(3, ok, f"fiber err {worst_fiber:.1e}, dpi err {worst_dpi:.1e}, max B residual {worst_b:.1e} "
                          f"on {len(params)} samples")


def test_criterion_4_projection_identity():
    e = corpus.entry("ex-4.3-hyperbolic-cylinder")
    worst = 0.0
    for t in np.geomspace(0.1, 10.0, 50):
        foot = project_W(corpus.halfspace_to_hyperboloid((1.0, 0.0, t)), e.W).foot
        worst = max(worst, float(np.abs(corpus.hyperboloid_to_halfspace(foot) - [0, 0, math.sqrt(1 + t * t)]).max()))
    assert _report(4, worst < 1e-7, f"max error {worst:.1e} over 50 log-spaced t in [0.1, 10]")


def test_criterion_5_busemann_suite():
    H = SpaceForm(3, -1)
    xi = IdealPoint.from_direction(H, [0, 0.0, 0.6, 0.8])
    ray = max(abs(busemann(xi.ray(s), xi) + s) for s in np.linspace(0, 10, 101))
    rng = np.random.default_rng(55)
    pts = [H.random_point(rng, 3.0) for _ in range(100)]
    trunc = max(abs(busemann(x, xi) - busemann_truncated(x, xi, 30.0)) for x in pts)
    lip = -np.inf
    for _ in range(1000):
        x, y = H.random_point(rng, 3.0), H.random_point(rng, 3.0)
        lip = max(lip, abs(busemann(x, xi) - busemann(y, xi)) - H.dist(x, y))
    ok = ray < 1e-9 and trunc < 1e-8 and lip <= 1e-7
    assert _report(5, ok, f"ray err {ray:.1e}, truncation err {trunc:.1e}, worst Lipschitz excess {lip:.1e}")


def test_criterion_6_horosphere_check():
    H = SpaceForm(3, -1)
    xi = IdealPoint.from_direction(H, [0, 0, 0, 1.0])
    plan = SamplePlan()
    good = check_theorem_1_3(horosphere_patch(H), xi, plan)
    sphere = geodesic_sphere_patch(H, H.exp_map(H.origin(), [0, 0.3, -0.5, 0.2], 0.9), 0.7)
    bad = check_theorem_1_3(sphere, xi, plan)
    ok = good.max_residual < 1e-9 and good.spread < 1e-9 and bad.max_residual > 1e-2
    assert _report(6, ok, f"horosphere residual {good.max_residual:.1e} spread {good.spread:.1e}; "
                          f"geodesic sphere residual {bad.max_residual:.2f}")


def test_criterion_7_level_sets():
    plan = SamplePlan()
    rs = corpus.entry("classic-round-sphere")
    rep = verify_level(rs.field, rs.patch, plan)
    first = rep.constant and rep.spread < 1e-10 and math.isclose(rep.level, 1.5, abs_tol=1e-10)
    rows, violations = [], []
    for e in corpus.all_entries():
        if e.field is None:
            continue
        r = verify_level(e.field, e.patch, plan)
        if r.hypothesis_holds:
            rows.append(e.id)
            if not r.spread < 1e-5:
                violations.append(e.id)
    ok = first and not violations and "classic-round-sphere" in rows
    assert _report(7, ok, f"round sphere spread {rep.spread:.1e} level {rep.level}; hypothesis passes on {rows}, "
                          f"violations {violations}")


PROPERTIES = ("exp/log", "transport", "nearest", "fiber", "plane")
SIGNS = {"c>0": (1.0, 4.0, 0.25), "c=0": (0.0,), "c<0": (-1.0, -2.0, -0.5)}


def _property_case(sp, rng, ran):
    """One randomized case of each kernel property; counts evaluated cases in ``ran``, returns failed names."""
    fails = []
    c = sp.c
    lim = math.pi / sp.k if c > 0 else math.inf
    p = sp.random_point(rng, 1.5)
    q = sp.random_point(rng, 1.5)
    # exp/log round trip
    if c <= 0 or sp.dist(p, q) < 0.9 * lim:
        ran["exp/log"] += 1
        if not np.allclose(sp.exp_map(p, sp.log_map(p, q), 1.0), q, atol=1e-8 * max(1, np.abs(q).max())):
            fails.append("exp/log")
    # transport isometry and reversibility
    if c <= 0 or sp.dist(p, q) < 0.9 * lim:
        ran["transport"] += 1
        V = np.column_stack([sp.random_tangent(p, rng) for _ in range(2)])
        TV = np.column_stack([sp.parallel_transport(v, p, q) for v in V.T])
        back = np.column_stack([sp.parallel_transport(v, q, p) for v in TV.T])
        scale = max(1.0, np.abs(V).max())
        if not (np.allclose(V.T @ sp.lower(V.T).T, TV.T @ sp.lower(TV.T).T, atol=1e-8 * scale**2)
                and np.allclose(back, V, atol=1e-8 * scale)):
            fails.append("transport")
    # projection nearest point and fiber characterization
    W = random_W(sp, rng, int(rng.integers(1, sp.n)))
    try:
        pr = project_W(q, W)
        ran["nearest"] += 1
        if any(sp.dist(q, w) < pr.distance - 1e-8 for w in W.sample_points(rng, 16)):
            fails.append("nearest")
    except OnFocalSet:
        pass
    w = W.sample_points(rng, 1)[0]
    F = s_pw_frame(w, W)
    u = F @ rng.normal(size=F.shape[1])
    t = rng.uniform(0.01, 1.0) * (0.95 * math.pi / (2 * sp.k) if c > 0 else 2.0)
    ran["fiber"] += 1
    if not np.allclose(project_W(sp.exp_map(w, u / sp.norm(u), t), W).foot, w, atol=1e-7 * max(1, np.abs(w).max())):
        fails.append("fiber")
    # geodesic triangle inside its totally geodesic 2-plane
    a, b = sp.random_tangent(p, rng), sp.random_tangent(p, rng)
    r = 0.4 * lim if c > 0 else 1.0
    verts = [p, sp.exp_map(p, a, r / sp.norm(a)), sp.exp_map(p, b, r / sp.norm(b))]
    plane = TotallyGeodesic.through(sp, p, [a, b])
    ran["plane"] += 1
    for i in range(3):
        x, y = verts[i], verts[(i + 1) % 3]
        v = sp.log_map(x, y)
        if not all(plane.contains(sp.exp_map(x, v, s), 1e-8) for s in (0.25, 0.5, 0.75)):
            fails.append("plane")
            break
    return fails


def test_criterion_8_kernel_property_suite():
    rng = np.random.default_rng(88)
    counts, failures = {}, {}
    for sign, cs in SIGNS.items():
        ran, failures[sign] = Counter(), []
        i = 0
        # keep drawing until every property has at least 1000 evaluated cases for this sign
        while not ran or min(ran[k] for k in PROPERTIES) < 1000:
            sp = SpaceForm(int(rng.integers(3, 6)), cs[i % len(cs)])  # n >= 3 so a 2-plane is proper
            failures[sign] += _property_case(sp, rng, ran)
            i += 1
        counts[sign] = min(ran[k] for k in PROPERTIES)
    total = sum(len(f) for f in failures.values())
    detail = ", ".join(f"{s}: >= {counts[s]} cases each, {len(failures[s])} failures" for s in SIGNS)
    assert _report(8, total == 0, detail + " (exp/log, transport, nearest, fiber, 2-plane)"), failures


def test_criterion_9_C_always_holds_for_positive_curvature():
    sp = SpaceForm(3, 1.0)
    rng = np.random.default_rng(99)
    n, fails, worst = 0, [], 0.0
    while n < 256:
        W = random_W(sp, rng, int(rng.integers(1, 3)))
        patch = random_patch(sp, rng)
        u = rng.uniform(patch.lower, patch.upper)
        try:
            d = project_W(patch.eval(u), W).distance
        except OnFocalSet:
            continue
        if not 0.05 < d < math.pi / 2 - 0.05:
            continue  # keep clear of W and of V_W
        v = checkers.check_C(patch, u, W, seed=n)
        n += 1
        worst = max(worst, v.residual)
        if not v.holds:
            fails.append((W.dim, v.residual))
    assert _report(9, not fails, f"{n} random c=1 samples, {len(fails)} failures, max residual {worst:.1e}"), fails


def test_criterion_10_determinism(regress_runs):
    (c1, d1, _), (c4, d4, _) = regress_runs[1], regress_runs[4]
    again = main(["corpus-regress", "--seed", "0", "--samples", "32", "--workers", "2"])
    ok = c1 == c4 == 0 and d1 == d4 and again == 0
    assert _report(10, ok, f"workers 1 vs 4: {'byte-identical' if d1 == d4 else 'DIFFERENT'} ({len(d1)} bytes)")
