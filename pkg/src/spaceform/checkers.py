"""Numerical decision procedures for the properties (A), (B), (C) and the
submersion hypothesis, with residuals and witnesses.

Reductions used throughout:

* "the geodesic gamma_eta meets W" is read as "eta is parallel to
  log_q(w) for some w in W".  This is exact for c <= 0 and, for c > 0, away
  from the antipode of q, which can never lie on W when q does not.
* (A) is decided through fiber constancy: where pi_W|Sigma is a submersion,
  Sigma is locally G_W-invariant exactly when d(., W) is constant along the
  fibers of pi_W|Sigma.  Without the submersion hypothesis no (A) verdict is
  issued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, Config
from .core import TotallyGeodesic, project_W
from .errors import ContinuationStalled, GeometryError
from .immersion import (ImmersedPatch, LocalData, SamplePlan, frame_at, local_data, project_derivative,
                        sample_parameters)
from .search import ChartFunction, bracket_root_over_W, damped_gauss_newton, minimize_over_W


@dataclass
class PredicateVerdict:
    predicate: str
    holds: bool
    residual: float
    witness: dict | None = None
    samples_used: int = 0
    applicable: bool = True
    note: str = ""
    param: tuple | None = None
    details: dict = field(default_factory=dict)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "not_applicable"
        return "holds" if self.holds else "fails"

    def to_record(self) -> dict:
        rec = {
            "predicate": self.predicate,
            "status": self.status,
            "holds": bool(self.holds),
            "residual": float(self.residual),
            "samples_used": int(self.samples_used),
        }
        if self.param is not None:
            rec["param"] = [float(x) for x in self.param]
        if self.witness:
            rec["witness"] = {k: _jsonable(v) for k, v in self.witness.items()}
        if self.note:
            rec["note"] = self.note
        if self.details:
            rec["details"] = {k: _jsonable(v) for k, v in self.details.items()}
        return rec


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()] if v.ndim else float(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _rng(seed, u) -> np.random.Generator:
    # stream keyed by (seed, parameter bits): independent of scheduling order
    bits = np.asarray(u, dtype=float).view(np.uint64).tolist()
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, *[b & 0xFFFFFFFF for b in bits], *[b >> 32 for b in bits]])


def _require_clear(patch: ImmersedPatch, W: TotallyGeodesic, q, config: Config):
    proj = project_W(q, W, config)  # raises OnFocalSet
    if proj.distance < 1e3 * config.tol_model:
        raise GeometryError("sample point lies on W")
    return proj


def _unit_log(space, q, w):
    v = space.log_map(q, w)
    return v / space.norm(v)


# -- (B) ------------------------------------------------------------------


def check_B(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT, seed: int = 0,
            starts: int | None = None, frame=None) -> PredicateVerdict:
    """Is there a normal direction at q = f(u) whose geodesic meets W?

    The residual is min over w in W of the tangential part of the unit
    direction from q to w (c != 0), or the closed-form least-squares residual
    of the linear feasibility problem T^T (w - q) = 0 (c = 0).
    """
    sp = patch.space
    fr = frame if frame is not None else frame_at(patch, u, config)
    q, T = fr.point, fr.tangent_frame
    proj = _require_clear(patch, W, q, config)
    if sp.c == 0:
        a, res = _flat_B(q, T, W, config)
        w = W.base + W.frame @ a
        evaluations = 1
        excluded = False
    else:
        fun = ChartFunction(q, W, T, config)
        foot_coords = W.chart_coords(proj.foot) if W.dim else np.zeros(0)
        if W.dim == 0:
            comps = fun(np.zeros((1, 0)))[0]
            a, res = np.zeros(0), float(np.linalg.norm(comps))
        else:
            r = minimize_over_W(fun, [foot_coords], _rng(seed, u), config, starts=starts)
            a, res = r.coords, r.residual
        w = W.chart(a)
        evaluations, excluded = fun.calls, fun.antipode_hit
    holds = res < config.tol_predicate
    witness = {"w": w, "eta": _unit_log(sp, q, w), "chart": a}
    return PredicateVerdict("B", holds, res, witness if holds else None, evaluations, param=tuple(np.atleast_1d(u)),
                            details={"antipode_excluded": excluded, "best_w": w})


def _flat_B(q, T, W: TotallyGeodesic, config: Config = DEFAULT):
    F = W.frame
    M = T.T @ F
    b = T.T @ (q - W.base)
    if F.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(b))
    # T and F are orthonormal, so singular values of M lie in [0, 1]; directions
    # below tol_rank would only be met "at infinity" and are dropped
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    keep = s > config.tol_rank
    a = Vt[keep].T @ ((U[:, keep].T @ b) / s[keep])
    return a, float(np.linalg.norm(M @ a - b))


def flat_B_gauss_newton(q, T, W: TotallyGeodesic, config: Config = DEFAULT) -> float:
    """Same c = 0 feasibility residual, minimised iteratively (cross-check)."""
    F = W.frame
    M = T.T @ F
    b = T.T @ (q - W.base)

    def fun(A):
        return A @ M.T - b[None, :]

    A, res = damped_gauss_newton(fun, np.zeros((1, F.shape[1])), math.inf, config, clamp=False)
    return float(res[0])


# -- (C) ------------------------------------------------------------------


def _flat_C(q, v, W: TotallyGeodesic, config: Config):
    g = W.frame.T @ v
    b0 = float((W.base - q) @ v)
    gn = float(np.linalg.norm(g))
    if gn > config.tol_rank:
        # the affine constraint <w - q, v> = 0 meets W
        return -b0 * g / gn**2, 0.0
    return np.zeros(W.dim), abs(b0)


def _direction_residual(patch, q, v, W, proj, config, rng, starts=None):
    sp = patch.space
    if sp.c == 0:
        a, res = _flat_C(q, v, W, config)
        return a, res, 1, False
    fun = ChartFunction(q, W, v, config)
    if W.dim == 0:
        return np.zeros(0), float(abs(fun(np.zeros((1, 0)))[0, 0])), 1, False
    best = bracket_root_over_W(fun, config)
    if best is None or best.residual >= 1e-3 * config.tol_predicate:
        r = minimize_over_W(fun, [W.chart_coords(proj.foot)], rng, config, starts=starts)
        if best is None or r.residual < best.residual:
            best = r
    return best.coords, best.residual, fun.calls, fun.antipode_hit


def check_C(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT, seed: int = 0,
            directions=None, data: LocalData | None = None, starts: int | None = None) -> PredicateVerdict:
    """For kernel vectors v of d(pi_W|Sigma), is some geodesic orthogonal to v meeting W?

    ``directions`` overrides the kernel with explicit tangent vectors.  For a
    kernel of dimension >= 2 the basis plus ``config.kernel_samples`` seeded
    unit combinations are tested; the tested set is recorded.
    """
    sp = patch.space
    ld = data if data is not None else local_data(patch, u, W, config)
    q = ld.frame.point
    proj = _require_clear(patch, W, q, config)
    rng = _rng(seed, u)
    if directions is not None:
        V = np.array(directions, dtype=float).reshape(-1, sp.ambient_dim).T
        V = V / np.sqrt(np.maximum(np.einsum("ij,ij->j", sp.lower(V.T).T, V), 1e-300))
    else:
        K = ld.kernel
        if K.shape[1] == 0:
            return PredicateVerdict("C", True, 0.0, {"vacuous": True}, 0, param=tuple(np.atleast_1d(u)),
                                    note="empty kernel")
        V = K
        if K.shape[1] >= 2:
            coef = rng.normal(size=(K.shape[1], config.kernel_samples))
            coef /= np.linalg.norm(coef, axis=0)
            V = np.column_stack([K, K @ coef])
    worst, worst_i, total, excluded = -1.0, 0, 0, False
    hits = []
    for i in range(V.shape[1]):
        a, res, calls, exc = _direction_residual(patch, q, V[:, i], W, proj, config, rng, starts)
        total += calls
        excluded |= exc
        hits.append((a, res))
        if res > worst:
            worst, worst_i = res, i
    holds = worst < config.tol_predicate
    witness = None
    if holds:
        ws = [W.chart(a) if sp.c != 0 else W.base + W.frame @ a for a, _ in hits]
        witness = {"w": ws, "eta": [_unit_log(sp, q, w) for w in ws], "v": V.T}
    return PredicateVerdict("C", holds, worst, witness, total, param=tuple(np.atleast_1d(u)),
                            details={"directions_tested": V.shape[1], "worst_direction": V[:, worst_i],
                                     "antipode_excluded": excluded})


# -- submersion -----------------------------------------------------------


def check_submersion(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT,
                     data: LocalData | None = None) -> PredicateVerdict:
    """Does d(pi_W|Sigma) have rank dim W at f(u)?

    The residual is the deficit of the (dim W)-th singular value below the
    rank threshold; it is 0 when the map is onto.
    """
    ld = data if data is not None else local_data(patch, u, W, config)
    j = W.dim
    s = ld.singular_values
    thresh = config.tol_rank * max(1.0, s[0] if s.size else 0.0)
    if j == 0:
        sig = math.inf
    else:
        sig = float(s[j - 1]) if s.size >= j else 0.0
    holds = sig > thresh
    residual = 0.0 if holds else float(thresh - sig)
    return PredicateVerdict("submersion", holds, residual, {"sigma_j": sig} if holds else None, 1,
                            param=tuple(np.atleast_1d(u)), details={"singular_values": s, "threshold": thresh})


# -- (A) via fiber constancy ------------------------------------------------


def _param_kernel(patch, u, W, config):
    D = project_derivative(patch, u, W, config)
    foot = project_W(patch.eval(u), W, config).foot
    E = W.tangent_frame(foot)
    A = patch.space.lower(E.T) @ D
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    return D, Vt[W.dim:].T


def _correct(patch, u, W, foot0, config):
    """Gauss-Newton back onto the fiber pi_W(f(u)) = foot0 (minimum-norm steps)."""
    u = np.array(u, dtype=float)
    scale = max(1.0, float(np.abs(foot0).max()))
    for _ in range(config.max_iter):
        g = project_W(patch.eval(u), W, config).foot - foot0
        if np.linalg.norm(g) < 1e-12 * scale:
            return u
        D = project_derivative(patch, u, W, config)
        # D has rank dim W; the remaining singular values are difference noise
        U, s, Vt = np.linalg.svd(D, full_matrices=False)
        r = W.dim
        u = u - Vt[:r].T @ ((U[:, :r].T @ g) / s[:r])
    raise ContinuationStalled(f"fiber corrector did not converge from u={u.tolist()}")


def fiber_spread(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT,
                 data: LocalData | None = None) -> PredicateVerdict:
    """Spread of d(., W) along the fiber of pi_W|Sigma through f(u)."""
    ld = data if data is not None else local_data(patch, u, W, config)
    u0 = np.asarray(u, dtype=float)
    param = tuple(np.atleast_1d(u))
    sub = check_submersion(patch, u, W, config, data=ld)
    if not sub.holds:
        return PredicateVerdict("A", False, math.nan, None, 0, applicable=False, param=param,
                                note="submersion fails at this sample", details={"reason": "submersion"})
    foot0 = ld.foot
    dists = [ld.distance]
    r = patch.param_dim - W.dim
    walked = 0
    for i in range(r):
        for sgn in (1.0, -1.0):
            ucur = u0
            kappa = sgn * ld.kernel_param[:, i]
            for _ in range(config.fiber_steps):
                upred = ucur + config.delta_fiber * kappa
                if not patch.in_domain(upred):
                    break
                try:
                    unew = _correct(patch, upred, W, foot0, config)
                except ContinuationStalled as exc:
                    return PredicateVerdict("A", False, math.nan, None, walked, applicable=False, param=param,
                                            note=f"continuation stalled: {exc}", details={"reason": "stalled"})
                if not patch.in_domain(unew):
                    break
                _, K = _param_kernel(patch, unew, W, config)
                kappa = K @ (K.T @ kappa)
                nk = np.linalg.norm(kappa)
                if nk == 0:
                    break
                kappa /= nk
                dists.append(project_W(patch.eval(unew), W, config).distance)
                ucur = unew
                walked += 1
    spread = float(max(dists) - min(dists))
    holds = spread < config.tol_fiber
    return PredicateVerdict("A", holds, spread, {"foot": foot0, "distance": ld.distance} if holds else None,
                            walked, param=param, details={"fiber_distance_range": [min(dists), max(dists)]})


def aggregate_A(per_sample: list[PredicateVerdict]) -> PredicateVerdict:
    """Combine per-sample fiber spreads into one (A) verdict.

    NotApplicable as soon as one sample fails the submersion test; samples
    whose continuation stalled are skipped and listed.
    """
    for v in per_sample:
        if not v.applicable and v.details.get("reason") == "submersion":
            return PredicateVerdict("A", False, math.nan, None, len(per_sample), applicable=False,
                                    note="submersion fails", details={"failing_sample": v.param})
    used = [v for v in per_sample if v.applicable]
    skipped = [v.param for v in per_sample if not v.applicable]
    spread = max((v.residual for v in used), default=0.0)
    holds = bool(used) and all(v.holds for v in used)
    worst = max(used, key=lambda v: v.residual).param if used else None
    return PredicateVerdict("A", holds, spread, {"samples": len(used)} if holds else None, len(per_sample),
                            details={"skipped": skipped, "worst_sample": worst})


def check_A_fiberwise(patch: ImmersedPatch, W: TotallyGeodesic, sample_plan: SamplePlan = SamplePlan(),
                      config: Config = DEFAULT, params=None) -> PredicateVerdict:
    """Aggregate fiber-constancy verdict over a sample plan."""
    params = sample_parameters(patch, sample_plan) if params is None else np.atleast_2d(params)
    per = []
    for u in params:
        v = fiber_spread(patch, u, W, config)
        per.append(v)
        if not v.applicable and v.details.get("reason") == "submersion":
            break
    return aggregate_A(per)


# -- theorem-level reports --------------------------------------------------


@dataclass
class ImplicationRow:
    implication: str
    checked: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class Theorem1Report:
    curvature: float
    samples: list  # dicts predicate -> PredicateVerdict
    implications: list
    patterns: dict
    skipped: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.implications)

    def column(self, name: str) -> list[bool]:
        return [s[name].holds for s in self.samples]

    def to_record(self) -> dict:
        return {
            "curvature": self.curvature,
            "implications": [
                {"implication": r.implication, "checked": r.checked, "violations": [list(map(float, p)) for p in r.violations]}
                for r in self.implications
            ],
            "patterns": self.patterns,
            "skipped": [list(map(float, p)) for p in self.skipped],
            "ok": self.ok,
        }


def _implications_for(c: float, j: int = 1):
    """Implications proved for each curvature sign (with the remarks and the c > 0 proposition).

    The c > 0 "(C) always" argument transports a unit vector of T_pW, so it
    needs dim W >= 1.
    """
    rows = [
        ("B => A", lambda a, b, cc: (not b) or a),
        ("A => C", lambda a, b, cc: (not a) or cc),
        ("B => C", lambda a, b, cc: (not b) or cc),
    ]
    if c == 0:
        rows += [("A => B", lambda a, b, cc: (not a) or b), ("C => A", lambda a, b, cc: (not cc) or a)]
    elif c > 0:
        rows += [("A => B", lambda a, b, cc: (not a) or b)]
        if j >= 1:
            rows += [("C always", lambda a, b, cc: cc)]
    else:
        rows += [("C => A", lambda a, b, cc: (not cc) or a)]
    return rows


def evaluate_sample(patch, u, W, config: Config = DEFAULT, seed: int = 0) -> dict:
    """Submersion, A, B, C verdicts at one sample, sharing the local data."""
    ld = local_data(patch, u, W, config)
    out = {"submersion": check_submersion(patch, u, W, config, data=ld)}
    if out["submersion"].holds:
        out["A"] = fiber_spread(patch, u, W, config, data=ld)
    out["B"] = check_B(patch, u, W, config, seed=seed, frame=ld.frame)
    out["C"] = check_C(patch, u, W, config, seed=seed, data=ld)
    return out


def theorem1_consistency(patch: ImmersedPatch, W: TotallyGeodesic, sample_plan: SamplePlan = SamplePlan(),
                         config: Config = DEFAULT, params=None, evaluations=None) -> Theorem1Report:
    """A/B/C verdicts on a sample and the implications proved for sign(c)."""
    c = patch.space.c
    params = sample_parameters(patch, sample_plan) if params is None else np.atleast_2d(params)
    if evaluations is None:
        evaluations = [evaluate_sample(patch, u, W, config, seed=sample_plan.seed) for u in params]
    samples, skipped = [], []
    for u, ev in zip(params, evaluations):
        if not ev["submersion"].holds or not ev["A"].applicable:
            skipped.append(tuple(u))
            continue
        samples.append(ev)
    rows = []
    for name, rule in _implications_for(c, W.dim):
        bad = [s["A"].param for s in samples if not rule(s["A"].holds, s["B"].holds, s["C"].holds)]
        rows.append(ImplicationRow(name, len(samples), bad))
    patterns: dict[str, int] = {}
    for s in samples:
        key = "".join(f"{p}" if s[p].holds else f"~{p}" for p in "ABC")
        patterns[key] = patterns.get(key, 0) + 1
    return Theorem1Report(c, samples, rows, dict(sorted(patterns.items())), skipped)


@dataclass
class HypersurfaceReport:
    checked: int
    non_submersion: int
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_record(self) -> dict:
        return {"checked": self.checked, "non_submersion": self.non_submersion,
                "violations": [list(map(float, p)) for p in self.violations], "ok": self.ok}


def check_prop_hypersurface_submersion(patch: ImmersedPatch, W: TotallyGeodesic,
                                       sample_plan: SamplePlan = SamplePlan(), config: Config = DEFAULT,
                                       params=None) -> HypersurfaceReport:
    """For c <= 0 and a hypersurface: where the submersion fails, (C) must fail too."""
    sp = patch.space
    if sp.c > 0:
        raise ValueError("the hypersurface criterion is stated for c <= 0")
    if patch.param_dim != sp.n - 1:
        raise ValueError("patch is not a hypersurface")
    params = sample_parameters(patch, sample_plan) if params is None else np.atleast_2d(params)
    bad, nsub = [], 0
    for u in params:
        ld = local_data(patch, u, W, config)
        if check_submersion(patch, u, W, config, data=ld).holds:
            continue
        nsub += 1
        if check_C(patch, u, W, config, seed=sample_plan.seed, data=ld).holds:
            bad.append(tuple(u))
    return HypersurfaceReport(len(params), nsub, bad)
