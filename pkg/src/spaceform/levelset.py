"""Lipschitz fields on a space form and level-set constancy of immersions.

For a C-Lipschitz G the equality |G(q) - G(gamma(1))| = C L(gamma) along a
geodesic leaving q orthogonally to v is checked per field kind: for distance
fields it says that gamma is a minimal segment to the target set, for
Busemann fields that gamma is the asymptotic ray.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
import numpy as np

from .config import DEFAULT, Config
from .core import SpaceForm, TotallyGeodesic, focal_distance, project_W
from .errors import EmptyNearestSet, LipschitzViolation, OnFocalSet
from .horosphere import IdealPoint, asymptotic_direction, busemann
from .immersion import ImmersedPatch, SamplePlan, frame_at, sample_parameters


@dataclass(frozen=True, eq=False)
class LipschitzField:
    """G = scale * (base field); ``kind`` is "distance" or "busemann".

    ``target`` is a TotallyGeodesic, an (N x d) point cloud, or an IdealPoint.
    """

    space: SpaceForm
    kind: str
    target: object
    scale: float = 1.0

    @property
    def lipschitz_constant(self) -> float:
        return self.scale

    def scaled(self, lam: float) -> "LipschitzField":
        if lam <= 0:
            raise ValueError("scale factor must be positive")
        return replace(self, scale=self.scale * lam)

    def __call__(self, x) -> float:
        return self.scale * self._base(np.asarray(x, dtype=float))

    def _base(self, x) -> float:
        if self.kind == "busemann":
            return float(busemann(x, self.target))
        if isinstance(self.target, TotallyGeodesic):
            try:
                return project_W(x, self.target).distance
            except OnFocalSet:
                return focal_distance(self.target)
        return float(min(self.space.dist(x, a) for a in self.target))

    def nearest(self, x, tol: float = 1e-9) -> list[np.ndarray]:
        """Nearest points of the target set (all ties within ``tol``)."""
        if self.kind != "distance":
            raise TypeError("only distance fields have nearest points")
        if isinstance(self.target, TotallyGeodesic):
            return [project_W(x, self.target).foot]
        pts = np.atleast_2d(self.target)
        if pts.shape[0] == 0:
            raise EmptyNearestSet("target point cloud is empty")
        d = np.array([self.space.dist(x, a) for a in pts])
        return [pts[i] for i in np.flatnonzero(d <= d.min() + tol)]


def distance_to_W(W: TotallyGeodesic) -> LipschitzField:
    return LipschitzField(W.space, "distance", W)


def distance_to_points(space: SpaceForm, points) -> LipschitzField:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return LipschitzField(space, "distance", pts)


def busemann_field(xi: IdealPoint) -> LipschitzField:
    return LipschitzField(xi.space, "busemann", xi)


def _directions(field: LipschitzField, q) -> list[np.ndarray]:
    """Unit directions of the geodesics realizing equality at q."""
    sp = field.space
    if field.kind == "busemann":
        return [asymptotic_direction(q, field.target)]
    out = []
    for a in field.nearest(q):
        v = sp.log_map(q, a)
        nv = sp.norm(v)
        if nv > 0:
            out.append(v / nv)
    if not out:
        raise EmptyNearestSet("q lies on the target set")
    return out


def hypothesis_residual(field: LipschitzField, patch: ImmersedPatch, u, v, config: Config = DEFAULT) -> float:
    """min over equality geodesics of |<unit direction, v>| for a tangent v at f(u)."""
    sp = field.space
    q = patch.eval(u)
    v = np.asarray(v, dtype=float)
    v = v / sp.norm(v)
    return float(min(abs(float(sp.form(d, v))) for d in _directions(field, q)))


def sample_residual(field: LipschitzField, patch: ImmersedPatch, u, config: Config = DEFAULT) -> float:
    """Largest hypothesis residual over unit tangent vectors at f(u)."""
    sp = field.space
    fr = frame_at(patch, u, config)
    return float(min(np.linalg.norm(sp.lower(fr.tangent_frame.T) @ d) for d in _directions(field, fr.point)))


def check_lipschitz(field: LipschitzField, points, rng: np.random.Generator, pairs: int = 1000,
                    spread: float = 0.5) -> float:
    """Worst excess |G(x) - G(y)| - C d(x, y) over random pairs near ``points``."""
    sp = field.space
    pts = np.atleast_2d(points)
    worst = -np.inf
    for _ in range(pairs):
        x, y = (sp.exp_map(p, sp.random_tangent(p, rng), spread * rng.uniform()) for p in pts[rng.integers(len(pts), size=2)])
        excess = abs(field(x) - field(y)) - field.lipschitz_constant * sp.dist(x, y)
        worst = max(worst, excess)
    return float(worst)


@dataclass
class LevelReport:
    constant: bool
    spread: float
    level: float
    max_residual: float
    median_residual: float
    lipschitz_excess: float
    lipschitz_constant: float
    values: np.ndarray
    residuals: np.ndarray
    params: np.ndarray

    @property
    def hypothesis_holds(self) -> bool:
        return self.max_residual < 1e-6

    @property
    def implication_ok(self) -> bool:
        return (not self.hypothesis_holds) or self.spread < 1e-5 * self.lipschitz_constant

    def to_record(self) -> dict:
        return {
            "constant": self.constant,
            "spread": self.spread,
            "level": self.level,
            "max_hypothesis_residual": self.max_residual,
            "median_hypothesis_residual": self.median_residual,
            "lipschitz_excess": self.lipschitz_excess,
            "hypothesis_holds": self.hypothesis_holds,
            "implication_ok": self.implication_ok,
        }


def verify_level(field: LipschitzField, patch: ImmersedPatch, sample_plan: SamplePlan = SamplePlan(),
                 config: Config = DEFAULT, params=None) -> LevelReport:
    """Spread and median of G o f on a sample, with hypothesis-residual statistics.

    Constancy is judged on the spread relative to the Lipschitz constant, so
    rescaling G never changes the verdict.
    """
    params = sample_parameters(patch, sample_plan) if params is None else np.atleast_2d(params)
    pts = np.array([patch.eval(u) for u in params])
    rng = np.random.default_rng([sample_plan.seed, 0x11B])
    excess = check_lipschitz(field, pts, rng, config.lipschitz_pairs)
    if excess > config.lipschitz_slack * field.lipschitz_constant:
        raise LipschitzViolation(f"Lipschitz bound exceeded by {excess:.3e}")
    vals = np.array([field(x) for x in pts])
    res = np.array([sample_residual(field, patch, u, config) for u in params])
    spread = float(vals.max() - vals.min())
    C = field.lipschitz_constant
    return LevelReport(
        constant=spread < config.tol_level * C,
        spread=spread,
        level=float(np.median(vals)),
        max_residual=float(res.max()),
        median_residual=float(np.median(res)),
        lipschitz_excess=excess,
        lipschitz_constant=C,
        values=vals,
        residuals=res,
        params=params,
    )
