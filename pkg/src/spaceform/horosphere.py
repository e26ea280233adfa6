"""Ideal points, Busemann functions and horospheres of hyperbolic space (c < 0).

Ideal points are future null vectors xi of the Minkowski ambient space, in
the gauge <o, xi> = -1 at the origin o.  Then

    h(x) = (1/k) log(<x, xi> / <o, xi>)

is the Busemann function of the ray from o toward xi; it vanishes at o and
decreases along the ray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .core import SpaceForm
from .errors import ModelViolation
from .immersion import ImmersedPatch, SamplePlan, frame_at, sample_parameters


@dataclass(frozen=True, eq=False)
class IdealPoint:
    space: SpaceForm
    xi: np.ndarray

    def __post_init__(self):
        sp = self.space
        if sp.c >= 0:
            raise ValueError("ideal points are only modelled for c < 0")
        xi = np.asarray(self.xi, dtype=float)
        if xi.shape != (sp.ambient_dim,) or xi[0] <= 0:
            raise ModelViolation("an ideal point needs a future-pointing ambient vector")
        scale = -float(sp.form(sp.origin(), xi))
        if scale <= 0:
            raise ModelViolation("vector is not future null")
        xi = xi / scale
        if abs(float(sp.form(xi, xi))) > DEFAULT.tol_model * max(1.0, float(xi @ xi)):
            raise ModelViolation("ideal point vector is not null")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def from_direction(cls, space: SpaceForm, e) -> "IdealPoint":
        """Endpoint of the ray from the origin with initial direction e."""
        o = space.origin()
        e = space.to_tangent(o, e)
        e = e / space.norm(e)
        return cls(space, space.k**2 * o + space.k * e)

    def ray(self, s: float) -> np.ndarray:
        """Unit-speed ray alpha(s) from the origin toward this ideal point."""
        sp = self.space
        o = sp.origin()
        e = (self.xi - sp.k**2 * o) / sp.k
        return sp.exp_map(o, e, s)


def busemann(x, xi: IdealPoint) -> float:
    """Busemann function in the gauge h(o) = 0; accepts a single point or rows.

    Far out toward xi the value -<x, xi> is tiny while x is huge, so it is
    recovered from the opposite null vector xi' = 2 k^2 o - xi and the model
    constraint, (-<x, xi>)(-<x, xi'>) = 1 + k^2 |t|^2 with t the part of x
    orthogonal to o and the ray direction.
    """
    sp = xi.space
    k = sp.k
    x = np.asarray(x, dtype=float)
    o = sp.origin()
    a = -sp.form(x, xi.xi)
    b = -sp.form(x, 2 * k * k * o - xi.xi)
    e = (xi.xi - k * k * o)[1:] / k
    xs = x[..., 1:]
    t = xs - np.multiply.outer(xs @ e, e) if xs.ndim > 1 else xs - (xs @ e) * e
    stable = (1.0 + k * k * np.sum(t * t, axis=-1)) / b
    val = np.where(a >= b, a, stable)
    return np.log(val) / k


def busemann_truncated(x, xi: IdealPoint, T: float = 30.0) -> float:
    """d(x, alpha(T)) - T, the defining limit cut at T (a test oracle)."""
    return xi.space.dist(x, xi.ray(T)) - T


def busemann_gradient(p, xi: IdealPoint) -> np.ndarray:
    """Riemannian gradient of the Busemann function at p (a unit vector)."""
    sp = xi.space
    p = np.asarray(p, dtype=float)
    return sp.to_tangent(p, xi.xi / (sp.k * float(sp.form(p, xi.xi))))


def asymptotic_direction(p, xi: IdealPoint) -> np.ndarray:
    """Unit tangent eta at p whose ray converges to xi: minus the Busemann gradient."""
    sp = xi.space
    p = np.asarray(p, dtype=float)
    eta = -xi.xi / (sp.k * float(sp.form(p, xi.xi))) + (sp.c / sp.k) * p
    return eta / sp.norm(eta)


@dataclass
class HorosphereReport:
    residuals: np.ndarray
    values: np.ndarray
    max_residual: float
    spread: float
    level: float
    params: np.ndarray
    gauge: str = "<o, xi> = -1"

    @property
    def hypothesis_holds(self) -> bool:
        return self.max_residual < 1e-6

    @property
    def on_horosphere(self) -> bool:
        return self.spread < 1e-5

    @property
    def ok(self) -> bool:
        """The implication hypothesis => one horosphere, as asserted on the sample."""
        return (not self.hypothesis_holds) or self.on_horosphere

    def to_record(self) -> dict:
        return {
            "max_residual": self.max_residual,
            "spread": self.spread,
            "level": self.level,
            "gauge": self.gauge,
            "hypothesis_holds": self.hypothesis_holds,
            "on_horosphere": self.on_horosphere,
            "ok": self.ok,
        }


def horosphere_residual(patch: ImmersedPatch, u, xi: IdealPoint, config: Config = DEFAULT) -> float:
    """Norm of the tangential part of the asymptotic direction at f(u)."""
    fr = frame_at(patch, u, config)
    eta = asymptotic_direction(fr.point, xi)
    return float(np.linalg.norm(patch.space.lower(fr.tangent_frame.T) @ eta))


def check_theorem_1_3(patch: ImmersedPatch, xi: IdealPoint, sample_plan: SamplePlan = SamplePlan(),
                      config: Config = DEFAULT, params=None) -> HorosphereReport:
    """Asymptotic-direction orthogonality versus Busemann spread on a sample."""
    if patch.space.c >= 0:
        raise ValueError("the horosphere check needs c < 0")
    params = sample_parameters(patch, sample_plan) if params is None else np.atleast_2d(params)
    res = np.array([horosphere_residual(patch, u, xi, config) for u in params])
    vals = np.array([busemann(patch.eval(u), xi) for u in params])
    return HorosphereReport(res, vals, float(res.max()), float(vals.max() - vals.min()),
                            float(np.median(vals)), params)
