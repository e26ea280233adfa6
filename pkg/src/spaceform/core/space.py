"""Closed-form geometry of the space forms Q^n_c.

Points are plain ``numpy`` arrays holding ambient coordinates:

* ``c = 0``: R^n with the dot product;
* ``c > 0``: the sphere <x, x> = 1/c in R^{n+1};
* ``c < 0``: the upper sheet <x, x> = 1/c, x_0 > 0, of the hyperboloid in
  Minkowski space R^{1,n} with <x, y> = -x_0 y_0 + sum_i x_i y_i.

Tangent vectors at p are ambient vectors form-orthogonal to p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import DEFAULT, Config
from ..errors import AntipodalPoints, ModelViolation


@dataclass(frozen=True)
class SpaceForm:
    n: int
    c: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "c", float(self.c))

    # -- ambient structure -------------------------------------------------

    @property
    def ambient_dim(self) -> int:
        return self.n if self.c == 0 else self.n + 1

    @property
    def k(self) -> float:
        """sqrt(|c|); 0 for flat space."""
        return math.sqrt(abs(self.c))

    @property
    def metric(self) -> np.ndarray:
        g = np.eye(self.ambient_dim)
        if self.c < 0:
            g[0, 0] = -1.0
        return g

    @property
    def signs(self) -> np.ndarray:
        s = np.ones(self.ambient_dim)
        if self.c < 0:
            s[0] = -1.0
        return s

    def form(self, x, y):
        """Ambient bilinear form, broadcasting over leading axes."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.c < 0:
            return np.sum(x * y, axis=-1) - 2.0 * x[..., 0] * y[..., 0]
        return np.sum(x * y, axis=-1)

    def lower(self, x):
        """Index-lowered vector, so that ``self.lower(x) @ y == form(x, y)``."""
        x = np.array(x, dtype=float)
        if self.c < 0:
            x[..., 0] *= -1.0
        return x

    def norm(self, v) -> float:
        return math.sqrt(max(float(self.form(v, v)), 0.0))

    @property
    def injectivity_radius(self) -> float:
        return math.pi / self.k if self.c > 0 else math.inf

    # -- model residency ---------------------------------------------------

    def model_residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.c == 0:
            return 0.0
        # relative to the radius 1/k so that rescaled curvatures compare alike;
        # on the hyperboloid the form value is a difference of two terms of size
        # |x|^2, so the defect is measured against that size
        return abs(float(self.form(x, x)) * self.c - 1.0) / max(1.0, abs(self.c) * float(x @ x))

    def check_point(self, x, config: Config = DEFAULT) -> None:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise ModelViolation(f"expected {self.ambient_dim} coordinates, got shape {x.shape}")
        if self.model_residual(x) > config.tol_model:
            raise ModelViolation(f"point off the model surface by {self.model_residual(x):.3e}")
        if self.c < 0 and x[0] <= 0:
            raise ModelViolation("hyperboloid point is not on the upper sheet")

    def renormalize(self, x) -> np.ndarray:
        """One renormalization step onto the model surface."""
        x = np.array(x, dtype=float)
        if self.c == 0:
            return x
        q = float(self.form(x, x))
        if self.c > 0:
            if q <= 0:
                raise ModelViolation("cannot renormalize the zero vector onto the sphere")
            return x / (self.k * math.sqrt(q))
        if x[0] <= 0:
            raise ModelViolation("cannot renormalize a non-future-timelike vector onto the hyperboloid")
        if -q > 1e-6 * float(x @ x):
            return x / (self.k * math.sqrt(-q))
        # far from the origin the form value cancels; rebuild x_0 from the spatial part
        spatial = float(x[1:] @ x[1:])
        if q >= 0 and x[0] ** 2 < 0.5 * spatial:
            raise ModelViolation("cannot renormalize a non-future-timelike vector onto the hyperboloid")
        x[0] = math.sqrt(1.0 / self.k**2 + spatial)
        return x

    def to_tangent(self, p, v) -> np.ndarray:
        """Form-orthogonal projection of an ambient vector onto T_p."""
        v = np.array(v, dtype=float)
        if self.c == 0:
            return v
        return v - self.c * float(self.form(p, v)) * np.asarray(p, dtype=float)

    def origin(self) -> np.ndarray:
        o = np.zeros(self.ambient_dim)
        if self.c != 0:
            o[0] = 1.0 / self.k
        return o

    def random_point(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        """Point at geodesic distance ~ scale from the origin, in random direction."""
        o = self.origin()
        v = self.to_tangent(o, rng.normal(size=self.ambient_dim))
        return self.exp_map(o, v, scale / max(self.norm(v), 1e-300) * rng.uniform(0.0, 1.0))

    def random_tangent(self, p, rng: np.random.Generator) -> np.ndarray:
        return self.to_tangent(p, rng.normal(size=self.ambient_dim))

    # -- geodesics ---------------------------------------------------------

    def exp_map(self, p, v, t: float = 1.0) -> np.ndarray:
        """gamma_v(t) for the geodesic with gamma(0) = p, gamma'(0) = v."""
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        speed = self.norm(v)
        if speed == 0.0:
            return p.copy()
        s = t * speed
        if self.c == 0:
            return p + t * v
        k = self.k
        e = v / speed
        if self.c > 0:
            out = math.cos(k * s) * p + math.sin(k * s) / k * e
        else:
            out = math.cosh(k * s) * p + math.sinh(k * s) / k * e
        return self.renormalize(out)

    def _cos_arg(self, p, q, config: Config) -> float:
        """c <p, q>, clamped into the domain of arccos / arccosh."""
        a = self.c * float(self.form(p, q))
        if self.c > 0:
            if a > 1.0 or a < -1.0:
                if abs(a) - 1.0 > config.tol_model:
                    raise ModelViolation(f"c<p,q> = {a!r} outside [-1, 1]")
                a = max(-1.0, min(1.0, a))
        elif a < 1.0:
            if 1.0 - a > config.tol_model:
                raise ModelViolation(f"c<p,q> = {a!r} below 1")
            a = 1.0
        return a

    def dist(self, p, q, config: Config = DEFAULT) -> float:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.c == 0:
            return float(np.linalg.norm(p - q))
        k = self.k
        u = q - self.c * float(self.form(p, q)) * p
        # atan2 form is accurate for nearby and nearly antipodal points alike
        a = self._cos_arg(p, q, config)
        un = self.norm(u) * k
        if self.c > 0:
            return math.atan2(un, a) / k
        return math.asinh(un) / k if a < 2.0 else math.acosh(a) / k

    def log_map(self, p, q, config: Config = DEFAULT) -> np.ndarray:
        """Initial velocity of the minimal geodesic from p reaching q at time 1."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.c == 0:
            return q - p
        d = self.dist(p, q, config)
        if self.c > 0 and d >= math.pi / self.k - config.tol_antipode:
            raise AntipodalPoints(f"points at distance {d!r} from each other are (nearly) antipodal")
        u = q - self.c * float(self.form(p, q)) * p
        un = self.norm(u)
        if un == 0.0 or d == 0.0:
            return np.zeros_like(p)
        return d / un * u

    def geodesic_velocity(self, p, e, s: float) -> np.ndarray:
        """gamma'(s) for the unit-speed geodesic from p with unit direction e."""
        if self.c == 0:
            return np.array(e, dtype=float)
        k = self.k
        if self.c > 0:
            return -k * math.sin(k * s) * p + math.cos(k * s) * e
        return k * math.sinh(k * s) * p + math.cosh(k * s) * e

    def parallel_transport(self, v, p, q, config: Config = DEFAULT) -> np.ndarray:
        """Transport v from T_p to T_q along the minimal geodesic.

        The component along the geodesic direction is carried to the
        geodesic's velocity at q; the component normal to the plane of the
        geodesic is a constant ambient vector along it and stays fixed.
        """
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.c == 0:
            return v.copy()
        w = self.log_map(p, q, config)
        d = self.norm(w)
        if d == 0.0:
            return v.copy()
        e = w / d
        a = float(self.form(v, e))
        return v + a * (self.geodesic_velocity(p, e, d) - e)
