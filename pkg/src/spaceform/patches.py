"""Ready-made patches: geodesic spheres, horospheres, charts of totally geodesic planes."""

from __future__ import annotations

import math

import numpy as np

from .core import SpaceForm, TotallyGeodesic, form_orthonormalize
from .immersion import ImmersedPatch


def _radial_scale(space: SpaceForm, r: float) -> float:
    if space.c == 0:
        return r
    k = space.k
    return math.sin(k * r) / k if space.c > 0 else math.sinh(k * r) / k


def tangent_basis(space: SpaceForm, p, rng=None) -> np.ndarray:
    """Orthonormal basis (columns) of T_p, deterministic unless ``rng`` is given."""
    p = np.asarray(p, dtype=float)
    M = np.eye(space.ambient_dim) if rng is None else rng.normal(size=(space.ambient_dim, space.ambient_dim))
    cols = np.column_stack([space.to_tangent(p, m) for m in M.T])
    return form_orthonormalize(space, cols, tol=1e-10)[:, : space.n]


def geodesic_sphere_patch(space: SpaceForm, center, radius: float, basis=None,
                          lat: float = 1.2) -> ImmersedPatch:
    """S(center, radius) for n = 3 in longitude/latitude coordinates, poles cut off."""
    if space.n != 3:
        raise ValueError("geodesic_sphere_patch needs n = 3")
    center = np.asarray(center, dtype=float)
    E = tangent_basis(space, center) if basis is None else np.asarray(basis, dtype=float)
    s = _radial_scale(space, radius)
    if space.c == 0:
        a, b = 1.0, s
    elif space.c > 0:
        a, b = math.cos(space.k * radius), s
    else:
        a, b = math.cosh(space.k * radius), s

    def direction(u):
        th, ph = u
        return E @ np.array([math.cos(ph) * math.cos(th), math.cos(ph) * math.sin(th), math.sin(ph)])

    def f(u):
        d = direction(u)
        return center + b * d if space.c == 0 else a * center + b * d

    def jac(u):
        th, ph = u
        dth = E @ np.array([-math.cos(ph) * math.sin(th), math.cos(ph) * math.cos(th), 0.0])
        dph = E @ np.array([-math.sin(ph) * math.cos(th), -math.sin(ph) * math.sin(th), math.cos(ph)])
        return b * np.column_stack([dth, dph])

    return ImmersedPatch(space, (0.0, -lat), (2 * math.pi, lat), f, jac, name=f"sphere(r={radius:g})")


def horosphere_patch(space: SpaceForm, half_width: float = 1.5) -> ImmersedPatch:
    """Horosphere through the origin o for the ideal point of the ray along the last axis.

    x(u) = o + sum u_i e_i + |u|^2 / 2 * xi with xi = (o + e_n / k) / R^2, the
    gauge with <o, xi> = -1; every x(u) has <x, xi> = -1, i.e. Busemann value 0.
    """
    if space.c >= 0:
        raise ValueError("horospheres need c < 0")
    n, k = space.n, space.k
    o = space.origin()
    xi = k * k * o
    xi[n] += k
    m = n - 1

    def f(u):
        x = o.copy()
        x[1:n] += u
        return x + 0.5 * float(u @ u) * xi

    def jac(u):
        J = np.zeros((n + 1, m))
        J[1:n, :] = np.eye(m)
        return J + np.outer(xi, u)

    return ImmersedPatch(space, (-half_width,) * m, (half_width,) * m, f, jac, name="horosphere")


def totally_geodesic_patch(W: TotallyGeodesic, half_width: float = 1.0) -> ImmersedPatch:
    """Exponential chart of W as a patch."""
    sp = W.space
    j = W.dim

    def f(u):
        return W.chart(u)

    return ImmersedPatch(sp, (-half_width,) * j, (half_width,) * j, f, name=f"plane(j={j})")


def tilted_plane(space: SpaceForm, angle: float, offset: float = 0.0) -> TotallyGeodesic:
    """Totally geodesic hyperplane (n = 3) through exp_o(offset * e_1) whose normal
    makes ``angle`` with the last axis."""
    if space.n != 3:
        raise ValueError("tilted_plane needs n = 3")
    o = space.origin()
    e = np.eye(space.ambient_dim)
    i0 = 0 if space.c == 0 else 1
    e1, e2, e3 = e[i0], e[i0 + 1], e[i0 + 2]
    p = space.exp_map(o, e1, offset)
    # the plane at o is spanned by these; its unit normal is cos(angle) e3 + sin(angle) e1
    dirs = [math.cos(angle) * e1 - math.sin(angle) * e3, e2]
    if offset:
        dirs = [space.parallel_transport(d, o, p) for d in dirs]
    return TotallyGeodesic.through(space, p, dirs)


def revolution_patch(W: TotallyGeodesic, profile, s_range=(-1.0, 1.0)) -> ImmersedPatch:
    """Surface of revolution about a geodesic line W (n = 3): distance profile(s) from W.chart(s).

    The normal space of W is tangent to the model along all of W, so the
    parallel normal field needed for the rotation is the constant vector.
    """
    sp = W.space
    if sp.n != 3 or W.dim != 1:
        raise ValueError("revolution_patch needs n = 3 and a geodesic line W")
    n1, n2 = W.normal_space.T

    def f(u):
        s, th = u
        w = W.chart([s])
        d = sp.to_tangent(w, math.cos(th) * n1 + math.sin(th) * n2)
        return sp.exp_map(w, d / sp.norm(d), profile(s))

    return ImmersedPatch(sp, (s_range[0], 0.0), (s_range[1], 2 * math.pi), f, name="revolution")


def random_patch(space: SpaceForm, rng: np.random.Generator, size: float = 0.3, bend: float = 1.0,
                 center=None) -> ImmersedPatch:
    """Random bent 2-dimensional graph over a tangent plane at a random point."""
    p = space.random_point(rng, 1.0) if center is None else np.asarray(center, dtype=float)
    E = tangent_basis(space, p, rng)
    a, b, d = E[:, 0], E[:, 1], E[:, 2]
    coef = bend * rng.normal(size=3)

    def f(u):
        x, y = u
        h = coef[0] * x * x + coef[1] * x * y + coef[2] * y * y
        return space.exp_map(p, x * a + y * b + h * d)

    return ImmersedPatch(space, (-size, -size), (size, size), f, name="random")
