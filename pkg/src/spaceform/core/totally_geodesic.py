"""Totally geodesic submanifolds W, the projection pi_W, S_pW, V_W and G_W.

For c != 0 a totally geodesic W^j is the model surface cut by a linear
subspace L of dimension j + 1; for c = 0 it is an affine subspace.  Both are
stored through a base point ``p0`` of W and a form-orthonormal frame of
T_{p0}W, which also yields an exact exponential chart of W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.linalg
from scipy.stats import special_ortho_group

from ..config import DEFAULT, Config
from ..errors import ModelViolation, OnFocalSet
from .space import SpaceForm


def form_orthonormalize(space: SpaceForm, vectors, tol: float = 1e-12) -> np.ndarray:
    """Form-orthonormal basis (columns) of span(vectors), assumed spacelike.

    Vectors are given as columns.  Directions whose form-norm drops below
    ``tol`` relative to the largest are discarded.
    """
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        return np.zeros((space.ambient_dim, 0))
    G = V.T @ space.lower(V.T).T
    G = 0.5 * (G + G.T)
    w, U = np.linalg.eigh(G)
    top = max(w.max(), 0.0)
    keep = w > tol * max(top, 1e-300)
    if np.any(w < -tol * max(top, 1e-300)):
        raise ModelViolation("span contains timelike directions")
    B = V @ (U[:, keep] / np.sqrt(w[keep]))
    # eigh returns ascending order; keep the most significant first
    return B[:, ::-1]


def form_complement(space: SpaceForm, vectors) -> np.ndarray:
    """Basis (columns) of the form-orthogonal complement of the column span."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    if V.size == 0:
        return np.eye(space.ambient_dim)
    return scipy.linalg.null_space(space.lower(V.T))


class Projection(NamedTuple):
    foot: np.ndarray
    distance: float


@dataclass(frozen=True, eq=False)
class TotallyGeodesic:
    """Complete totally geodesic W^j through ``base`` with tangent ``frame``.

    ``frame`` holds j form-orthonormal tangent vectors at ``base`` as columns.
    """

    space: SpaceForm
    base: np.ndarray
    frame: np.ndarray
    _normal: np.ndarray = field(init=False, repr=False)
    _span: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        sp = self.space
        base = np.asarray(self.base, dtype=float)
        frame = np.asarray(self.frame, dtype=float).reshape(sp.ambient_dim, -1)
        if frame.shape[1] > sp.n - 1:
            raise ValueError(f"W must have dimension at most n-1 = {sp.n - 1}")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "frame", frame)
        if sp.c == 0:
            span = frame
        else:
            span = np.column_stack([base * sp.k, frame])
        object.__setattr__(self, "_span", span)
        normal = form_complement(sp, span) if span.shape[1] else np.eye(sp.ambient_dim)
        object.__setattr__(self, "_normal", form_orthonormalize(sp, normal))

    # -- constructors ------------------------------------------------------

    @classmethod
    def through(cls, space: SpaceForm, point, directions=(), config: Config = DEFAULT):
        """W through ``point`` with tangent space spanned by ``directions``."""
        point = space.renormalize(point)
        space.check_point(point, config)
        dirs = [space.to_tangent(point, d) for d in directions]
        frame = form_orthonormalize(space, np.column_stack(dirs)) if dirs else np.zeros((space.ambient_dim, 0))
        if frame.shape[1] != len(dirs):
            raise ValueError("tangent directions of W are linearly dependent")
        return cls(space, point, frame)

    @classmethod
    def from_span(cls, space: SpaceForm, vectors, config: Config = DEFAULT):
        """W = model surface cut by span(vectors) (c != 0); rows are vectors."""
        if space.c == 0:
            raise ValueError("use TotallyGeodesic.through for flat space")
        V = np.atleast_2d(np.asarray(vectors, dtype=float)).T
        G = V.T @ space.lower(V.T).T
        w, U = np.linalg.eigh(0.5 * (G + G.T))
        if space.c > 0:
            base = V @ U[:, -1]
        else:
            if w[0] >= 0:
                raise ModelViolation("span has no timelike vector: it does not meet the hyperboloid")
            base = V @ U[:, 0]
            if base[0] < 0:
                base = -base
        base = space.renormalize(base)
        # tangent directions of W: span(V) intersected with base^perp
        tang = [space.to_tangent(base, x) for x in V.T]
        frame = form_orthonormalize(space, np.column_stack(tang), tol=1e-10)
        if frame.shape[1] != np.linalg.matrix_rank(V) - 1:
            raise ValueError("degenerate span for W")
        return cls(space, base, frame)

    # -- structure ---------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.frame.shape[1]

    @property
    def span(self) -> np.ndarray:
        """Columns spanning L (c != 0) or the direction space (c = 0)."""
        return self._span

    @property
    def normal_space(self) -> np.ndarray:
        """Form-orthonormal basis of L^perp (columns); tangent to Q along all of W."""
        return self._normal

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        if self.space.c == 0:
            x = x - self.base
        return bool(np.all(np.abs(self.space.lower(x) @ self._normal) <= tol * max(1.0, np.abs(x).max())))

    def chart(self, a) -> np.ndarray:
        """Exponential chart of W at ``base``: a in R^j -> point of W."""
        a = np.asarray(a, dtype=float).reshape(self.dim)
        return self.space.exp_map(self.base, self.frame @ a)

    def chart_coords(self, w) -> np.ndarray:
        """Inverse of :meth:`chart` for w in W (principal branch for c > 0)."""
        v = self.space.log_map(self.base, w)
        return self.space.lower(self.frame.T) @ v

    def tangent_frame(self, p) -> np.ndarray:
        """Form-orthonormal frame of T_pW for p in W."""
        sp = self.space
        if self.dim == 0:
            return np.zeros((sp.ambient_dim, 0))
        if sp.c == 0:
            return self.frame.copy()
        cols = np.column_stack([sp.to_tangent(p, s) for s in self._span.T])
        return form_orthonormalize(sp, cols, tol=1e-10)[:, : self.dim]

    def sample_points(self, rng: np.random.Generator, count: int, radius: float = 3.0) -> np.ndarray:
        if self.dim == 0:
            return np.repeat(self.base[None, :], count, axis=0)
        if self.space.c > 0:
            radius = math.pi / self.space.k
        pts = []
        for _ in range(count):
            d = rng.normal(size=self.dim)
            d *= rng.uniform(0, radius) / np.linalg.norm(d)
            pts.append(self.chart(d))
        return np.array(pts)


def project_W(q, W: TotallyGeodesic, config: Config = DEFAULT) -> Projection:
    """Foot of the shortest geodesic from q to W and its length."""
    sp = W.space
    q = np.asarray(q, dtype=float)
    if sp.c == 0:
        F = W.frame
        foot = W.base + F @ (F.T @ (q - W.base))
        return Projection(foot, float(np.linalg.norm(q - foot)))
    # form-orthonormal expansion: span[:,0] has sign sign(c), the rest are spacelike
    S = W.span
    coeff = sp.lower(S.T) @ q
    if sp.c < 0:
        coeff[0] = -coeff[0]
    x = S @ coeff
    if sp.c > 0:
        rel = math.sqrt(max(float(sp.form(x, x)), 0.0)) * sp.k
        if rel < config.tol_focal:
            raise OnFocalSet(f"point lies on V_W (relative projection norm {rel:.3e})")
    foot = sp.renormalize(x)
    return Projection(foot, sp.dist(q, foot, config))


def s_pw_frame(p, W: TotallyGeodesic) -> np.ndarray:
    """Orthonormal frame (columns) of T_p(S_pW) = (T_pW)^perp for p in W.

    In the ambient picture this is L^perp, the same for every p in W.
    """
    if W.space.c == 0:
        return W.normal_space.copy()
    return np.column_stack([W.space.to_tangent(p, v) for v in W.normal_space.T])


def s_pw_span(p, W: TotallyGeodesic) -> np.ndarray:
    """Columns spanning the linear (c != 0) or direction (c = 0) space of S_pW."""
    if W.space.c == 0:
        return W.normal_space.copy()
    return np.column_stack([np.asarray(p, dtype=float) * W.space.k, W.normal_space])


def focal_distance(W: TotallyGeodesic) -> float | None:
    """Distance pi/(2 sqrt c) from W to its focal set V_W; None unless c > 0."""
    if W.space.c > 0:
        return math.pi / (2.0 * W.space.k)
    return None


@dataclass(frozen=True)
class IsometryFixingW:
    """x -> linear @ x + offset, an isometry fixing W pointwise."""

    linear: np.ndarray
    offset: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.linear.T + self.offset

    def push(self, v):
        """Differential: acts on tangent vectors by the linear part."""
        return np.asarray(v, dtype=float) @ self.linear.T


def rotation_fixing_W(W: TotallyGeodesic, Q: np.ndarray) -> IsometryFixingW:
    """Isometry acting by the orthogonal matrix Q on the normal space L^perp."""
    sp = W.space
    N = W.normal_space
    Ql = sp.lower(N.T)
    # P_perp x = N (N^T J x); the complement acts as the identity
    linear = np.eye(sp.ambient_dim) - N @ Ql + N @ Q @ Ql
    offset = np.zeros(sp.ambient_dim)
    if sp.c == 0:
        offset = W.base - linear @ W.base
    return IsometryFixingW(linear, offset)


def sample_G_W(W: TotallyGeodesic, seed: int) -> IsometryFixingW:
    """Seeded random rotation about W (identity when codimension < 2)."""
    codim = W.normal_space.shape[1]
    if codim < 2:
        return IsometryFixingW(np.eye(W.space.ambient_dim), np.zeros(W.space.ambient_dim))
    Q = special_ortho_group.rvs(codim, random_state=np.random.default_rng(seed))
    return rotation_fixing_W(W, Q)
