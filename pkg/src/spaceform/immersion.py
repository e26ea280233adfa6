"""Parametrized patches Sigma = f(U) in a space form, with frames and d(pi_W)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np
from scipy.stats import qmc

from .config import DEFAULT, Config
from .core import SpaceForm, TotallyGeodesic, form_complement, form_orthonormalize, project_W
from .errors import RankDeficient


def ball_exclusion(center, radius: float) -> Callable[[np.ndarray], bool]:
    """Predicate excluding parameters within ``radius`` of ``center``."""
    center = np.asarray(center, dtype=float)

    def excluded(u):
        return bool(np.linalg.norm(np.asarray(u, dtype=float) - center) < radius)

    return excluded


@dataclass(frozen=True, eq=False)
class ImmersedPatch:
    """f: box in R^m -> Q^n_c, with optional analytic Jacobian.

    ``jac(u)`` returns the N x m matrix of partial derivatives in ambient
    coordinates.  Without it, central differences are used.
    """

    space: SpaceForm
    lower: tuple
    upper: tuple
    f: Callable[[np.ndarray], np.ndarray]
    jac: Callable[[np.ndarray], np.ndarray] | None = None
    excluded: Callable[[np.ndarray], bool] | None = None
    name: str = ""

    def __post_init__(self):
        lo = tuple(float(x) for x in np.atleast_1d(self.lower))
        hi = tuple(float(x) for x in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ValueError("domain box needs lower < upper in every coordinate")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def param_dim(self) -> int:
        return len(self.lower)

    @property
    def jacobian_mode(self) -> str:
        return "analytic" if self.jac is not None else "finite-difference"

    def in_domain(self, u) -> bool:
        u = np.asarray(u, dtype=float)
        inside = bool(np.all(u >= self.lower) and np.all(u <= self.upper))
        return inside and not (self.excluded is not None and self.excluded(u))

    def eval(self, u) -> np.ndarray:
        return self.space.renormalize(self.f(np.asarray(u, dtype=float)))

    def jacobian(self, u, config: Config = DEFAULT) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        q = self.eval(u)
        if self.jac is not None:
            J = np.asarray(self.jac(u), dtype=float).reshape(self.space.ambient_dim, self.param_dim)
        else:
            h = config.h_proj * max(1.0, float(np.linalg.norm(u)))
            cols = []
            for i in range(self.param_dim):
                e = np.zeros(self.param_dim)
                e[i] = h
                cols.append((self.eval(u + e) - self.eval(u - e)) / (2 * h))
            J = np.column_stack(cols)
        if self.space.c != 0:
            J = J - self.space.c * np.outer(q, self.space.lower(q) @ J)
        return J

    def transformed(self, phi) -> "ImmersedPatch":
        """Patch composed with an ambient isometry x -> phi(x)."""
        f, jac = self.f, self.jac
        return replace(
            self,
            f=lambda u: phi(f(u)),
            jac=None if jac is None else (lambda u: phi.linear @ jac(u)),
            name=self.name + "*",
        )

    def restricted(self, lower, upper) -> "ImmersedPatch":
        return replace(self, lower=lower, upper=upper)


@dataclass(frozen=True)
class SamplePlan:
    grid: int = 128
    random: int = 128
    seed: int = 0

    @property
    def total(self) -> int:
        return self.grid + self.random


def sample_parameters(patch: ImmersedPatch, plan: SamplePlan = SamplePlan()) -> np.ndarray:
    """Halton points followed by seeded uniform points, all inside the domain."""
    m = patch.param_dim
    lo = np.array(patch.lower)
    hi = np.array(patch.upper)
    out = []
    if plan.grid:
        halton = qmc.Halton(d=m, scramble=False)
        halton.fast_forward(1)  # the first Halton point is the corner 0
        while len(out) < plan.grid:
            for x in halton.random(plan.grid):
                u = lo + x * (hi - lo)
                if patch.in_domain(u):
                    out.append(u)
                    if len(out) == plan.grid:
                        break
    rng = np.random.default_rng([plan.seed, 0x5EED])
    want = plan.grid + plan.random
    while len(out) < want:
        u = rng.uniform(lo, hi)
        if patch.in_domain(u):
            out.append(u)
    return np.array(out).reshape(-1, m)


class FrameAtPoint(NamedTuple):
    point: np.ndarray
    tangent_frame: np.ndarray  # N x m, columns
    normal_frame: np.ndarray  # N x (n - m), columns
    coords: np.ndarray  # m x m with tangent_frame = jacobian @ coords


def frame_at(patch: ImmersedPatch, u, config: Config = DEFAULT) -> FrameAtPoint:
    sp = patch.space
    q = patch.eval(u)
    J = patch.jacobian(u, config)
    G = J.T @ sp.lower(J.T).T
    w, U = np.linalg.eigh(0.5 * (G + G.T))
    sv = np.sqrt(np.clip(w, 0.0, None))
    if sv[0] <= config.tol_rank * max(sv[-1], 1e-300):
        raise RankDeficient(f"immersion Jacobian singular at u={np.asarray(u).tolist()} (ratio {sv[0] / max(sv[-1], 1e-300):.2e})")
    C = U / sv
    T = J @ C
    basis = T if sp.c == 0 else np.column_stack([q, T])
    normal = form_orthonormalize(sp, form_complement(sp, basis), tol=1e-10)
    return FrameAtPoint(q, T, normal, C)


def project_derivative(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT) -> np.ndarray:
    """Ambient N x m derivative of u -> pi_W(f(u)) by central differences."""
    u = np.asarray(u, dtype=float)
    h = config.h_proj * max(1.0, float(np.linalg.norm(u)))
    cols = []
    for i in range(patch.param_dim):
        e = np.zeros(patch.param_dim)
        e[i] = h
        fp = project_W(patch.eval(u + e), W, config).foot
        fm = project_W(patch.eval(u - e), W, config).foot
        cols.append((fp - fm) / (2 * h))
    return np.column_stack(cols) if cols else np.zeros((patch.space.ambient_dim, 0))


class LocalData(NamedTuple):
    frame: FrameAtPoint
    foot: np.ndarray
    distance: float
    dpi_param: np.ndarray  # j x m: d(pi_W o f) in W-frame coordinates per parameter
    dpi: np.ndarray  # j x m: same map in the orthonormal tangent frame
    singular_values: np.ndarray
    rank: int
    kernel: np.ndarray  # N x r ambient orthonormal kernel vectors
    kernel_param: np.ndarray  # m x r parameter-space kernel directions (unit)


def local_data(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT) -> LocalData:
    fr = frame_at(patch, u, config)
    proj = project_W(fr.point, W, config)
    D = project_derivative(patch, u, W, config)
    E = W.tangent_frame(proj.foot)
    A = patch.space.lower(E.T) @ D if W.dim else np.zeros((0, patch.param_dim))
    M = A @ fr.coords
    m = patch.param_dim
    if W.dim:
        _, s, Vt = np.linalg.svd(M, full_matrices=True)
    else:
        s, Vt = np.zeros(0), np.eye(m)
    thresh = config.tol_rank * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > thresh))
    null = Vt[rank:].T
    kernel = fr.tangent_frame @ null
    kp = fr.coords @ null
    if kp.size:
        kp = kp / np.linalg.norm(kp, axis=0)
    return LocalData(fr, proj.foot, proj.distance, A, M, s, rank, kernel, kp)


def dpi_W_restricted(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT) -> np.ndarray:
    """Matrix (j x m) of d(pi_W o f)_u in orthonormal frames of T_qSigma and T_{foot}W.

    It maps frame coordinates of a tangent vector of Sigma to frame
    coordinates of its image in T W.
    """
    return local_data(patch, u, W, config).dpi


def kernel_basis(patch: ImmersedPatch, u, W: TotallyGeodesic, config: Config = DEFAULT) -> np.ndarray:
    """Orthonormal basis (columns, ambient coordinates) of ker d(pi_W|Sigma) at f(u)."""
    return local_data(patch, u, W, config).kernel
