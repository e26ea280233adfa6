"""Numerical tolerances and search parameters shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Config:
    # core
    tol_model: float = 1e-9
    tol_antipode: float = 1e-6
    tol_focal: float = 1e-7
    # immersion
    tol_rank: float = 1e-6
    h_proj: float = 1e-5
    guard_radius: float = 1e-3
    # checkers
    tol_predicate: float = 1e-6
    tol_fiber: float = 1e-6
    delta_fiber: float = 1e-2
    fiber_steps: int = 10
    max_iter: int = 50
    multistart: int = 32
    kernel_samples: int = 16
    sign_grid: int = 64
    # chart radius on W for c < 0, in units of 1/sqrt(-c)
    chart_radius: float = 10.0
    # levelset
    tol_level: float = 1e-5
    lipschitz_slack: float = 1e-7
    lipschitz_pairs: int = 1000

    def with_overrides(self, **overrides) -> "Config":
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown config keys: {sorted(unknown)}")
        return replace(self, **overrides)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = Config()
