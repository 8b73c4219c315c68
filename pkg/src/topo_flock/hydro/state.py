from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from topo_flock.config import (
    DEFAULT_CFL,
    DEFAULT_DERIVATIVE_METHOD,
    DEFAULT_QUADRATURE,
    DEFAULT_RECONSTRUCTION,
    DERIVATIVE_METHODS,
    QUADRATURES,
    RECONSTRUCTIONS,
)
from topo_flock.fields.grid import DensityField, MomentumField, VelocityField


@dataclass(frozen=True)
class SolverSettings:
    cfl: float = DEFAULT_CFL
    reconstruction: str = DEFAULT_RECONSTRUCTION
    quadrature: str = DEFAULT_QUADRATURE
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD
    drift_radius: float | None = None

    def __post_init__(self) -> None:
        problems = []
        if not 0 < self.cfl <= 1:
            problems.append(f"cfl must lie in (0, 1], got {self.cfl!r}")
        if self.reconstruction not in RECONSTRUCTIONS:
            problems.append(f"reconstruction must be one of {RECONSTRUCTIONS}, got {self.reconstruction!r}")
        if self.quadrature not in QUADRATURES:
            problems.append(f"quadrature must be one of {QUADRATURES}, got {self.quadrature!r}")
        if self.derivative_method not in DERIVATIVE_METHODS:
            problems.append(
                f"derivative_method must be one of {DERIVATIVE_METHODS}, got {self.derivative_method!r}"
            )
        if problems:
            raise ValueError("; ".join(problems))


@dataclass(frozen=True, eq=False)
class HydroState:
    """(rho, m) at time t; u = m / rho is derived."""

    t: float
    rho: DensityField
    m: MomentumField

    @classmethod
    def from_primitive(cls, rho: DensityField, u: VelocityField, t: float = 0.0) -> HydroState:
        return cls(float(t), rho, MomentumField.from_fields(rho, u))

    @cached_property
    def u(self) -> VelocityField:
        return self.m.velocity(self.rho)

    @property
    def grid(self):
        return self.rho.grid

    @property
    def mass(self) -> float:
        return self.rho.total_mass

    @property
    def momentum(self) -> float:
        return float(np.sum(self.m.values) * self.grid.dx)

    @property
    def energy(self) -> float:
        return float(0.5 * np.sum(self.m.values * self.u.values) * self.grid.dx)


@dataclass(frozen=True, eq=False)
class EQuantity:
    """e = u_x + L_phi rho, q = e / rho, q1 = q_x / rho."""

    e: np.ndarray
    q: np.ndarray
    q1: np.ndarray

    @property
    def q_max(self) -> float:
        return float(np.max(np.abs(self.q)))
