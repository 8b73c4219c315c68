from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.config import DEFAULT_LENGTH, MIN_CELLS
from topo_flock.errors import NonPositiveDensity


def _frozen(values: ArrayLike) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid on the torus of circumference ``length``."""

    n_cells: int
    length: float = DEFAULT_LENGTH

    def __post_init__(self) -> None:
        problems = []
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            problems.append(f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells!r}")
        if not self.length > 0:
            problems.append(f"length must be positive, got {self.length!r}")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @cached_property
    def nodes(self) -> np.ndarray:
        return _frozen(np.arange(self.n_cells) * self.dx)

    def wrap(self, x: ArrayLike) -> np.ndarray:
        return np.mod(np.asarray(x, dtype=float), self.length)


def _check_shape(grid: Grid1D, values: np.ndarray, name: str) -> None:
    if values.shape != (grid.n_cells,):
        raise ValueError(f"{name} needs {grid.n_cells} values, got shape {values.shape}")


@dataclass(frozen=True, eq=False)
class DensityField:
    """Cell averages of a strictly positive density with cached prefix mass."""

    grid: Grid1D
    values: np.ndarray
    prefix_mass: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        _check_shape(self.grid, values, "DensityField")
        bad = np.flatnonzero(~(values > 0))
        if bad.size:
            raise NonPositiveDensity(bad[0], values[bad[0]])
        object.__setattr__(self, "values", values)
        prefix = np.concatenate(([0.0], np.cumsum(values))) * self.grid.dx
        object.__setattr__(self, "prefix_mass", _frozen(prefix))

    @property
    def total_mass(self) -> float:
        return float(self.prefix_mass[-1])

    @property
    def minimum(self) -> float:
        return float(self.values.min())

    @property
    def maximum(self) -> float:
        return float(self.values.max())

    def cumulative_mass(self, x: ArrayLike) -> np.ndarray:
        """Mass from the left edge of cell 0 up to ``x``, continued periodically.

        Linear inside each cell, so differences of this function are exact
        integrals of the piecewise-constant density.
        """
        dx = self.grid.dx
        scaled = np.asarray(x, dtype=float) / dx + 0.5
        cell = np.floor(scaled)
        fraction = scaled - cell
        wraps, index = np.divmod(cell.astype(np.int64), self.grid.n_cells)
        return (
            wraps * self.total_mass
            + self.prefix_mass[index]
            + fraction * dx * self.values[index]
        )


@dataclass(frozen=True, eq=False)
class VelocityField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        _check_shape(self.grid, values, "VelocityField")
        if not np.all(np.isfinite(values)):
            raise ValueError("VelocityField values must be finite")
        object.__setattr__(self, "values", values)

    @property
    def diameter(self) -> float:
        return float(self.values.max() - self.values.min())


@dataclass(frozen=True, eq=False)
class MomentumField:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen(self.values)
        _check_shape(self.grid, values, "MomentumField")
        if not np.all(np.isfinite(values)):
            raise ValueError("MomentumField values must be finite")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_fields(cls, rho: DensityField, u: VelocityField) -> MomentumField:
        return cls(rho.grid, rho.values * u.values)

    def velocity(self, rho: DensityField) -> VelocityField:
        return VelocityField(self.grid, self.values / rho.values)


@dataclass(frozen=True, eq=False)
class AgentSwarm:
    """Positions on the torus T^dim and velocities in R^dim of N agents."""

    dim: int
    positions: np.ndarray
    velocities: np.ndarray
    length: float = DEFAULT_LENGTH

    def __post_init__(self) -> None:
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim!r}")
        positions = np.array(self.positions, dtype=float).reshape(-1, self.dim)
        velocities = np.array(self.velocities, dtype=float).reshape(-1, self.dim)
        problems = []
        if positions.shape[0] < 2:
            problems.append("a swarm needs at least 2 agents")
        if velocities.shape != positions.shape:
            problems.append(
                f"velocities shape {velocities.shape} does not match positions shape {positions.shape}"
            )
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            problems.append("positions and velocities must be finite")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "positions", _frozen(np.mod(positions, self.length)))
        object.__setattr__(self, "velocities", _frozen(velocities))

    @property
    def n_agents(self) -> int:
        return int(self.positions.shape[0])

    def mean_velocity(self) -> np.ndarray:
        return self.velocities.mean(axis=0)

    def velocity_diameter(self) -> float:
        spread = self.velocities.max(axis=0) - self.velocities.min(axis=0)
        return float(spread.max())


def torus_displacement(a: ArrayLike, b: ArrayLike, length: float) -> np.ndarray:
    """Shortest signed displacement from ``a`` to ``b``, componentwise in [-L/2, L/2)."""
    delta = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    return np.mod(delta + 0.5 * length, length) - 0.5 * length


def torus_distance(a: ArrayLike, b: ArrayLike, length: float) -> float | np.ndarray:
    """Geodesic distance on the torus; the last axis holds coordinates.

    Scalars are treated as points on the circle.
    """
    if not length > 0:
        raise ValueError(f"length must be positive, got {length!r}")
    delta = np.abs(np.asarray(b, dtype=float) - np.asarray(a, dtype=float)) % length
    delta = np.minimum(delta, length - delta)
    if delta.ndim == 0:
        return float(delta)
    distance = np.sqrt(np.sum(delta**2, axis=-1))
    return float(distance) if np.ndim(distance) == 0 else distance
