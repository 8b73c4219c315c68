from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.fields.grid import AgentSwarm, DensityField
from topo_flock.geometry.region import region_members


def canonical_arc(x: ArrayLike, y: ArrayLike, length: float) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints (start, stop) of the shorter closed arc between x and y, stop >= start.

    Points are reduced to [0, length) and ordered; when the direct arc is
    longer than half the torus the arc through 0 is taken instead. Ties go
    to the arc that does not cross 0. Swapping x and y gives identical
    endpoints.
    """
    a = np.mod(np.asarray(x, dtype=float), length)
    b = np.mod(np.asarray(y, dtype=float), length)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    direct = hi - lo <= 0.5 * length
    return np.where(direct, lo, hi), np.where(direct, hi, lo + length)


def topo_distance_1d(rho: DensityField, x: ArrayLike, y: ArrayLike) -> float | np.ndarray:
    """Mass of the shorter arc between x and y (exact for piecewise-constant rho)."""
    start, stop = canonical_arc(x, y, rho.grid.length)
    mass = rho.cumulative_mass(stop) - rho.cumulative_mass(start)
    mass = np.maximum(mass, 0.0)
    return float(mass) if mass.ndim == 0 else mass


def mass_of_ball(rho: DensityField, center: ArrayLike, radius: float) -> float | np.ndarray:
    length = rho.grid.length
    if not 0 < radius <= 0.5 * length:
        raise ValueError(f"radius must lie in (0, {0.5 * length!r}], got {radius!r}")
    c = np.asarray(center, dtype=float)
    mass = rho.cumulative_mass(c + radius) - rho.cumulative_mass(c - radius)
    return float(mass) if mass.ndim == 0 else mass


def signed_offsets(max_offset: int) -> np.ndarray:
    """Column layout of every offset table: [-K, ..., -1, 1, ..., K]."""
    k = np.arange(1, max_offset + 1)
    return np.concatenate([-k[::-1], k])


def max_offset_for(support: float, dx: float, n_cells: int) -> int:
    """Largest K with K*dx inside the closed support, capped below half the grid."""
    k = math.floor(support / dx * (1.0 + 1e-12))
    return int(max(1, min(k, (n_cells - 1) // 2)))


def offset_distances(rho: DensityField, max_offset: int) -> np.ndarray:
    """Node-to-node topological distances d(x_i + z, x_i) for signed offsets z.

    Shape (n_cells, 2K) with columns ordered as ``signed_offsets(K)``. The
    entry for offset -k at node i is copied from the forward entry of node
    i - k, so the table describes an exactly symmetric distance.
    """
    n = rho.grid.n_cells
    if not 1 <= max_offset <= n // 2:
        raise ValueError(f"max_offset must lie in [1, {n // 2}], got {max_offset!r}")
    dx = rho.grid.dx
    values = rho.values
    doubled = np.concatenate([values, values])
    cumulative = np.concatenate(([0.0], np.cumsum(doubled))) * dx
    i = np.arange(n)[:, None]
    k = np.arange(1, max_offset + 1)[None, :]
    forward = (cumulative[i + k] - cumulative[i + 1]) + 0.5 * dx * (values[i] + doubled[i + k])
    backward = forward[(i - k) % n, k - 1]
    return np.concatenate([backward[:, ::-1], forward], axis=1)


class ArcCounter:
    """Closed-arc membership counts over agent positions on the circle."""

    def __init__(self, positions: ArrayLike, length: float) -> None:
        self.length = float(length)
        self.sorted_positions = np.sort(np.mod(np.asarray(positions, dtype=float), self.length))

    def count(self, x: ArrayLike, y: ArrayLike) -> np.ndarray:
        """Number of positions on the shorter closed arc between x and y."""
        start, stop = canonical_arc(x, y, self.length)
        crosses = stop >= self.length
        sorted_positions = self.sorted_positions
        inside = np.searchsorted(sorted_positions, stop, side="right") - np.searchsorted(
            sorted_positions, start, side="left"
        )
        wrapped = (sorted_positions.size - np.searchsorted(sorted_positions, start, side="left")) + (
            np.searchsorted(sorted_positions, stop - self.length, side="right")
        )
        return np.where(crosses, wrapped, inside)


def topo_distance_discrete(
    swarm: AgentSwarm,
    i: int,
    j: int,
    counter: ArcCounter | None = None,
) -> float:
    """d_N = (members of the closed region between agents i and j / N)^(1/dim).

    Both tips count, as do agents sitting exactly on a tip, so coincident
    agents give the number of agents at that point.
    """
    if i == j:
        raise ValueError("topo_distance_discrete needs two distinct agents")
    n = swarm.n_agents
    if swarm.dim == 1:
        counter = counter or ArcCounter(swarm.positions[:, 0], swarm.length)
        members = int(counter.count(swarm.positions[i, 0], swarm.positions[j, 0]))
    else:
        members = int(region_members(swarm.positions, i, swarm.length)[j])
    return (members / n) ** (1.0 / swarm.dim)
