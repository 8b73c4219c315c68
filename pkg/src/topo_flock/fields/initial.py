from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from typing import Any

import numpy as np

from topo_flock.config import DEFAULT_LENGTH, DEFAULT_N_CELLS, INITIAL_KINDS
from topo_flock.fields.grid import AgentSwarm, DensityField, Grid1D, VelocityField

logger = logging.getLogger(__name__)

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(6)

# Parameters understood by each kind, with their defaults
INITIAL_DEFAULTS: dict[str, dict[str, Any]] = {
    "uniform": {"rho_bar": 1.0, "u_bar": 0.0},
    "perturbed-sine": {"rho_bar": 1.0, "a": 0.5, "k": 1, "b": 1.0, "m": 1, "phase": 0.0, "u_bar": 0.0},
    "two-bump": {"rho_floor": 0.2, "a": 1.0, "width": 0.5, "centers": None, "b": 1.0},
    "custom-samples": {"rho_values": None, "u_values": None},
}


def _cell_average(func: Callable[[np.ndarray], np.ndarray], grid: Grid1D) -> np.ndarray:
    """Gauss-Legendre cell averages over [x_i - dx/2, x_i + dx/2]."""
    offsets = 0.5 * grid.dx * _GAUSS_NODES
    samples = func(grid.nodes[:, None] + offsets[None, :])
    return 0.5 * samples @ _GAUSS_WEIGHTS


def _von_mises(x: np.ndarray, center: float, width: float, length: float) -> np.ndarray:
    phase = 2.0 * np.pi * (x - center) / length
    return np.exp((np.cos(phase) - 1.0) / width**2)


def _resolve_params(kind: str, params: Mapping[str, Any]) -> dict[str, Any]:
    if kind not in INITIAL_KINDS:
        raise ValueError(f"initial kind must be one of {INITIAL_KINDS}, got {kind!r}")
    resolved = dict(INITIAL_DEFAULTS[kind])
    unknown = sorted(set(params) - set(resolved) - {"n_cells", "length"})
    if unknown:
        raise ValueError(f"{kind} does not take parameters {unknown}")
    resolved.update({key: value for key, value in params.items() if key in resolved})
    return resolved


def build_initial_data(
    kind: str,
    params: Mapping[str, Any] | None = None,
    grid: Grid1D | None = None,
) -> tuple[DensityField, VelocityField]:
    """Build (rho, u) on a periodic grid.

    Densities are exact cell averages (so the total mass is exact); velocities
    are point values at the nodes.

    Kinds:
        uniform: rho = rho_bar, u = u_bar
        perturbed-sine: rho = rho_bar (1 + a sin(k x)), u = u_bar + b sin(m x + phase)
        two-bump: rho = rho_floor + a (g1 + g2), u = b (g1 - g2) with periodic
            von Mises bumps g centred at ``centers``
        custom-samples: rho_values and u_values given cell by cell
    """
    params = dict(params or {})
    if grid is None:
        grid = Grid1D(
            int(params.get("n_cells", DEFAULT_N_CELLS)),
            float(params.get("length", DEFAULT_LENGTH)),
        )
    p = _resolve_params(kind, params)
    x = grid.nodes
    wave = 2.0 * np.pi / grid.length

    if kind == "uniform":
        rho = np.full(grid.n_cells, float(p["rho_bar"]))
        u = np.full(grid.n_cells, float(p["u_bar"]))
    elif kind == "perturbed-sine":
        rho_bar, a, k = float(p["rho_bar"]), float(p["a"]), float(p["k"])
        rho = _cell_average(lambda s: rho_bar * (1.0 + a * np.sin(k * wave * s)), grid)
        u = float(p["u_bar"]) + float(p["b"]) * np.sin(float(p["m"]) * wave * x + float(p["phase"]))
    elif kind == "two-bump":
        centers = p["centers"] or [0.25 * grid.length, 0.75 * grid.length]
        if len(centers) != 2:
            raise ValueError(f"two-bump needs exactly two centers, got {centers!r}")
        c1, c2 = (float(c) for c in centers)
        width, a = float(p["width"]), float(p["a"])
        rho = _cell_average(
            lambda s: float(p["rho_floor"])
            + a * (_von_mises(s, c1, width, grid.length) + _von_mises(s, c2, width, grid.length)),
            grid,
        )
        u = float(p["b"]) * (
            _von_mises(x, c1, width, grid.length) - _von_mises(x, c2, width, grid.length)
        )
    else:
        if p["rho_values"] is None or p["u_values"] is None:
            raise ValueError("custom-samples needs both rho_values and u_values")
        rho = np.asarray(p["rho_values"], dtype=float)
        u = np.asarray(p["u_values"], dtype=float)

    logger.debug("built %s initial data on %d cells", kind, grid.n_cells)
    return DensityField(grid, rho), VelocityField(grid, u)


def sample_swarm_from_density(
    rho: DensityField,
    u: VelocityField,
    n_agents: int,
    rng: np.random.Generator,
    dim: int = 1,
) -> AgentSwarm:
    """Draw i.i.d. agents from rho (inverse CDF of prefix_mass), velocities interpolated from u.

    In dim 2 the second coordinate is uniform and the second velocity
    component is the same profile evaluated at that coordinate.
    """
    grid = rho.grid
    edges = (np.arange(grid.n_cells + 1) - 0.5) * grid.dx
    levels = rng.uniform(0.0, rho.total_mass, size=n_agents)
    x = np.mod(np.interp(levels, rho.prefix_mass, edges), grid.length)
    vx = np.interp(x, grid.nodes, u.values, period=grid.length)
    if dim == 1:
        return AgentSwarm(1, x, vx, grid.length)
    y = rng.uniform(0.0, grid.length, size=n_agents)
    vy = np.interp(y, grid.nodes, u.values, period=grid.length)
    return AgentSwarm(2, np.column_stack([x, y]), np.column_stack([vx, vy]), grid.length)
