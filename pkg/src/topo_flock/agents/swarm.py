from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from topo_flock.config import CONVENTIONS, DEFAULT_CONVENTION, DEFAULT_MAX_HALVINGS, DEFAULT_R_FLOOR
from topo_flock.errors import StiffPairDetected
from topo_flock.fields.grid import AgentSwarm, torus_displacement
from topo_flock.geometry.distance import ArcCounter
from topo_flock.geometry.region import region_members
from topo_flock.kernels.family import KernelSpec, eval_phi

logger = logging.getLogger(__name__)

SEPARATION_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class SwarmState:
    t: float
    swarm: AgentSwarm
    spec: KernelSpec
    convention: str = DEFAULT_CONVENTION

    def __post_init__(self) -> None:
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")

    @property
    def weight(self) -> float:
        """Prefactor of the alignment sum: 1/N (mean-field) or 1 (raw)."""
        return 1.0 / self.swarm.n_agents if self.convention == "mean-field" else 1.0

    def with_swarm(self, swarm: AgentSwarm, t: float) -> SwarmState:
        return SwarmState(t, swarm, self.spec, self.convention)


def pair_separations(swarm: AgentSwarm) -> np.ndarray:
    """Symmetric matrix of torus distances |x_i - x_j|, zero diagonal."""
    delta = torus_displacement(swarm.positions[:, None, :], swarm.positions[None, :, :], swarm.length)
    r = np.linalg.norm(delta, axis=-1)
    upper = np.triu(r, 1)
    return upper + upper.T


def discrete_distances(swarm: AgentSwarm) -> np.ndarray:
    """d_N for every pair; the diagonal holds the coincident-point value."""
    n = swarm.n_agents
    if swarm.dim == 1:
        x = swarm.positions[:, 0]
        counts = ArcCounter(x, swarm.length).count(x[:, None], x[None, :])
    else:
        counts = np.stack([region_members(swarm.positions, i, swarm.length) for i in range(n)])
    return (counts / n) ** (1.0 / swarm.dim)


def pair_kernel_matrix(swarm: AgentSwarm, spec: KernelSpec) -> np.ndarray:
    """phi_ij = phi(r_ij, d_N(i, j)) with r clamped at machine epsilon; zero diagonal.

    Exactly symmetric except for the Motsch-Tadmor family, whose row i is
    normalised by the share of agents within r0 of agent i.
    """
    n = swarm.n_agents
    r = np.maximum(pair_separations(swarm), SEPARATION_EPS)
    if spec.family == "motsch-tadmor":
        ball = np.count_nonzero(r < spec.r0, axis=1) / n
        d = np.broadcast_to(ball[:, None], r.shape)
    else:
        d = discrete_distances(swarm)
    phi = np.asarray(eval_phi(spec, r, d))
    np.fill_diagonal(phi, 0.0)
    if spec.family != "motsch-tadmor":
        upper = np.triu(phi, 1)
        phi = upper + upper.T
    return phi


def minimum_separation(swarm: AgentSwarm) -> tuple[int, int, float]:
    r = pair_separations(swarm)
    np.fill_diagonal(r, np.inf)
    i, j = np.unravel_index(int(np.argmin(r)), r.shape)
    return int(i), int(j), float(r[i, j])


def swarm_rhs(state: SwarmState, phi: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(dx/dt, dv/dt) with dv_i = w sum_j phi_ij (v_j - v_i)."""
    swarm = state.swarm
    phi = pair_kernel_matrix(swarm, state.spec) if phi is None else phi
    v = swarm.velocities
    differences = v[None, :, :] - v[:, None, :]
    dv = state.weight * np.sum(phi[:, :, None] * differences, axis=1)
    return v.copy(), dv


def _checked(state: SwarmState, positions: np.ndarray, velocities: np.ndarray, t: float, r_floor: float) -> SwarmState:
    swarm = AgentSwarm(state.swarm.dim, positions, velocities, state.swarm.length)
    i, j, separation = minimum_separation(swarm)
    if separation < r_floor:
        raise StiffPairDetected(i, j, separation, r_floor)
    return state.with_swarm(swarm, t)


def swarm_step(state: SwarmState, dt: float, r_floor: float = DEFAULT_R_FLOOR) -> SwarmState:
    """Classical RK4; every stage and the result must keep all pairs at least r_floor apart."""
    x0, v0 = state.swarm.positions, state.swarm.velocities
    t = state.t
    k1x, k1v = swarm_rhs(state)
    mid = _checked(state, x0 + 0.5 * dt * k1x, v0 + 0.5 * dt * k1v, t + 0.5 * dt, r_floor)
    k2x, k2v = swarm_rhs(mid)
    mid = _checked(state, x0 + 0.5 * dt * k2x, v0 + 0.5 * dt * k2v, t + 0.5 * dt, r_floor)
    k3x, k3v = swarm_rhs(mid)
    end = _checked(state, x0 + dt * k3x, v0 + dt * k3v, t + dt, r_floor)
    k4x, k4v = swarm_rhs(end)
    positions = x0 + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    velocities = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return _checked(state, positions, velocities, t + dt, r_floor)


def stable_swarm_dt(state: SwarmState, cfl: float) -> float:
    """cfl / (w max_i sum_j phi_ij)."""
    phi = pair_kernel_matrix(state.swarm, state.spec)
    rate = state.weight * float(np.max(phi.sum(axis=1)))
    return cfl / rate if rate > 0 else float("inf")


def integrate_swarm(
    state: SwarmState,
    dt: float,
    t_target: float,
    r_floor: float = DEFAULT_R_FLOOR,
    max_halvings: int = DEFAULT_MAX_HALVINGS,
    on_step: Callable[[SwarmState, SwarmState], None] | None = None,
    cfl: float | None = None,
) -> SwarmState:
    """RK4 steps of at most dt up to t_target, halving a rejected step up to max_halvings times.

    With ``cfl`` every step is also capped by ``stable_swarm_dt`` of the state it starts from.
    """
    while state.t < t_target:
        h = min(dt, t_target - state.t)
        if cfl is not None:
            h = min(h, stable_swarm_dt(state, cfl))
        for halvings in range(max_halvings + 1):
            try:
                new_state = swarm_step(state, h, r_floor)
                break
            except StiffPairDetected as exc:
                if halvings == max_halvings:
                    raise
                logger.warning("step at t=%.6g rejected (%s); retrying with dt=%.3g", state.t, exc, 0.5 * h)
                h *= 0.5
        if t_target - new_state.t < 1e-12 * max(1.0, abs(t_target)):
            new_state = new_state.with_swarm(new_state.swarm, t_target)
        if on_step is not None:
            on_step(state, new_state)
        state = new_state
    return state


@dataclass(frozen=True, eq=False)
class Connectivity:
    n_components: int
    labels: np.ndarray
    adjacency: csr_matrix


def connectivity_graph(state: SwarmState, phi: np.ndarray | None = None) -> Connectivity:
    """Communication graph with edges where phi_ij > 0 (either direction)."""
    phi = pair_kernel_matrix(state.swarm, state.spec) if phi is None else phi
    edges = (phi > 0) | (phi.T > 0)
    adjacency = csr_matrix(edges)
    n_components, labels = connected_components(adjacency, directed=False)
    return Connectivity(int(n_components), labels, adjacency)
