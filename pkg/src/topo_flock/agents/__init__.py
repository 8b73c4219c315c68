from __future__ import annotations

from topo_flock.agents.run import SwarmRun, initial_swarm, run_swarm, swarm_energy, swarm_enstrophy
from topo_flock.agents.swarm import (
    Connectivity,
    SwarmState,
    connectivity_graph,
    discrete_distances,
    integrate_swarm,
    minimum_separation,
    pair_kernel_matrix,
    pair_separations,
    stable_swarm_dt,
    swarm_rhs,
    swarm_step,
)

__all__ = [
    "Connectivity",
    "SwarmRun",
    "SwarmState",
    "connectivity_graph",
    "discrete_distances",
    "initial_swarm",
    "integrate_swarm",
    "minimum_separation",
    "pair_kernel_matrix",
    "pair_separations",
    "run_swarm",
    "stable_swarm_dt",
    "swarm_energy",
    "swarm_enstrophy",
    "swarm_rhs",
    "swarm_step",
]
