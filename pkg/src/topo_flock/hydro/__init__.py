from __future__ import annotations

from topo_flock.hydro.fluxes import llf_fluxes, minmod, reconstruct
from topo_flock.hydro.initial import build_initial_state, e0_zero_velocity
from topo_flock.hydro.run import HydroRun, operator_frame, output_times, run
from topo_flock.hydro.solver import (
    SmallnessReport,
    advance,
    check_smallness,
    compute_e,
    density_lower_bound,
    discrete_enstrophy,
    rhs,
    smallness_ratio,
    stable_dt,
    step,
)
from topo_flock.hydro.state import EQuantity, HydroState, SolverSettings

__all__ = [
    "EQuantity",
    "HydroRun",
    "HydroState",
    "SmallnessReport",
    "SolverSettings",
    "advance",
    "build_initial_state",
    "check_smallness",
    "compute_e",
    "density_lower_bound",
    "discrete_enstrophy",
    "e0_zero_velocity",
    "llf_fluxes",
    "minmod",
    "operator_frame",
    "output_times",
    "reconstruct",
    "rhs",
    "run",
    "smallness_ratio",
    "stable_dt",
    "step",
]
