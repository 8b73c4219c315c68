from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd
from tqdm import tqdm

from topo_flock.agents.swarm import (
    SwarmState,
    connectivity_graph,
    integrate_swarm,
    minimum_separation,
    pair_kernel_matrix,
)
from topo_flock.config import AGENT_DIAGNOSTICS_COLUMNS
from topo_flock.errors import StiffPairDetected, TopoFlockError
from topo_flock.fields.initial import build_initial_data, sample_swarm_from_density
from topo_flock.fields.io import swarm_to_frame
from topo_flock.hydro.initial import e0_zero_velocity
from topo_flock.hydro.run import is_scheduled, output_times
from topo_flock.metrics import AcceptanceCheck, bound_check, calculate_run_diagnostics, skipped

if TYPE_CHECKING:
    from topo_flock.cli.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

MOMENTUM_SLACK = 1e-9
ENERGY_SLACK = 1e-8


@dataclass
class SwarmRun:
    diagnostics: pd.DataFrame
    snapshots: dict[float, pd.DataFrame]
    termination: str
    checks: list[AcceptanceCheck]
    final_state: SwarmState
    info: dict[str, Any] = field(default_factory=dict)


def swarm_enstrophy(state: SwarmState, phi: np.ndarray | None = None) -> float:
    """Energy dissipation rate w / (2N) sum_ij phi_ij |v_j - v_i|^2."""
    phi = pair_kernel_matrix(state.swarm, state.spec) if phi is None else phi
    v = state.swarm.velocities
    squared = np.sum((v[None, :, :] - v[:, None, :]) ** 2, axis=-1)
    return float(state.weight * np.sum(phi * squared) / (2.0 * state.swarm.n_agents))


def swarm_energy(state: SwarmState) -> float:
    return float(0.5 * np.mean(np.sum(state.swarm.velocities**2, axis=1)))


def _record(state: SwarmState) -> dict[str, float]:
    swarm = state.swarm
    phi = pair_kernel_matrix(swarm, state.spec)
    v = swarm.velocities
    mean_v = swarm.mean_velocity()
    row = {
        "t": state.t,
        "mass": 1.0,
        "momentum": float(mean_v[0]),
        "energy": swarm_energy(state),
        "enstrophy": swarm_enstrophy(state, phi),
        "V2": float(2.0 * np.mean(np.sum((v - mean_v) ** 2, axis=1))),
        "u_diam": swarm.velocity_diameter(),
        "n_components": connectivity_graph(state, phi).n_components,
    }
    if swarm.dim == 2:
        row["momentum_y"] = float(mean_v[1])
    return row


class _SwarmMonitor:
    def __init__(self, state: SwarmState) -> None:
        self.steps = 0
        self.energy_increase = 0.0
        self.max_principle_excess = 0.0
        self.momentum_drift = 0.0
        self._total0 = state.swarm.velocities.sum(axis=0)

    def __call__(self, old: SwarmState, new: SwarmState) -> None:
        self.steps += 1
        e_old, e_new = swarm_energy(old), swarm_energy(new)
        self.energy_increase = max(self.energy_increase, (e_new - e_old) / max(e_old, 1e-300))

        v_old, v_new = old.swarm.velocities, new.swarm.velocities
        slack = 1e-9 * (1.0 + float(np.max(np.abs(v_old))))
        excess = np.maximum(v_new.max(axis=0) - v_old.max(axis=0), v_old.min(axis=0) - v_new.min(axis=0))
        self.max_principle_excess = max(self.max_principle_excess, float(excess.max()) - slack, 0.0)

        drift = np.max(np.abs(v_new.sum(axis=0) - self._total0))
        self.momentum_drift = max(self.momentum_drift, float(drift))


def _acceptance(frame: pd.DataFrame, monitor: _SwarmMonitor, state0: SwarmState) -> list[AcceptanceCheck]:
    swarm = state0.swarm
    checks: list[AcceptanceCheck] = []
    if state0.spec.family == "motsch-tadmor":
        checks.append(skipped("agents_momentum", "Motsch-Tadmor kernel is not symmetric"))
    else:
        scale = swarm.n_agents * float(np.max(np.abs(swarm.velocities)))
        checks.append(bound_check("agents_momentum", monitor.momentum_drift, MOMENTUM_SLACK * scale))
    checks.append(bound_check("energy_monotone", monitor.energy_increase, ENERGY_SLACK))
    checks.append(bound_check("max_principle", monitor.max_principle_excess, 0.0))
    diam = frame["u_diam"].to_numpy()
    growth = float(np.max(np.diff(diam), initial=0.0))
    checks.append(bound_check("u_diam_monotone", growth, 1e-9 * (1.0 + diam[0])))
    return checks


def initial_swarm(config: ExperimentConfig) -> SwarmState:
    """Sample N agents from the configured initial density with the run's seed."""
    rho, u = build_initial_data(config.initial.kind, config.initial.params, config.grid)
    if config.initial.e0_zero:
        u = e0_zero_velocity(rho, config.kernel, float(np.mean(u.values)), config.settings)
    rng = np.random.default_rng(config.seed)
    swarm = sample_swarm_from_density(rho, u, config.n_agents, rng, config.dim)
    return SwarmState(0.0, swarm, config.kernel, config.convention)


def run_swarm(config: ExperimentConfig, progress: bool = False) -> SwarmRun:
    """Integrate the agent system to t_final, recording diagnostics on the output schedule."""
    state = initial_swarm(config)
    state0 = state
    monitor = _SwarmMonitor(state)
    _, _, separation0 = minimum_separation(state.swarm)
    logger.info(
        "swarm run %s: %d agents in dim %d, %s kernel alpha=%.3g tau=%.3g, min separation %.3g",
        config.name, config.n_agents, config.dim, config.kernel.family,
        config.kernel.alpha, config.kernel.tau, separation0,
    )

    rows: list[dict[str, float]] = []
    snapshots: dict[float, pd.DataFrame] = {}
    termination = "completed"
    for t_out in tqdm(output_times(config.t_final, config.output_every), disable=not progress, desc=config.name):
        try:
            if t_out > state.t:
                state = integrate_swarm(
                    state,
                    float(t_out) - state.t,
                    float(t_out),
                    config.r_floor,
                    config.max_halvings,
                    on_step=monitor,
                    cfl=config.cfl,
                )
            rows.append(_record(state))
        except StiffPairDetected as exc:
            termination = f"stiff-pair at t={state.t:.6g} ({exc})"
            logger.warning("run %s stopped: %s", config.name, exc)
            break
        except TopoFlockError as exc:
            termination = f"{type(exc).__name__}: {exc}"
            logger.warning("run %s stopped: %s", config.name, exc)
            break
        if is_scheduled(state.t, config.snapshot_every, config.t_final):
            snapshots[state.t] = swarm_to_frame(state.swarm)

    info: dict[str, Any] = {"steps": monitor.steps, "min_separation0": separation0}
    if not rows:
        return SwarmRun(pd.DataFrame(columns=AGENT_DIAGNOSTICS_COLUMNS), snapshots, termination, [], state, info)

    frame = calculate_run_diagnostics(pd.DataFrame(rows))
    checks = _acceptance(frame, monitor, state0)
    logger.info("swarm run %s finished: %s after %d steps", config.name, termination, monitor.steps)
    return SwarmRun(frame, snapshots, termination, checks, state, info)
