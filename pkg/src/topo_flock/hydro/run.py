from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd
from tqdm import tqdm

from topo_flock.config import HYDRO_DIAGNOSTICS_COLUMNS, MAX_DENSE_CELLS, OPERATOR_COLUMN_ORDER
from topo_flock.errors import PositivityLoss, TopoFlockError
from topo_flock.fields.calculus import derivative
from topo_flock.fields.io import fields_to_frame, reorder_columns
from topo_flock.hydro.initial import build_initial_state
from topo_flock.hydro.solver import (
    advance,
    check_smallness,
    compute_e,
    density_lower_bound,
    discrete_enstrophy,
)
from topo_flock.hydro.state import HydroState, SolverSettings
from topo_flock.kernels.family import KernelSpec
from topo_flock.metrics import (
    AcceptanceCheck,
    algebraic_rate,
    bound_check,
    calculate_run_diagnostics,
    campanato_seminorm,
    default_campanato_radii,
    delta_schedule,
    fit_density_envelope,
    fit_rootlog_envelope,
    flattening_expectation,
    fluctuation_V2,
    lift_velocity,
    skipped,
)
from topo_flock.operators.singular import eval_commutator, eval_Lphi
from topo_flock.operators.table import kernel_table
from topo_flock.spectral.gap import check_decay_bound, lambda2

if TYPE_CHECKING:
    from topo_flock.cli.experiment import ExperimentConfig

logger = logging.getLogger(__name__)

ENERGY_SLACK = 1e-8
DISSIPATION_TOLERANCE = 0.05
Q_DRIFT_TOLERANCE = 0.05
Q_DRIFT_HORIZON = 5.0
Q_FLOOR = 1e-8
DENSITY_BOUND_SLACK = 1e-3
ENVELOPE_TOLERANCE = 0.10
DECAY_SLACK = 0.05


@dataclass
class HydroRun:
    diagnostics: pd.DataFrame
    snapshots: dict[float, pd.DataFrame]
    termination: str
    checks: list[AcceptanceCheck]
    final_state: HydroState
    info: dict[str, Any] = field(default_factory=dict)
    operators: pd.DataFrame | None = None


def output_times(t_final: float, every: float) -> np.ndarray:
    """0, every, 2 every, ... with t_final always last."""
    if t_final <= 0:
        return np.array([0.0])
    count = int(np.floor(t_final / every + 1e-9))
    times = np.arange(count + 1) * every
    if t_final - times[-1] > 1e-9 * max(1.0, t_final):
        times = np.append(times, t_final)
    else:
        times[-1] = t_final
    return times


def is_scheduled(t: float, every: float | None, t_final: float) -> bool:
    if t == 0.0 or abs(t - t_final) <= 1e-12 * max(1.0, t_final):
        return True
    if every is None:
        return False
    ratio = t / every
    return abs(ratio - round(ratio)) < 1e-9


def operator_frame(state: HydroState, spec: KernelSpec, settings: SolverSettings) -> pd.DataFrame:
    """Operator fields at every node for debugging dumps."""
    table = kernel_table(state.rho, spec)
    l_rho = eval_Lphi(
        state.rho.values,
        state.rho,
        spec,
        settings.drift_radius,
        quadrature=settings.quadrature,
        derivative_method=settings.derivative_method,
        table=table,
    )
    commutator = eval_commutator(
        state.rho,
        state.u.values,
        spec,
        settings.drift_radius,
        quadrature=settings.quadrature,
        derivative_method=settings.derivative_method,
        table=table,
    )
    eq = compute_e(state, spec, settings, table)
    df = fields_to_frame(
        state.rho,
        state.u,
        L_rho=l_rho.values,
        C_rho_u=commutator.values,
        b_r=commutator.b_r,
        a_r=commutator.a_r,
        e=eq.e,
        q=eq.q,
        q1=eq.q1,
    )
    return reorder_columns(df, OPERATOR_COLUMN_ORDER)


class _StepMonitor:
    """Per-step bookkeeping: energy decay, dissipation match, maximum principle, vacuum clock."""

    def __init__(self, state: HydroState, spec: KernelSpec, settings: SolverSettings) -> None:
        self.spec = spec
        self.settings = settings
        self.steps = 0
        self.energy_increase = 0.0
        self.dissipation_mismatch = 0.0
        self.max_principle_excess = 0.0
        self.eta = 0.0
        self._enstrophy = discrete_enstrophy(state, spec, settings)

    def __call__(self, old: HydroState, new: HydroState) -> None:
        self.steps += 1
        dt = new.t - old.t
        e_old, e_new = old.energy, new.energy
        self.energy_increase = max(self.energy_increase, (e_new - e_old) / max(e_old, 1e-300))

        enstrophy_new = discrete_enstrophy(new, self.spec, self.settings)
        predicted = 0.5 * (self._enstrophy + enstrophy_new)
        if dt > 0 and predicted > 1e-12 * (1.0 + e_old):
            measured = (e_old - e_new) / dt
            self.dissipation_mismatch = max(
                self.dissipation_mismatch, abs(measured - predicted) / predicted
            )
        self._enstrophy = enstrophy_new

        u_old, u_new = old.u.values, new.u.values
        slack = 1e-10 * (1.0 + float(np.max(np.abs(u_old))))
        excess = max(u_new.max() - u_old.max(), u_old.min() - u_new.min()) - slack
        self.max_principle_excess = max(self.max_principle_excess, float(excess), 0.0)

        self.eta += 0.5 * (old.rho.minimum**2 + new.rho.minimum**2) * dt


def _record(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings,
    spectral_enabled: bool,
    eta: float,
) -> dict[str, float]:
    table = kernel_table(state.rho, spec)
    u = state.u
    lifted = lift_velocity(u)
    delta = delta_schedule(state.t)
    gap = float("nan")
    if spectral_enabled and state.grid.n_cells <= MAX_DENSE_CELLS:
        gap = lambda2(
            state.rho,
            spec,
            quadrature=settings.quadrature,
            derivative_method=settings.derivative_method,
            table=table,
        ).lambda2
    return {
        "t": state.t,
        "mass": state.mass,
        "momentum": state.momentum,
        "energy": state.energy,
        "enstrophy": discrete_enstrophy(state, spec, settings, table),
        "V2": fluctuation_V2(state.rho, u),
        "u_diam": u.diameter,
        "q_max": compute_e(state, spec, settings, table).q_max,
        "rho_min": state.rho.minimum,
        "rho_max": state.rho.maximum,
        "lambda2": gap,
        "campanato": campanato_seminorm(state.rho, u, default_campanato_radii(spec.r0), spec.r0),
        "flatten_plus": flattening_expectation(state.rho, lifted, delta, 1, spec.r0),
        "flatten_minus": flattening_expectation(state.rho, lifted, delta, -1, spec.r0),
        "eta": eta,
    }


def _acceptance(
    frame: pd.DataFrame,
    monitor: _StepMonitor,
    spec: KernelSpec,
    e0_zero: bool,
    rho_bounds0: tuple[float, float],
    q_scale: float,
) -> list[AcceptanceCheck]:
    """PASS/FAIL/SKIP checks of one run.

    ``q_scale`` is max|u_x(0)| / rho_min(0); below Q_FLOOR times it q0 counts as zero.
    """
    m0 = frame["mass"].iloc[0]
    p0 = frame["momentum"].iloc[0]
    q0 = frame["q_max"].iloc[0]
    checks = [
        bound_check("mass", float(np.max(np.abs(frame["mass"] - m0)) / m0), 1e-12),
    ]
    if not spec.symmetric:
        checks.append(skipped("momentum", "Motsch-Tadmor kernel is not symmetric"))
    else:
        drift = float(np.max(np.abs(frame["momentum"] - p0)))
        checks.append(bound_check("momentum", drift, 1e-10 * (1.0 + abs(p0))))
    checks.append(bound_check("energy_monotone", monitor.energy_increase, ENERGY_SLACK))
    if not spec.symmetric:
        checks.append(skipped("energy_dissipation_match", "Motsch-Tadmor kernel is not symmetric"))
    elif monitor.steps == 0:
        checks.append(skipped("energy_dissipation_match", "no steps taken"))
    else:
        checks.append(
            bound_check("energy_dissipation_match", monitor.dissipation_mismatch, DISSIPATION_TOLERANCE)
        )
    checks.append(bound_check("max_principle", monitor.max_principle_excess, 0.0))

    early = frame[frame["t"] <= Q_DRIFT_HORIZON + 1e-12]
    if not spec.symmetric:
        checks.append(skipped("q_drift", "e is only transported for symmetric kernels"))
    elif q0 <= Q_FLOOR * q_scale:
        checks.append(skipped("q_drift", f"q vanishes initially (max|q0| = {q0:.3g})"))
    else:
        drift = float((early["q_max"].max() - q0) / q0)
        checks.append(bound_check("q_drift", drift, Q_DRIFT_TOLERANCE))

    if e0_zero:
        low, high = rho_bounds0
        excursion = max(low - frame["rho_min"].min(), frame["rho_max"].max() - high, 0.0)
        checks.append(bound_check("density_bounds", float(excursion), DENSITY_BOUND_SLACK))
    else:
        checks.append(skipped("density_bounds", "only asserted for e0 = 0 data"))

    envelope = fit_density_envelope(frame["t"], frame["rho_min"])
    if envelope.n_checked:
        checks.append(
            bound_check("density_lower_envelope", max(0.0, 1.0 - envelope.worst_ratio), ENVELOPE_TOLERANCE)
        )
    else:
        checks.append(skipped("density_lower_envelope", "too few records"))

    if frame["lambda2"].notna().all():
        report = check_decay_bound(frame, DECAY_SLACK)
        checks.append(bound_check("decay_bound", report.slack, DECAY_SLACK))
    else:
        checks.append(skipped("decay_bound", "spectral gap not computed"))

    diam = frame["u_diam"].to_numpy()
    growth = float(np.max(np.diff(diam), initial=0.0))
    checks.append(bound_check("u_diam_monotone", growth, 1e-10 * (1.0 + diam[0])))
    return checks


def run(config: ExperimentConfig, dump_operators: bool = False, progress: bool = False) -> HydroRun:
    """Integrate the hydrodynamic system to t_final with diagnostics on the output schedule."""
    spec = config.kernel
    settings = config.settings
    state = build_initial_state(
        config.initial.kind,
        config.initial.params,
        config.grid,
        spec,
        config.initial.e0_zero,
        settings,
    )
    operators = operator_frame(state, spec, settings) if dump_operators else None
    rho_bounds0 = (state.rho.minimum, state.rho.maximum)
    eq0 = compute_e(state, spec, settings)
    u_x0 = derivative(state.u.values, state.grid.length, settings.derivative_method)
    q_scale = float(np.max(np.abs(u_x0))) / state.rho.minimum
    smallness = check_smallness(state, spec, settings)
    monitor = _StepMonitor(state, spec, settings)
    logger.info(
        "hydro run %s: %d cells, %s kernel alpha=%.3g tau=%.3g, t_final=%g",
        config.name, config.n_cells, spec.family, spec.alpha, spec.tau, config.t_final,
    )

    rows: list[dict[str, float]] = []
    snapshots: dict[float, pd.DataFrame] = {}
    termination = "completed"
    for t_out in tqdm(output_times(config.t_final, config.output_every), disable=not progress, desc=config.name):
        try:
            state = advance(state, spec, float(t_out), settings, on_step=monitor)
            rows.append(_record(state, spec, settings, config.spectral_enabled, monitor.eta))
        except PositivityLoss as exc:
            termination = f"positivity-loss at t={exc.t:.6g} (cell {exc.index})"
            logger.warning("run %s stopped: %s", config.name, exc)
            break
        except TopoFlockError as exc:
            termination = f"{type(exc).__name__}: {exc}"
            logger.warning("run %s stopped: %s", config.name, exc)
            break
        if is_scheduled(state.t, config.snapshot_every, config.t_final):
            snapshots[state.t] = fields_to_frame(state.rho, state.u)

    info: dict[str, Any] = {
        "steps": monitor.steps,
        "q0_max": eq0.q_max,
        "q_scale": q_scale,
        "smallness_ratio": smallness.ratio,
        "smallness_unconditional": smallness.unconditional,
    }
    if not rows:
        logger.warning("hydro run %s recorded nothing: %s", config.name, termination)
        return HydroRun(pd.DataFrame(columns=HYDRO_DIAGNOSTICS_COLUMNS), snapshots, termination, [], state, info, operators)

    frame = calculate_run_diagnostics(pd.DataFrame(rows), eta=np.array([row["eta"] for row in rows]))
    checks = _acceptance(frame, monitor, spec, config.initial.e0_zero, rho_bounds0, q_scale)

    times = frame["t"].to_numpy()
    rootlog = fit_rootlog_envelope(times, frame["u_diam"])
    envelope = fit_density_envelope(times, frame["rho_min"])
    rate = algebraic_rate(times, frame["rho_min"])
    early_q = frame.loc[frame["t"] <= Q_DRIFT_HORIZON + 1e-12, "q_max"].max()
    riccati = np.array([density_lower_bound(t, rho_bounds0[0], eq0.q_max) for t in times])
    info.update(
        {
            "q_growth": float(early_q / q_scale) if q_scale > 0 else float("nan"),
            "rootlog_C": rootlog.C,
            "rootlog_violations": rootlog.violations,
            "density_envelope_c": envelope.c,
            "riccati_ratio_min": float(np.min(frame["rho_min"].to_numpy() / riccati)),
            "density_upper_ratio": float(frame["rho_max"].max() / rho_bounds0[1]),
            "algebraic_beta": rate.beta,
            "algebraic_gamma": rate.gamma,
        }
    )
    logger.info("hydro run %s finished: %s after %d steps", config.name, termination, monitor.steps)
    return HydroRun(frame, snapshots, termination, checks, state, info, operators)
