from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from topo_flock.errors import CflViolation, NonPositiveDensity, PositivityLoss
from topo_flock.fields.calculus import derivative
from topo_flock.fields.grid import DensityField, MomentumField
from topo_flock.hydro.fluxes import flux_divergence, llf_fluxes
from topo_flock.hydro.state import EQuantity, HydroState, SolverSettings
from topo_flock.kernels.family import KernelSpec
from topo_flock.operators.singular import OperatorEval, alignment_stiffness, eval_commutator, eval_Lphi
from topo_flock.operators.table import KernelTable, kernel_table

logger = logging.getLogger(__name__)

DEFAULT_SETTINGS = SolverSettings()
CFL_SLACK = 1e-12


@lru_cache(maxsize=4)
def alignment_source(state: HydroState, spec: KernelSpec, settings: SolverSettings = DEFAULT_SETTINGS) -> OperatorEval:
    """C_phi(rho, u) of one state, shared by the stepper and the step monitor."""
    return _commutator(state, spec, settings, kernel_table(state.rho, spec))


def _commutator(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings,
    table: KernelTable | None,
) -> OperatorEval:
    if table is None:
        return alignment_source(state, spec, settings)
    return eval_commutator(
        state.rho,
        state.u.values,
        spec,
        settings.drift_radius,
        quadrature=settings.quadrature,
        derivative_method=settings.derivative_method,
        table=table,
    )


def rhs(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    table: KernelTable | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """(d rho/dt, d m/dt) with LLF transport and the alignment source rho C_phi(rho, u)."""
    grid = state.grid
    rho, m = state.rho.values, state.m.values
    flux_rho, flux_m = llf_fluxes(rho, m, settings.reconstruction)
    commutator = _commutator(state, spec, settings, table)
    drho = flux_divergence(flux_rho, grid.dx)
    dm = flux_divergence(flux_m, grid.dx) + rho * commutator.values
    return drho, dm


def stable_dt(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    table: KernelTable | None = None,
) -> float:
    """cfl / (2 max|u| / dx + stiffness of the alignment source)."""
    table = table or kernel_table(state.rho, spec)
    transport = 2.0 * float(np.max(np.abs(state.u.values))) / state.grid.dx
    rate = transport + alignment_stiffness(table, settings.quadrature)
    return settings.cfl / rate if rate > 0 else float("inf")


def _stage(state: HydroState, rho: np.ndarray, m: np.ndarray, t: float) -> HydroState:
    try:
        density = DensityField(state.grid, rho)
    except NonPositiveDensity as exc:
        raise PositivityLoss(exc.index, exc.value, t) from exc
    return HydroState(t, density, MomentumField(state.grid, m))


def step(
    state: HydroState,
    spec: KernelSpec,
    dt: float,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> HydroState:
    """One SSP-RK3 step (Shu-Osher form)."""
    table = kernel_table(state.rho, spec)
    dt_max = stable_dt(state, spec, settings, table)
    if dt > dt_max * (1.0 + CFL_SLACK):
        raise CflViolation(dt, dt_max)
    t_new = state.t + dt
    rho0, m0 = state.rho.values, state.m.values

    drho, dm = rhs(state, spec, settings)
    first = _stage(state, rho0 + dt * drho, m0 + dt * dm, t_new)

    drho, dm = rhs(first, spec, settings)
    second = _stage(
        state,
        0.75 * rho0 + 0.25 * (first.rho.values + dt * drho),
        0.75 * m0 + 0.25 * (first.m.values + dt * dm),
        t_new,
    )

    drho, dm = rhs(second, spec, settings)
    return _stage(
        state,
        rho0 / 3.0 + 2.0 / 3.0 * (second.rho.values + dt * drho),
        m0 / 3.0 + 2.0 / 3.0 * (second.m.values + dt * dm),
        t_new,
    )


def advance(
    state: HydroState,
    spec: KernelSpec,
    t_target: float,
    settings: SolverSettings = DEFAULT_SETTINGS,
    on_step: Callable[[HydroState, HydroState], None] | None = None,
) -> HydroState:
    """Step with the largest stable dt until landing exactly on ``t_target``."""
    while state.t < t_target:
        dt = min(stable_dt(state, spec, settings), t_target - state.t)
        new_state = step(state, spec, dt, settings)
        if t_target - new_state.t < 1e-12 * max(1.0, abs(t_target)):
            new_state = HydroState(t_target, new_state.rho, new_state.m)
        if on_step is not None:
            on_step(state, new_state)
        state = new_state
    return state


def compute_e(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    table: KernelTable | None = None,
) -> EQuantity:
    grid = state.grid
    u_x = derivative(state.u.values, grid.length, settings.derivative_method)
    l_rho = eval_Lphi(
        state.rho.values,
        state.rho,
        spec,
        settings.drift_radius,
        quadrature=settings.quadrature,
        derivative_method=settings.derivative_method,
        table=table,
    )
    e = u_x + l_rho.values
    q = e / state.rho.values
    q1 = derivative(q, grid.length, settings.derivative_method) / state.rho.values
    return EQuantity(e, q, q1)


def smallness_ratio(total_mass: float, q_max: float, alpha: float, r0: float) -> float:
    """M q_max (1 - alpha) / r0^(1 - alpha); below 1 the small-data hypothesis holds."""
    return total_mass * q_max * (1.0 - alpha) / r0 ** (1.0 - alpha)


@dataclass(frozen=True)
class SmallnessReport:
    ratio: float
    margin: float
    unconditional: bool

    @property
    def holds(self) -> bool:
        return self.unconditional or self.ratio < 1.0


def check_smallness(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> SmallnessReport:
    if spec.alpha >= 1:
        return SmallnessReport(0.0, float("inf"), True)
    q_max = compute_e(state, spec, settings).q_max
    ratio = smallness_ratio(state.mass, q_max, spec.alpha, spec.r0)
    return SmallnessReport(ratio, 1.0 - ratio, False)


def discrete_enstrophy(
    state: HydroState,
    spec: KernelSpec,
    settings: SolverSettings = DEFAULT_SETTINGS,
    table: KernelTable | None = None,
) -> float:
    """-sum u rho C_phi(rho, u) dx, the energy dissipation rate of the alignment source."""
    commutator = _commutator(state, spec, settings, table)
    return float(-np.sum(state.u.values * state.rho.values * commutator.values) * state.grid.dx)


def density_lower_bound(t: float, rho_min0: float, q0_max: float) -> float:
    """rho_min(0) / (1 + |q0| rho_min(0) t)."""
    return rho_min0 / (1.0 + q0_max * rho_min0 * t)
