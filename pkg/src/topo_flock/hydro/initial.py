from __future__ import annotations

import logging
from collections.abc import Mapping
from typing import Any

import numpy as np

from topo_flock.fields.calculus import spectral_antiderivative
from topo_flock.fields.grid import DensityField, Grid1D, VelocityField
from topo_flock.fields.initial import build_initial_data
from topo_flock.hydro.solver import DEFAULT_SETTINGS
from topo_flock.hydro.state import HydroState, SolverSettings
from topo_flock.kernels.family import KernelSpec
from topo_flock.operators.singular import eval_Lphi

logger = logging.getLogger(__name__)


def e0_zero_velocity(
    rho: DensityField,
    spec: KernelSpec,
    mean_velocity: float = 0.0,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> VelocityField:
    """Velocity with u' = -L_phi rho, so that e = u' + L_phi rho vanishes; mean(u) = mean_velocity."""
    if settings.derivative_method != "spectral":
        logger.warning("e0 = 0 data is built spectrally; %s derivatives leave e0 at truncation size",
                       settings.derivative_method)
    l_rho = eval_Lphi(
        rho.values,
        rho,
        spec,
        settings.drift_radius,
        quadrature=settings.quadrature,
        derivative_method=settings.derivative_method,
    ).values
    u = mean_velocity - spectral_antiderivative(l_rho - l_rho.mean(), rho.grid.length)
    return VelocityField(rho.grid, u)


def build_initial_state(
    kind: str,
    params: Mapping[str, Any],
    grid: Grid1D,
    spec: KernelSpec,
    e0_zero: bool = False,
    settings: SolverSettings = DEFAULT_SETTINGS,
) -> HydroState:
    rho, u = build_initial_data(kind, params, grid)
    if e0_zero:
        u = e0_zero_velocity(rho, spec, float(np.mean(u.values)), settings)
    return HydroState.from_primitive(rho, u)
