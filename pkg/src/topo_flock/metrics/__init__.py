from __future__ import annotations

from topo_flock.metrics.checks import (
    FAIL,
    PASS,
    SKIP,
    AcceptanceCheck,
    any_failed,
    bound_check,
    checks_to_frame,
    skipped,
)
from topo_flock.metrics.diagnostics import (
    calculate_eta,
    calculate_run_diagnostics,
    campanato_seminorm,
    default_campanato_radii,
    delta_schedule,
    eta_clock,
    flattening_expectation,
    fluctuation_V2,
    kinetic_energy,
    lift_velocity,
    mass,
    momentum,
    velocity_diameter,
    windowed_deviation,
)
from topo_flock.metrics.envelopes import (
    AlgebraicRate,
    DensityEnvelopeFit,
    RootLogFit,
    algebraic_rate,
    fit_density_envelope,
    fit_rootlog_envelope,
)
from topo_flock.metrics.glossary import COLUMN_GLOSSARY, render_schema_markdown

__all__ = [
    "COLUMN_GLOSSARY",
    "FAIL",
    "PASS",
    "SKIP",
    "AcceptanceCheck",
    "AlgebraicRate",
    "DensityEnvelopeFit",
    "RootLogFit",
    "algebraic_rate",
    "any_failed",
    "bound_check",
    "calculate_eta",
    "calculate_run_diagnostics",
    "campanato_seminorm",
    "checks_to_frame",
    "default_campanato_radii",
    "delta_schedule",
    "eta_clock",
    "fit_density_envelope",
    "fit_rootlog_envelope",
    "flattening_expectation",
    "fluctuation_V2",
    "kinetic_energy",
    "lift_velocity",
    "mass",
    "momentum",
    "render_schema_markdown",
    "skipped",
    "velocity_diameter",
    "windowed_deviation",
]
