from __future__ import annotations

from collections.abc import Iterable

from topo_flock.config import DIAGNOSTICS_COLUMN_ORDER

COLUMN_GLOSSARY: dict[str, str] = {
    # Clock
    "t": "Time of the record",
    # Conserved quantities
    "mass": "Total mass: sum rho dx (hydro) or 1 (agents, each agent carries 1/N)",
    "momentum": "Total momentum: sum rho u dx (hydro) or mean velocity (agents)",
    "momentum_y": "Second velocity component of the mean velocity (2D agents)",
    # Energetics
    "energy": "Kinetic energy: 1/2 sum rho u^2 dx",
    "enstrophy": "Dissipation rate: 1/2 sum_ij phi_ij (u_i - u_j)^2 rho_i rho_j dx^2, the rate at which energy decays",
    # Velocity fluctuations
    "V2": "Velocity fluctuation: sum_ij (u_i - u_j)^2 rho_i rho_j dx^2 = 2 M sum (u - P/M)^2 rho dx",
    "u_diam": "Velocity diameter: max u - min u (largest componentwise range for 2D agents)",
    # e-quantity
    "q_max": "max |q| with q = (u_x + L_phi rho) / rho, exactly transported by the flow",
    # Density bounds
    "rho_min": "Smallest cell density",
    "rho_max": "Largest cell density",
    # Spectral gap
    "lambda2": "Spectral gap: twice the second generalized eigenvalue of the weighted alignment form (NaN when disabled)",
    # Flatness
    "campanato": "Campanato seminorm: largest windowed mass-weighted deviation of u over grid centres and radii r0/2, r0/4, r0/8",
    "flatten_plus": "Mass fraction of the r0-ball around argmax u where u < u_max (1 - delta(t)), u lifted to be positive",
    "flatten_minus": "Mass fraction of the r0-ball around argmin u where u > u_min (1 + delta(t)), u lifted to be positive",
    # Vacuum clock
    "eta": "Vacuum clock: int_0^t rho_min(s)^2 ds (trapezoid over accepted steps)",
    # Agents only
    "n_components": "Connected components of the agent communication graph (edges where phi > 0)",
}


def render_schema_markdown(columns: Iterable[str] | None = None) -> str:
    """Column glossary for a diagnostics CSV, in DIAGNOSTICS_COLUMN_ORDER."""
    present = list(columns) if columns is not None else list(DIAGNOSTICS_COLUMN_ORDER)
    lines = ["# Diagnostics columns", ""]
    for column in DIAGNOSTICS_COLUMN_ORDER:
        if column in present and column in COLUMN_GLOSSARY:
            lines.append(f"- **{column}**: {COLUMN_GLOSSARY[column]}")

    remaining = [c for c in present if c not in DIAGNOSTICS_COLUMN_ORDER]
    if remaining:
        lines += ["", "## Other columns", ""]
        for column in remaining:
            lines.append(f"- **{column}**: {COLUMN_GLOSSARY.get(column, 'Undocumented column')}")
    return "\n".join(lines) + "\n"
