from __future__ import annotations

import math
from collections.abc import Iterable

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike
from scipy.integrate import cumulative_trapezoid, trapezoid

from topo_flock.config import DELTA_FLOOR, DIAGNOSTICS_COLUMN_ORDER
from topo_flock.fields.grid import DensityField, VelocityField
from topo_flock.fields.io import reorder_columns, validate_columns


def _u(u: VelocityField | ArrayLike) -> np.ndarray:
    return np.asarray(getattr(u, "values", u), dtype=float)


def mass(rho: DensityField) -> float:
    return rho.total_mass


def momentum(rho: DensityField, u: VelocityField | ArrayLike) -> float:
    return float(np.sum(rho.values * _u(u)) * rho.grid.dx)


def kinetic_energy(rho: DensityField, u: VelocityField | ArrayLike) -> float:
    return float(0.5 * np.sum(rho.values * _u(u) ** 2) * rho.grid.dx)


def velocity_diameter(u: VelocityField | ArrayLike) -> float:
    values = _u(u)
    return float(values.max() - values.min())


def fluctuation_V2(
    rho: DensityField,
    u: VelocityField | ArrayLike,
    method: str = "variance",
) -> float:
    """sum_ij (u_i - u_j)^2 rho_i rho_j dx^2, by default through 2 M sum (u - P/M)^2 rho dx."""
    values = _u(u)
    dx = rho.grid.dx
    if method == "double-sum":
        difference = values[:, None] - values[None, :]
        weights = rho.values[:, None] * rho.values[None, :]
        return float(np.sum(difference**2 * weights) * dx**2)
    if method != "variance":
        raise ValueError(f"method must be 'variance' or 'double-sum', got {method!r}")
    total = rho.total_mass
    mean = momentum(rho, values) / total
    return float(2.0 * total * np.sum((values - mean) ** 2 * rho.values) * dx)


def _arc_overlaps(radius: float, dx: float, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets of cells meeting (-radius, radius) around a node and the covered fraction of each."""
    reach = min(int(math.ceil(radius / dx + 0.5)), (n_cells - 1) // 2)
    offsets = np.arange(-reach, reach + 1)
    left = np.maximum((offsets - 0.5) * dx, -radius)
    right = np.minimum((offsets + 0.5) * dx, radius)
    fractions = np.clip(right - left, 0.0, None) / dx
    keep = fractions > 0
    return offsets[keep], fractions[keep]


def default_campanato_radii(r0: float) -> tuple[float, ...]:
    return (r0 / 2.0, r0 / 4.0, r0 / 8.0)


def _windowed_deviations(rho: DensityField, u: np.ndarray, radius: float) -> np.ndarray:
    n, dx = rho.grid.n_cells, rho.grid.dx
    nodes = np.arange(n)[:, None]
    ball_offsets, ball_fractions = _arc_overlaps(radius, dx, n)
    ball_index = (nodes + ball_offsets[None, :]) % n
    ball_mass = rho.values[ball_index] * ball_fractions[None, :]
    average = np.sum(ball_mass * u[ball_index], axis=1) / np.sum(ball_mass, axis=1)
    window_offsets, window_fractions = _arc_overlaps(radius / 10.0, dx, n)
    window_index = (nodes + window_offsets[None, :]) % n
    deviation = (u[window_index] - average[:, None]) ** 2
    return np.sum(deviation * rho.values[window_index] * window_fractions[None, :], axis=1) * dx


def windowed_deviation(
    rho: DensityField,
    u: VelocityField | ArrayLike,
    center_index: int,
    radius: float,
) -> float:
    """int_{|x - x*| < radius/10} |u - u_{x*, radius}|^2 rho dx at one node x*."""
    return float(_windowed_deviations(rho, _u(u), radius)[center_index])


def campanato_seminorm(
    rho: DensityField,
    u: VelocityField | ArrayLike,
    radii: Iterable[float],
    r0: float | None = None,
) -> float:
    """Largest windowed deviation over all grid centres and the given radii."""
    radii = sorted(set(float(r) for r in radii))
    if not radii:
        raise ValueError("campanato_seminorm needs at least one radius")
    upper = 0.5 * r0 if r0 is not None else 0.5 * rho.grid.length
    bad = [r for r in radii if not 0 < r <= upper * (1.0 + 1e-12)]
    if bad:
        raise ValueError(f"radii must lie in (0, {upper!r}], got {bad}")
    values = _u(u)
    return float(max(np.max(_windowed_deviations(rho, values, r)) for r in radii))


def lift_velocity(u: VelocityField | ArrayLike) -> np.ndarray:
    """Galilean shift making u strictly positive; already positive fields are returned as is."""
    values = _u(u)
    low = float(values.min())
    if low > 0:
        return values
    spread = float(values.max()) - low
    return values - low + (spread if spread > 0 else 1.0)


def flattening_expectation(
    rho: DensityField,
    u: VelocityField | ArrayLike,
    delta: float,
    sign: int,
    r0: float,
) -> float:
    """Mass fraction of the r0-ball around the extreme cell where u has moved away from the extreme.

    sign=+1 uses G = {u < u_max (1 - delta)} around argmax u, sign=-1 uses
    G = {u > u_min (1 + delta)} around argmin u. u must have one sign.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    values = _u(u)
    if values.min() < 0 < values.max():
        raise ValueError("flattening_expectation needs u of one sign, lift it first")
    n, dx = rho.grid.n_cells, rho.grid.dx
    if sign == 1:
        center = int(np.argmax(values))
        extreme = values[center]
        in_set = values < extreme * (1.0 - delta)
    else:
        center = int(np.argmin(values))
        extreme = values[center]
        in_set = values > extreme * (1.0 + delta)
    offsets, fractions = _arc_overlaps(r0, dx, n)
    index = (center + offsets) % n
    ball = rho.values[index] * fractions
    return float(np.sum(ball * in_set[index]) / np.sum(ball))


def eta_clock(times: ArrayLike, rho_min: ArrayLike) -> float:
    """int_0^t rho_min(s)^2 ds by the trapezoid rule."""
    t = np.asarray(times, dtype=float)
    values = np.asarray(rho_min, dtype=float)
    if t.size < 2:
        return 0.0
    if np.any(np.diff(t) < 0):
        raise ValueError("eta_clock needs nondecreasing time stamps")
    return float(trapezoid(values**2, t))


def delta_schedule(t: float) -> float:
    """1/sqrt(t ln t) clipped to [DELTA_FLOOR, 1]; 1 up to t = 1."""
    if t <= 1.0:
        return 1.0
    return float(np.clip(1.0 / math.sqrt(t * math.log(t)), DELTA_FLOOR, 1.0))


def calculate_eta(df: pd.DataFrame) -> pd.DataFrame:
    df = df.copy()
    validate_columns(df, {"t", "rho_min"}, "calculate_eta")
    t = df["t"].to_numpy(dtype=float)
    rho_min = df["rho_min"].to_numpy(dtype=float)
    df["eta"] = cumulative_trapezoid(rho_min**2, t, initial=0.0) if len(df) > 1 else 0.0
    return df


def calculate_run_diagnostics(df: pd.DataFrame, eta: np.ndarray | None = None) -> pd.DataFrame:
    """Finish a diagnostics table: eta column and the documented column order.

    ``eta`` may carry a finer-grained clock tracked during the run; without it
    the clock is integrated over the recorded rows.
    """
    df = df.copy()
    validate_columns(df, {"t", "mass", "momentum", "energy"}, "calculate_run_diagnostics")
    if eta is not None:
        df["eta"] = np.asarray(eta, dtype=float)
    elif "rho_min" in df.columns:
        df = calculate_eta(df)
    return reorder_columns(df.reset_index(drop=True), DIAGNOSTICS_COLUMN_ORDER)
