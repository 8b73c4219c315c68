from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.special import zeta

from topo_flock.config import DEFAULT_DERIVATIVE_METHOD, DEFAULT_QUADRATURE, QUADRATURES
from topo_flock.errors import RadiusOutOfRange
from topo_flock.fields.calculus import derivative
from topo_flock.fields.grid import DensityField, Grid1D
from topo_flock.geometry.distance import max_offset_for, signed_offsets, topo_distance_1d
from topo_flock.kernels.cutoff import eval_h
from topo_flock.kernels.family import KernelSpec, eval_phi
from topo_flock.operators.table import KernelTable, kernel_table


@dataclass(frozen=True, eq=False)
class OperatorEval:
    """An operator applied at every node, with the drift terms it used."""

    values: np.ndarray
    drift_used: float
    quadrature: str
    b_r: np.ndarray
    a_r: np.ndarray | None = None


def _values(f: ArrayLike) -> np.ndarray:
    return np.asarray(getattr(f, "values", f), dtype=float)


def _check_quadrature(quadrature: str) -> None:
    if quadrature not in QUADRATURES:
        raise ValueError(f"quadrature must be one of {QUADRATURES}, got {quadrature!r}")


def near_field_coefficient(spec: KernelSpec, dx: float, amplitude: float | None = None) -> float:
    """Weight of the diagonal contribution the punctured rectangle sum misses.

    A pair integrand behaving like c |z|^(1-alpha) loses -zeta(alpha-1) dx^(2-alpha) c
    when summed over z = k dx, k != 0. Zero for the bounded Motsch-Tadmor kernel.
    """
    if not spec.singular:
        return 0.0
    amplitude = spec.amplitude if amplitude is None else amplitude
    return float(-zeta(spec.alpha - 1.0) * dx ** (2.0 - spec.alpha) * amplitude)


def default_drift_radius(grid: Grid1D, spec: KernelSpec) -> float:
    """Four cells or r0/8, whichever is larger, rounded to the grid and capped at r0."""
    cells = max(4, round(spec.r0 / (8.0 * grid.dx)))
    cells = min(cells, max(1, int(np.floor(spec.r0 / grid.dx * (1.0 + 1e-12)))))
    return cells * grid.dx


def _drift_radius(grid: Grid1D, spec: KernelSpec, r: float | None) -> float:
    if r is None:
        return default_drift_radius(grid, spec)
    lower, upper = grid.dx, spec.r0
    if not lower * (1.0 - 1e-12) <= r <= upper * (1.0 + 1e-12):
        raise RadiusOutOfRange(r, lower, upper)
    return float(r)


def _principal_value(
    table: KernelTable,
    f: np.ndarray,
    weights: np.ndarray,
    fprime: np.ndarray,
    r: float,
    taylor: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Taylor-corrected punctured sum and its drift b = sum_{|z|<r} z w dx."""
    dx = table.dx
    differences = table.gather(f) - f[:, None]
    if taylor:
        near = table.near_block(r)
        z_near = table.z[near][None, :]
        drift = table.paired_sum(z_near * weights[:, near]) * dx
        differences[:, near] -= z_near * fprime[:, None]
    else:
        drift = np.zeros_like(f)
    return table.paired_sum(differences * weights) * dx + drift * fprime, drift


def eval_Lphi(
    f: ArrayLike,
    rho: DensityField,
    spec: KernelSpec,
    r: float | None = None,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
    taylor: bool = True,
    table: KernelTable | None = None,
) -> OperatorEval:
    """Pointwise L_phi f = p.v. sum (f(x+z) - f(x)) phi(x+z, x) dx over grid offsets."""
    _check_quadrature(quadrature)
    grid = rho.grid
    r = _drift_radius(grid, spec, r)
    if not taylor and spec.singular and spec.alpha >= 1:
        raise ValueError("the uncorrected punctured sum needs alpha < 1")
    table = table or kernel_table(rho, spec)
    values = _values(f)
    fprime = derivative(values, grid.length, derivative_method)
    result, b_r = _principal_value(table, values, table.phi, fprime, r, taylor)
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(spec, grid.dx)
        if coeff:
            weight = rho.values ** (-spec.effective_tau)
            result = result + coeff * derivative(weight * fprime, grid.length, derivative_method)
    return OperatorEval(result, r, quadrature, b_r)


def eval_commutator(
    rho: DensityField,
    f: ArrayLike,
    spec: KernelSpec,
    r: float | None = None,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
    taylor: bool = True,
    table: KernelTable | None = None,
) -> OperatorEval:
    """C_phi(rho, f) = L_phi(rho f) - f L_phi(rho), evaluated pointwise."""
    _check_quadrature(quadrature)
    grid = rho.grid
    r = _drift_radius(grid, spec, r)
    if not taylor and spec.singular and spec.alpha >= 1:
        raise ValueError("the uncorrected punctured sum needs alpha < 1")
    table = table or kernel_table(rho, spec)
    values = _values(f)
    fprime = derivative(values, grid.length, derivative_method)
    rho_nb = table.gather(rho.values)
    weighted = rho_nb * table.phi
    result, _ = _principal_value(table, values, weighted, fprime, r, taylor)
    near = table.near_block(r)
    z_phi = table.z[near][None, :] * table.phi[:, near]
    b_r = table.paired_sum(z_phi) * grid.dx
    a_r = table.paired_sum((rho_nb[:, near] - rho.values[:, None]) * z_phi) * grid.dx
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(spec, grid.dx)
        if coeff:
            weight = rho.values ** (2.0 - spec.effective_tau)
            flux = derivative(weight * fprime, grid.length, derivative_method)
            result = result + coeff * flux / rho.values
    return OperatorEval(result, r, quadrature, b_r, a_r)


def phi_prime_table(table: KernelTable) -> np.ndarray:
    """d-derivative kernel: -tau phi / d * (rho(x+z) - rho(x)) * sgn(z)."""
    spec = table.spec
    if not spec.singular:
        raise ValueError("the Motsch-Tadmor kernel has no d-derivative kernel")
    tau = spec.effective_tau
    if tau == 0:
        return np.zeros_like(table.phi)
    jump = table.gather(table.rho.values) - table.rho.values[:, None]
    return -tau * table.phi / table.distances * jump * np.sign(table.z)[None, :]


def eval_phi_prime_kernel(rho: DensityField, spec: KernelSpec, x: float, z: float) -> float:
    """phi' at (x + z, x) for the continuum distance, rho read at nodes by periodic interpolation."""
    if not spec.singular:
        raise ValueError("the Motsch-Tadmor kernel has no d-derivative kernel")
    grid = rho.grid
    d = topo_distance_1d(rho, x + z, x)
    phi = eval_phi(spec, abs(z), d)
    if spec.effective_tau == 0:
        return 0.0
    rho_at = np.interp([x + z, x], grid.nodes, rho.values, period=grid.length)
    return float(-spec.effective_tau * phi / d * (rho_at[0] - rho_at[1]) * np.sign(z))


def eval_Lphi_prime(
    f: ArrayLike,
    rho: DensityField,
    spec: KernelSpec,
    r: float | None = None,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
    table: KernelTable | None = None,
) -> OperatorEval:
    """L_{phi'} f, the kernel-derivative term of the Leibniz rule for (L_phi f)'."""
    _check_quadrature(quadrature)
    grid = rho.grid
    r = _drift_radius(grid, spec, r)
    table = table or kernel_table(rho, spec)
    values = _values(f)
    fprime = derivative(values, grid.length, derivative_method)
    result, b_r = _principal_value(table, values, phi_prime_table(table), fprime, r, True)
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(spec, grid.dx)
        weight = derivative(rho.values ** (-spec.effective_tau), grid.length, derivative_method)
        result = result + coeff * derivative(weight * fprime, grid.length, derivative_method)
    return OperatorEval(result, r, quadrature, b_r)


def enstrophy_density(
    f: ArrayLike,
    spec: KernelSpec,
    grid: Grid1D | None = None,
    index: int | None = None,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
) -> float | np.ndarray:
    """D_alpha f(x) = sum_{z != 0} |f(x+z) - f(x)|^2 h(|z|) / |z|^(1+alpha) dx.

    Returns the whole field, or the value at node ``index``.
    """
    _check_quadrature(quadrature)
    grid = grid or getattr(f, "grid", None)
    if grid is None:
        raise ValueError("enstrophy_density needs a grid for plain arrays")
    values = _values(f)
    k = max_offset_for(spec.profile.support, grid.dx, grid.n_cells)
    offsets = signed_offsets(k)
    z = np.abs(offsets * grid.dx)
    weights = np.asarray(eval_h(spec.profile, z)) / z ** (1.0 + spec.alpha)
    neighbours = (np.arange(grid.n_cells)[:, None] + offsets[None, :]) % grid.n_cells
    terms = (values[neighbours] - values[:, None]) ** 2 * weights[None, :]
    density = np.sum(terms[:, :k][:, ::-1] + terms[:, k:], axis=1) * grid.dx
    if quadrature == "zeta-corrected":
        fprime = derivative(values, grid.length, derivative_method)
        density = density + near_field_coefficient(spec, grid.dx, amplitude=1.0) * 2.0 * fprime**2
    return float(density[index]) if index is not None else density


def weak_form(f: ArrayLike, g: ArrayLike, rho: DensityField, spec: KernelSpec, table: KernelTable | None = None) -> float:
    """1/2 sum_ij phi_ij (f_i - f_j)(g_i - g_j) dx^2."""
    table = table or kernel_table(rho, spec)
    f_values, g_values = _values(f), _values(g)
    df = table.gather(f_values) - f_values[:, None]
    dg = table.gather(g_values) - g_values[:, None]
    return float(0.5 * np.sum(table.paired_sum(table.phi * df * dg)) * table.dx**2)


def alignment_stiffness(
    table: KernelTable,
    quadrature: str = DEFAULT_QUADRATURE,
) -> float:
    """Largest decay rate the alignment source f -> C_phi(rho, f) can impose on a grid mode."""
    rho = table.rho
    rate = float(np.max(table.neighbour_mass_rate))
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(table.spec, table.dx)
        rate += coeff * float(np.max(rho.values ** (1.0 - table.spec.effective_tau))) * (np.pi / table.dx) ** 2
    return rate
