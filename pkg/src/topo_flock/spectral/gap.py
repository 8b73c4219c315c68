from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.linalg
from scipy.integrate import cumulative_trapezoid

from topo_flock.config import (
    DEFAULT_DERIVATIVE_METHOD,
    DEFAULT_QUADRATURE,
    MAX_DENSE_CELLS,
)
from topo_flock.errors import EigSolverFailure
from topo_flock.fields.calculus import derivative_matrix
from topo_flock.fields.grid import DensityField, Grid1D
from topo_flock.fields.io import validate_columns
from topo_flock.geometry.distance import max_offset_for, signed_offsets
from topo_flock.kernels.family import KernelSpec, eval_phi
from topo_flock.operators.singular import near_field_coefficient
from topo_flock.operators.table import KernelTable, kernel_table

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralReport:
    lambda2: float
    eigvec2: np.ndarray
    quotient_check: float
    lambda1: float


@dataclass(frozen=True)
class DecayReport:
    slack: float
    holds: bool
    worst_index: int


def assemble_form(
    rho: DensityField,
    spec: KernelSpec,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
    table: KernelTable | None = None,
) -> np.ndarray:
    """Symmetric PSD B with u^T B u = 1/2 sum_ij phi_ij (u_i - u_j)^2 rho_i rho_j dx^2.

    The zeta-corrected quadrature adds the near-field term so B matches the
    alignment source the solver applies.
    """
    grid = rho.grid
    if grid.n_cells > MAX_DENSE_CELLS:
        raise ValueError(f"dense assembly is capped at {MAX_DENSE_CELLS} cells, got {grid.n_cells}")
    table = table or kernel_table(rho, spec)
    weights = rho.values * grid.dx
    A = table.dense() * weights[:, None] * weights[None, :]
    A = 0.5 * (A + A.T)
    B = np.diag(A.sum(axis=1)) - A
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(spec, grid.dx)
        if coeff:
            D = derivative_matrix(grid.n_cells, grid.length, derivative_method)
            mobility = rho.values ** (2.0 - spec.effective_tau) * grid.dx
            B = B + coeff * (D.T * mobility[None, :]) @ D
            B = 0.5 * (B + B.T)
    return B


def lambda2(
    rho: DensityField,
    spec: KernelSpec,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
    table: KernelTable | None = None,
) -> SpectralReport:
    """Spectral gap 2 mu_2 of B w = mu M w, M = diag(rho dx)."""
    B = assemble_form(
        rho, spec, quadrature=quadrature, derivative_method=derivative_method, table=table
    )
    M = np.diag(rho.values * rho.grid.dx)
    try:
        mu, vectors = scipy.linalg.eigh(B, M, subset_by_index=[0, 1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigSolverFailure(f"generalized eigensolve failed: {exc}") from exc

    w = vectors[:, 1]
    Bw = B @ w
    residual = float(np.linalg.norm(Bw - mu[1] * (M @ w)))
    scale = max(float(np.linalg.norm(Bw)), np.finfo(float).eps * float(np.linalg.norm(B, 1)))
    if not np.all(np.isfinite(mu)) or residual > RESIDUAL_TOLERANCE * scale:
        raise EigSolverFailure(f"eigen residual {residual:.3e} exceeds tolerance (scale {scale:.3e})")

    quotient = float(w @ Bw / (w @ M @ w))
    logger.debug("lambda2 = %.6g (residual %.2e)", 2.0 * mu[1], residual)
    return SpectralReport(
        lambda2=float(2.0 * mu[1]),
        eigvec2=w,
        quotient_check=2.0 * quotient,
        lambda1=float(2.0 * mu[0]),
    )


def circulant_lambda2(
    grid: Grid1D,
    spec: KernelSpec,
    rho_const: float,
    *,
    quadrature: str = DEFAULT_QUADRATURE,
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD,
) -> float:
    """Spectral gap for uniform density from the Fourier symbol of the circulant form."""
    spec.validate_for_length(grid.length)
    k_max = max_offset_for(spec.support, grid.dx, grid.n_cells)
    z = signed_offsets(k_max) * grid.dx
    if spec.family == "motsch-tadmor":
        phi = eval_phi(spec, np.abs(z), np.full(z.shape, 2.0 * spec.r0 * rho_const))
    else:
        phi = eval_phi(spec, np.abs(z), rho_const * np.abs(z))
    modes = np.arange(1, grid.n_cells // 2 + 1)
    wave = 2.0 * np.pi * modes / grid.length
    symbol = rho_const * np.sum((1.0 - np.cos(wave[:, None] * z[None, :])) * phi[None, :], axis=1) * grid.dx
    if quadrature == "zeta-corrected":
        coeff = near_field_coefficient(spec, grid.dx)
        if derivative_method == "spectral":
            effective = np.where(modes == grid.n_cells / 2, 0.0, wave)
        else:
            effective = np.sin(wave * grid.dx) / grid.dx
        symbol = symbol + coeff * rho_const ** (1.0 - spec.effective_tau) * effective**2
    return float(2.0 * np.min(symbol))


def check_decay_bound(trajectory: pd.DataFrame, eps: float = 0.05) -> DecayReport:
    """Worst excess of V2(t) over V2(0) exp(-int_0^t lambda2 ds), trapezoid in time."""
    validate_columns(trajectory, {"t", "V2", "lambda2"}, "check_decay_bound")
    t = trajectory["t"].to_numpy(dtype=float)
    v2 = trajectory["V2"].to_numpy(dtype=float)
    gap = trajectory["lambda2"].to_numpy(dtype=float)
    if t.size == 0:
        return DecayReport(0.0, True, 0)
    clock = cumulative_trapezoid(gap, t, initial=0.0) if t.size > 1 else np.zeros(1)
    bound = v2[0] * np.exp(-clock)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, v2 / bound, np.where(v2 > 0, np.inf, 0.0))
    worst = int(np.argmax(ratio))
    slack = max(0.0, float(ratio[worst]) - 1.0)
    return DecayReport(slack, slack <= eps, worst)
