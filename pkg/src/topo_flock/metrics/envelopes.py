from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike


@dataclass(frozen=True)
class RootLogFit:
    """u_diam(t) <= C / sqrt(ln t), C fitted on the first half of the t > e samples."""

    C: float
    violations: int
    n_checked: int


@dataclass(frozen=True)
class DensityEnvelopeFit:
    """rho_min(t) >= c / (1 + t), c fitted on the first half of the samples."""

    c: float
    worst_ratio: float
    n_checked: int


@dataclass(frozen=True)
class AlgebraicRate:
    """rho_min ~ (1 + t)^(-beta) and the alignment exponent gamma = (1 - beta) / 2."""

    beta: float
    gamma: float


def _split(times: ArrayLike, values: ArrayLike, mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = np.asarray(times, dtype=float)[mask]
    v = np.asarray(values, dtype=float)[mask]
    return t, v


def fit_rootlog_envelope(times: ArrayLike, u_diam: ArrayLike, slack: float = 1e-9) -> RootLogFit:
    t = np.asarray(times, dtype=float)
    t, diam = _split(t, u_diam, t > math.e)
    if t.size == 0:
        return RootLogFit(float("nan"), 0, 0)
    half = max(1, t.size // 2)
    scaled = diam * np.sqrt(np.log(t))
    C = float(np.max(scaled[:half]))
    later = scaled[half:]
    violations = int(np.count_nonzero(later > C * (1.0 + slack)))
    return RootLogFit(C, violations, int(later.size))


def fit_density_envelope(times: ArrayLike, rho_min: ArrayLike) -> DensityEnvelopeFit:
    t = np.asarray(times, dtype=float)
    t, low = _split(t, rho_min, np.isfinite(t))
    if t.size == 0:
        return DensityEnvelopeFit(float("nan"), float("nan"), 0)
    half = max(1, t.size // 2)
    scaled = low * (1.0 + t)
    c = float(np.min(scaled[:half]))
    later = scaled[half:]
    worst = float(np.min(later) / c) if later.size else 1.0
    return DensityEnvelopeFit(c, worst, int(later.size))


def algebraic_rate(times: ArrayLike, rho_min: ArrayLike) -> AlgebraicRate:
    """Least-squares slope of log rho_min against log(1 + t), clipped to [0, 1]."""
    t = np.asarray(times, dtype=float)
    low = np.asarray(rho_min, dtype=float)
    keep = (t > 0) & (low > 0)
    if np.count_nonzero(keep) < 2:
        return AlgebraicRate(0.0, 0.5)
    slope = np.polyfit(np.log1p(t[keep]), np.log(low[keep]), 1)[0]
    beta = float(np.clip(-slope, 0.0, 1.0))
    return AlgebraicRate(beta, 0.5 * (1.0 - beta))
