from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.config import DERIVATIVE_METHODS


def _wavenumbers(n: int, length: float) -> np.ndarray:
    return 2.0 * np.pi / length * np.fft.rfftfreq(n, d=1.0 / n)


def spectral_derivative(values: ArrayLike, length: float, order: int = 1) -> np.ndarray:
    """Fourier-collocation derivative along the last axis.

    Rows that are exactly constant return exact zeros. The Nyquist mode is
    dropped for odd orders on even grids so the operator stays real and
    skew-symmetric.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    multiplier = (1j * _wavenumbers(n, length)) ** order
    if n % 2 == 0 and order % 2 == 1:
        multiplier[-1] = 0.0
    result = np.fft.irfft(np.fft.rfft(values, axis=-1) * multiplier, n=n, axis=-1)
    constant = np.ptp(values, axis=-1, keepdims=True) == 0
    return np.where(constant, 0.0, result)


def spectral_antiderivative(values: ArrayLike, length: float) -> np.ndarray:
    """Mean-zero periodic primitive of a mean-zero field (mean mode is discarded)."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    k = _wavenumbers(n, length)
    coefficients = np.fft.rfft(values, axis=-1)
    inverse = np.zeros_like(coefficients)
    nonzero = k != 0
    if n % 2 == 0:
        nonzero[-1] = False
    inverse[..., nonzero] = coefficients[..., nonzero] / (1j * k[nonzero])
    return np.fft.irfft(inverse, n=n, axis=-1)


def central_derivative(values: ArrayLike, length: float) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    dx = length / values.shape[-1]
    return (np.roll(values, -1, axis=-1) - np.roll(values, 1, axis=-1)) / (2.0 * dx)


def derivative(values: ArrayLike, length: float, method: str = "spectral") -> np.ndarray:
    if method == "spectral":
        return spectral_derivative(values, length)
    if method == "central":
        return central_derivative(values, length)
    raise ValueError(f"derivative method must be one of {DERIVATIVE_METHODS}, got {method!r}")


def derivative_matrix(n: int, length: float, method: str = "spectral") -> np.ndarray:
    """Dense matrix D with D @ f == derivative(f)."""
    return derivative(np.eye(n), length, method).T
