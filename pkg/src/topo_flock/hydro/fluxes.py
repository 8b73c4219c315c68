from __future__ import annotations

import numpy as np


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def reconstruct(
    rho: np.ndarray,
    m: np.ndarray,
    reconstruction: str = "muscl",
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Edge values of each cell: (rho_minus, rho_plus, m_minus, m_plus).

    ``muscl`` uses minmod slopes for rho, then limits the momentum slope so
    both edge velocities stay inside the range of the neighbouring cell
    velocities. Edge averages always equal the cell average.
    """
    if reconstruction == "first-order":
        return rho, rho, m, m
    if reconstruction != "muscl":
        raise ValueError(f"unknown reconstruction {reconstruction!r}")

    u = m / rho
    left, right = np.roll(rho, 1), np.roll(rho, -1)
    half_slope = 0.5 * minmod(right - rho, rho - left)
    rho_minus, rho_plus = rho - half_slope, rho + half_slope

    m_half = 0.5 * minmod(np.roll(m, -1) - m, m - np.roll(m, 1))
    # departures of the edge velocities from u_i at full momentum slope
    dev_minus = (m - m_half) / rho_minus - u
    dev_plus = (m + m_half) / rho_plus - u
    u_low = np.minimum(np.minimum(np.roll(u, 1), u), np.roll(u, -1))
    u_high = np.maximum(np.maximum(np.roll(u, 1), u), np.roll(u, -1))

    def _room(dev: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(dev > 0, (u_high - u) / dev, np.inf)
            down = np.where(dev < 0, (u_low - u) / dev, np.inf)
        return np.minimum(up, down)

    theta = np.clip(np.minimum(_room(dev_minus), _room(dev_plus)), 0.0, 1.0)
    u_minus = u + theta * dev_minus
    u_plus = u + theta * dev_plus
    return rho_minus, rho_plus, rho_minus * u_minus, rho_plus * u_plus


def llf_fluxes(
    rho: np.ndarray,
    m: np.ndarray,
    reconstruction: str = "muscl",
) -> tuple[np.ndarray, np.ndarray]:
    """Local Lax-Friedrichs fluxes for (rho u, rho u^2) at the faces i + 1/2."""
    rho_minus, rho_plus, m_minus, m_plus = reconstruct(rho, m, reconstruction)
    rho_l, m_l = rho_plus, m_plus
    rho_r, m_r = np.roll(rho_minus, -1), np.roll(m_minus, -1)
    u_l, u_r = m_l / rho_l, m_r / rho_r
    speed = np.maximum(np.abs(u_l), np.abs(u_r))
    flux_rho = 0.5 * (m_l + m_r) - 0.5 * speed * (rho_r - rho_l)
    flux_m = 0.5 * (m_l * u_l + m_r * u_r) - 0.5 * speed * (m_r - m_l)
    return flux_rho, flux_m


def flux_divergence(flux: np.ndarray, dx: float) -> np.ndarray:
    """-(F_{i+1/2} - F_{i-1/2}) / dx."""
    return -(flux - np.roll(flux, 1)) / dx
