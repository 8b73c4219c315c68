from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.config import DEFAULT_LENGTH
from topo_flock.fields.grid import torus_displacement

logger = logging.getLogger(__name__)

REGION_SHAPES = ("parabolic", "ball")


def _as_points(values: ArrayLike) -> np.ndarray:
    points = np.asarray(values, dtype=float)
    return points[..., None] if points.ndim == 0 else points


def _canonical_pair(x: np.ndarray, y: np.ndarray, length: float) -> tuple[np.ndarray, np.ndarray]:
    """Order (x, y) lexicographically so the frame does not depend on argument order."""
    a, b = np.broadcast_arrays(np.mod(x, length), np.mod(y, length))
    swap = np.zeros(a.shape[:-1], dtype=bool)
    decided = np.zeros(a.shape[:-1], dtype=bool)
    for axis in range(a.shape[-1]):
        greater = a[..., axis] > b[..., axis]
        less = a[..., axis] < b[..., axis]
        swap |= ~decided & greater
        decided |= greater | less
    first = np.where(swap[..., None], b, a)
    second = np.where(swap[..., None], a, b)
    return first, second


@dataclass(frozen=True, eq=False)
class CommRegion:
    """Parabolic-arch region of revolution between two points of the torus."""

    midpoint: np.ndarray
    half_axis: np.ndarray
    length: float

    @classmethod
    def between(cls, x: ArrayLike, y: ArrayLike, length: float = DEFAULT_LENGTH) -> CommRegion:
        a, b = _canonical_pair(_as_points(x), _as_points(y), length)
        half = 0.5 * torus_displacement(a, b, length)
        return cls(a + half, half, float(length))

    @property
    def r(self) -> np.ndarray:
        return np.asarray(np.linalg.norm(self.half_axis, axis=-1))

    @property
    def axis(self) -> np.ndarray:
        r = self.r[..., None]
        return np.divide(self.half_axis, r, out=np.zeros_like(self.half_axis), where=r > 0)

    def contains(self, z: ArrayLike, shape: str = "parabolic") -> np.ndarray:
        if shape not in REGION_SHAPES:
            raise ValueError(f"shape must be one of {REGION_SHAPES}, got {shape!r}")
        w = torus_displacement(self.midpoint, _as_points(z), self.length)
        r = self.r
        if shape == "ball":
            inside = np.linalg.norm(w, axis=-1) < r
        else:
            along = np.asarray(np.sum(w * self.axis, axis=-1))
            perp = np.linalg.norm(w - along[..., None] * self.axis, axis=-1)
            t = np.divide(along, r, out=np.zeros_like(along), where=r > 0)
            inside = (np.abs(t) < 1.0) & (perp < r * (1.0 - t**2))
        return inside & (r > 0)


def region_contains(
    x: ArrayLike,
    y: ArrayLike,
    z: ArrayLike,
    length: float = DEFAULT_LENGTH,
    shape: str = "parabolic",
) -> bool | np.ndarray:
    """Strict membership of z in the region between x and y (last axis = coordinates).

    Uses the minimal periodic image of z relative to the midpoint. The
    region of a point with itself is empty.
    """
    inside = CommRegion.between(x, y, length).contains(z, shape)
    return bool(inside) if inside.ndim == 0 else inside


def region_members(positions: ArrayLike, i: int, length: float) -> np.ndarray:
    """Closed-region member counts for every pair (i, j), tips and tip-coincident agents included."""
    points = np.asarray(positions, dtype=float)
    tip = points[i]
    inside = region_contains(tip[None, None, :], points[:, None, :], points[None, :, :], length)
    at_i = np.all(points == tip, axis=-1)[None, :]
    at_j = np.all(points[:, None, :] == points[None, :, :], axis=-1)
    return np.sum(inside | at_i | at_j, axis=1)


def _draw_arch(count: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Uniform (t, s) in the planar arch |s| < 1 - t^2 by rejection."""
    t_parts, s_parts, drawn = [], [], 0
    while drawn < count:
        batch = max(3 * (count - drawn), 16)
        t = rng.uniform(-1.0, 1.0, size=batch)
        s = rng.uniform(-1.0, 1.0, size=batch)
        keep = np.abs(s) < 1.0 - t**2
        t_parts.append(t[keep])
        s_parts.append(s[keep])
        drawn += int(keep.sum())
    return np.concatenate(t_parts)[:count], np.concatenate(s_parts)[:count]


def _draw_disk(count: int, rng: np.random.Generator, radius: ArrayLike) -> np.ndarray:
    rho = np.asarray(radius, dtype=float) * np.sqrt(rng.uniform(0.0, 1.0, size=count))
    angle = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return np.column_stack([rho * np.cos(angle), rho * np.sin(angle)])


def _planar_normal(axis: np.ndarray) -> np.ndarray:
    return np.stack([-axis[..., 1], axis[..., 0]], axis=-1)


def sample_region(
    x: ArrayLike,
    y: ArrayLike,
    count: int,
    rng: np.random.Generator,
    length: float = DEFAULT_LENGTH,
) -> np.ndarray:
    """``count`` points drawn uniformly from the planar region between x and y."""
    region = CommRegion.between(x, y, length)
    if region.midpoint.shape != (2,):
        raise ValueError("sample_region draws from a single pair of planar points")
    r = float(region.r)
    if r == 0:
        raise ValueError("the region between coincident points is empty")
    t, s = _draw_arch(count, rng)
    normal = _planar_normal(region.axis)
    points = region.midpoint + t[:, None] * region.half_axis + (s * r)[:, None] * normal
    return np.mod(points, length)


def enclosure_violations(
    n_samples: int,
    rng: np.random.Generator,
    radius: float = 1.0,
    shape: str = "parabolic",
) -> int:
    """Count sampled z in the region between x and x' that fall outside B(x*, radius).

    x is drawn uniformly from B(x*, radius/10) and x' from B(x*, radius), one
    z per pair. Zero violations is the expected outcome for the parabolic
    region.
    """
    x = _draw_disk(n_samples, rng, 0.1 * radius)
    x_prime = _draw_disk(n_samples, rng, radius)
    half = 0.5 * (x_prime - x)
    mid = x + half
    r = np.linalg.norm(half, axis=-1)
    if shape == "ball":
        z = mid + _draw_disk(n_samples, rng, r)
    elif shape == "parabolic":
        axis = np.divide(half, r[:, None], out=np.zeros_like(half), where=r[:, None] > 0)
        t, s = _draw_arch(n_samples, rng)
        z = mid + t[:, None] * half + (s * r)[:, None] * _planar_normal(axis)
    else:
        raise ValueError(f"shape must be one of {REGION_SHAPES}, got {shape!r}")
    violations = int(np.count_nonzero(np.linalg.norm(z, axis=-1) >= radius))
    logger.debug("%d of %d %s samples left the enclosing ball", violations, n_samples, shape)
    return violations
