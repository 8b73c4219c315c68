from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.config import CUTOFF_SHAPES, DEFAULT_CUTOFF


@dataclass(frozen=True)
class CutoffProfile:
    """Radial cutoff h with plateau 1 on [0, r0] and support inside [0, 2 r0]."""

    r0: float
    shape: str = DEFAULT_CUTOFF

    def __post_init__(self) -> None:
        problems = []
        if not self.r0 > 0:
            problems.append(f"r0 must be positive, got {self.r0!r}")
        if self.shape not in CUTOFF_SHAPES:
            problems.append(f"cutoff must be one of {CUTOFF_SHAPES}, got {self.shape!r}")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "r0", float(self.r0))

    @property
    def support(self) -> float:
        """Smallest radius beyond which h vanishes."""
        return 2.0 * self.r0 if self.shape == "smooth-cos2" else self.r0


def eval_h(profile: CutoffProfile, r: ArrayLike) -> float | np.ndarray:
    """Evaluate the cutoff; scalars in, scalars out.

    smooth-cos2 is 1 on [0, r0], cos^2(pi (r - r0) / (2 r0)) on [r0, 2 r0]
    and 0 beyond. indicator is 1 on [0, r0] and 0 beyond.
    """
    radius = np.asarray(r, dtype=float)
    if np.any(radius < 0):
        raise ValueError("cutoff radius must be nonnegative")
    r0 = profile.r0
    if profile.shape == "indicator":
        values = np.where(radius <= r0, 1.0, 0.0)
    else:
        ramp = np.cos(0.5 * np.pi * (np.clip(radius, r0, 2.0 * r0) - r0) / r0) ** 2
        values = np.where(radius <= r0, 1.0, np.where(radius >= 2.0 * r0, 0.0, ramp))
    return float(values) if values.ndim == 0 else values
