from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.config import (
    CUTOFF_SHAPES,
    DEFAULT_ALPHA,
    DEFAULT_CUTOFF,
    DEFAULT_FAMILY,
    DEFAULT_R0,
    DEFAULT_TAU,
    KERNEL_FAMILIES,
)
from topo_flock.errors import SingularEvaluation
from topo_flock.kernels.cutoff import CutoffProfile, eval_h


def kernel_problems(
    family: object,
    alpha: object,
    tau: object,
    r0: object,
    cutoff: object,
    amplitude: object,
    length: float | None = None,
) -> list[str]:
    """Every violated kernel constraint, as human-readable messages."""
    problems: list[str] = []
    if family not in KERNEL_FAMILIES:
        problems.append(f"family must be one of {KERNEL_FAMILIES}, got {family!r}")
    if not (isinstance(alpha, (int, float)) and 0 < alpha < 2):
        problems.append(f"alpha must lie in (0,2), got {alpha!r}")
    if not (isinstance(tau, (int, float)) and tau >= 0):
        problems.append(f"tau must be nonnegative, got {tau!r}")
    if not (isinstance(r0, (int, float)) and r0 > 0):
        problems.append(f"r0 must be positive, got {r0!r}")
    elif length is not None and r0 > length / 4:
        problems.append(f"r0 must not exceed length/4 = {length / 4!r}, got {r0!r}")
    if cutoff not in CUTOFF_SHAPES:
        problems.append(f"cutoff must be one of {CUTOFF_SHAPES}, got {cutoff!r}")
    if not (isinstance(amplitude, (int, float)) and amplitude > 0):
        problems.append(f"amplitude must be positive, got {amplitude!r}")
    return problems


@dataclass(frozen=True)
class KernelSpec:
    """Communication kernel phi(x, y) = amplitude * h(r) / (r^(1+alpha-tau) d^tau).

    ``geometric`` ignores ``tau`` (treated as 0); ``motsch-tadmor`` ignores
    the cutoff shape and uses amplitude * 1{r < r0} / d with d the mass of
    the observer's r0-ball.
    """

    family: str = DEFAULT_FAMILY
    alpha: float = DEFAULT_ALPHA
    tau: float = DEFAULT_TAU
    r0: float = DEFAULT_R0
    cutoff: str = DEFAULT_CUTOFF
    amplitude: float = 1.0
    profile: CutoffProfile = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        problems = kernel_problems(
            self.family, self.alpha, self.tau, self.r0, self.cutoff, self.amplitude
        )
        if problems:
            raise ValueError("; ".join(problems))
        for name in ("alpha", "tau", "r0", "amplitude"):
            object.__setattr__(self, name, float(getattr(self, name)))
        object.__setattr__(self, "profile", CutoffProfile(self.r0, self.cutoff))

    @property
    def effective_tau(self) -> float:
        return self.tau if self.family == "topological" else 0.0

    @property
    def singular(self) -> bool:
        return self.family != "motsch-tadmor"

    @property
    def symmetric(self) -> bool:
        """phi(x, y) == phi(y, x); false for the observer-normalised Motsch-Tadmor kernel."""
        return self.family != "motsch-tadmor"

    @property
    def support(self) -> float:
        """Radius beyond which phi vanishes."""
        return self.r0 if self.family == "motsch-tadmor" else self.profile.support

    def validate_for_length(self, length: float) -> None:
        if self.r0 > length / 4:
            raise ValueError(f"r0 must not exceed length/4 = {length / 4!r}, got {self.r0!r}")


def eval_phi(spec: KernelSpec, r: ArrayLike, d: ArrayLike) -> float | np.ndarray:
    """Kernel value for separation ``r`` and topological distance ``d``.

    For motsch-tadmor ``d`` is the mass of the observer's r0-ball.
    """
    radius = np.asarray(r, dtype=float)
    distance = np.asarray(d, dtype=float)
    if np.any(radius <= 0):
        raise SingularEvaluation("kernel evaluated at zero separation")
    if spec.family == "motsch-tadmor":
        if np.any(distance <= 0):
            raise SingularEvaluation("Motsch-Tadmor kernel needs a positive ball mass")
        values = spec.amplitude * np.where(radius < spec.r0, 1.0, 0.0) / distance
    else:
        tau = spec.effective_tau
        if tau > 0 and np.any(distance <= 0):
            raise SingularEvaluation("topological kernel needs a positive distance")
        h = np.asarray(eval_h(spec.profile, radius))
        with np.errstate(divide="ignore"):
            scale = radius ** (tau - 1.0 - spec.alpha) * (distance ** (-tau) if tau > 0 else 1.0)
        values = np.where(h > 0, spec.amplitude * h * scale, 0.0)
    values = np.asarray(values, dtype=float)
    return float(values) if values.ndim == 0 else values


def sandwich_constants(spec: KernelSpec, rho_const: float) -> tuple[float, float]:
    """(c1, c2) with c1 1{r<r0}/r^(1+alpha) <= phi <= c2 1{r<2 r0}/r^(1+alpha) for rho == rho_const."""
    if not spec.singular:
        raise ValueError("the Motsch-Tadmor kernel has no singular sandwich bound")
    if not rho_const > 0:
        raise ValueError(f"rho_const must be positive, got {rho_const!r}")
    constant = spec.amplitude / rho_const**spec.effective_tau
    return constant, constant
