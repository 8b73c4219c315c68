from __future__ import annotations

from topo_flock.kernels.cutoff import CutoffProfile, eval_h
from topo_flock.kernels.family import KernelSpec, eval_phi, kernel_problems, sandwich_constants

__all__ = [
    "CutoffProfile",
    "KernelSpec",
    "eval_h",
    "eval_phi",
    "kernel_problems",
    "sandwich_constants",
]
