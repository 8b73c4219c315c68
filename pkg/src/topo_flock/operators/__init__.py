from __future__ import annotations

from topo_flock.operators.singular import (
    OperatorEval,
    alignment_stiffness,
    default_drift_radius,
    enstrophy_density,
    eval_commutator,
    eval_Lphi,
    eval_Lphi_prime,
    eval_phi_prime_kernel,
    near_field_coefficient,
    phi_prime_table,
    weak_form,
)
from topo_flock.operators.table import KernelTable, kernel_table

__all__ = [
    "KernelTable",
    "OperatorEval",
    "alignment_stiffness",
    "default_drift_radius",
    "enstrophy_density",
    "eval_Lphi",
    "eval_Lphi_prime",
    "eval_commutator",
    "eval_phi_prime_kernel",
    "kernel_table",
    "near_field_coefficient",
    "phi_prime_table",
    "weak_form",
]
