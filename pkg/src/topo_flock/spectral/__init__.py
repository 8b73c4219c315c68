from __future__ import annotations

from topo_flock.spectral.gap import (
    DecayReport,
    SpectralReport,
    assemble_form,
    check_decay_bound,
    circulant_lambda2,
    lambda2,
)

__all__ = [
    "DecayReport",
    "SpectralReport",
    "assemble_form",
    "check_decay_bound",
    "circulant_lambda2",
    "lambda2",
]
