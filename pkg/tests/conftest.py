from __future__ import annotations

import numpy as np
import pytest

from topo_flock.fields import DensityField, Grid1D, VelocityField
from topo_flock.kernels import KernelSpec


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def grid() -> Grid1D:
    return Grid1D(256)


@pytest.fixture
def cosine_density():
    """rho = 1 + amplitude cos(x) sampled at the nodes of ``grid``."""

    def _build(grid: Grid1D, amplitude: float = 0.3) -> DensityField:
        return DensityField(grid, 1.0 + amplitude * np.cos(grid.nodes))

    return _build


@pytest.fixture
def sine_velocity():
    def _build(grid: Grid1D, m: int = 1) -> VelocityField:
        return VelocityField(grid, np.sin(m * grid.nodes))

    return _build


@pytest.fixture
def topological() -> KernelSpec:
    return KernelSpec("topological", alpha=1.2, tau=1.0, r0=np.pi / 2)


@pytest.fixture
def geometric() -> KernelSpec:
    return KernelSpec("geometric", alpha=1.2, tau=0.0, r0=np.pi / 2)
