from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from numpy.typing import ArrayLike

from topo_flock.fields.grid import DensityField
from topo_flock.geometry.distance import (
    mass_of_ball,
    max_offset_for,
    offset_distances,
    signed_offsets,
)
from topo_flock.kernels.family import KernelSpec, eval_phi

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KernelTable:
    """phi(x_i + z, x_i) on every node for signed grid offsets z.

    ``phi``, ``distances`` and ``neighbours`` have shape (n_cells, 2K) with
    columns ordered [-K, ..., -1, 1, ..., K].
    """

    rho: DensityField
    spec: KernelSpec
    offsets: np.ndarray
    z: np.ndarray
    distances: np.ndarray
    phi: np.ndarray
    neighbours: np.ndarray

    @property
    def dx(self) -> float:
        return self.rho.grid.dx

    @property
    def max_offset(self) -> int:
        return self.offsets.size // 2

    def gather(self, values: ArrayLike) -> np.ndarray:
        """values[i + z] laid out like the table."""
        return np.asarray(values, dtype=float)[self.neighbours]

    def paired_sum(self, terms: np.ndarray) -> np.ndarray:
        """Row sums taken as sum over k of (terms at -k + terms at +k).

        Works on any centred block of columns, such as ``near_block``.
        """
        k = terms.shape[1] // 2
        return np.sum(terms[:, :k][:, ::-1] + terms[:, k:], axis=1)

    @cached_property
    def neighbour_mass_rate(self) -> np.ndarray:
        """sum_z phi(x_i + z, x_i) rho(x_i + z) dx at every node."""
        return self.paired_sum(self.phi * self.gather(self.rho.values)) * self.dx

    def near_block(self, r: float) -> slice:
        """Columns with |z| < r, themselves laid out as [-k, ..., -1, 1, ..., k]."""
        k = self.max_offset
        inside = int(np.count_nonzero(self.z[k:] < r))
        return slice(k - inside, k + inside)

    def dense(self) -> np.ndarray:
        """Dense n x n kernel matrix Phi[i, j] = phi(x_j, x_i) (zero diagonal)."""
        n = self.rho.grid.n_cells
        matrix = np.zeros((n, n))
        rows = np.repeat(np.arange(n)[:, None], self.offsets.size, axis=1)
        matrix[rows, self.neighbours] = self.phi
        return matrix


@lru_cache(maxsize=4)
def kernel_table(rho: DensityField, spec: KernelSpec) -> KernelTable:
    """Kernel on every node and offset, cached on (rho identity, spec); tables are read-only."""
    grid = rho.grid
    spec.validate_for_length(grid.length)
    k = max_offset_for(spec.support, grid.dx, grid.n_cells)
    offsets = signed_offsets(k)
    z = offsets * grid.dx
    neighbours = (np.arange(grid.n_cells)[:, None] + offsets[None, :]) % grid.n_cells
    radius = np.abs(z)[None, :]
    if spec.family == "motsch-tadmor":
        ball = np.asarray(mass_of_ball(rho, grid.nodes, spec.r0))
        distances = np.broadcast_to(ball[:, None], neighbours.shape).copy()
    else:
        distances = offset_distances(rho, k)
    distances.setflags(write=False)
    phi = np.broadcast_to(eval_phi(spec, radius, distances), neighbours.shape).copy()
    phi.setflags(write=False)
    logger.debug("kernel table: %d nodes x %d offsets (%s)", grid.n_cells, offsets.size, spec.family)
    return KernelTable(rho, spec, offsets, z, distances, phi, neighbours)
