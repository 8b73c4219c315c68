from __future__ import annotations

from topo_flock.fields.calculus import (
    central_derivative,
    derivative,
    derivative_matrix,
    spectral_antiderivative,
    spectral_derivative,
)
from topo_flock.fields.grid import (
    AgentSwarm,
    DensityField,
    Grid1D,
    MomentumField,
    VelocityField,
    torus_displacement,
    torus_distance,
)
from topo_flock.fields.initial import build_initial_data, sample_swarm_from_density
from topo_flock.fields.io import (
    fields_to_frame,
    read_fields_csv,
    read_swarm_csv,
    reorder_columns,
    swarm_to_frame,
    write_fields_csv,
    write_frame_csv,
    write_swarm_csv,
)

__all__ = [
    "AgentSwarm",
    "DensityField",
    "Grid1D",
    "MomentumField",
    "VelocityField",
    "build_initial_data",
    "central_derivative",
    "derivative",
    "derivative_matrix",
    "fields_to_frame",
    "read_fields_csv",
    "read_swarm_csv",
    "reorder_columns",
    "sample_swarm_from_density",
    "spectral_antiderivative",
    "spectral_derivative",
    "swarm_to_frame",
    "torus_displacement",
    "torus_distance",
    "write_fields_csv",
    "write_frame_csv",
    "write_swarm_csv",
]
