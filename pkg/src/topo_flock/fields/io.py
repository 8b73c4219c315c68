from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

from topo_flock.config import (
    CSV_FLOAT_FORMAT,
    FIELD_COLUMN_ORDER,
    SWARM_COLUMN_ORDER_1D,
    SWARM_COLUMN_ORDER_2D,
)
from topo_flock.fields.grid import AgentSwarm, DensityField, Grid1D, VelocityField


def validate_columns(df: pd.DataFrame, required: set[str], function_name: str) -> None:
    """Validate that DataFrame contains all required columns."""
    missing = required - set(df.columns)
    if missing:
        raise ValueError(
            f"{function_name} requires columns {sorted(missing)}, "
            f"but DataFrame only has {sorted(df.columns)}"
        )


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def reorder_columns(df: pd.DataFrame, order: list[str]) -> pd.DataFrame:
    """Put the columns named in ``order`` first; the rest follow in their current order."""
    df = df.copy()
    ordered_cols = [col for col in order if col in df.columns]
    remaining_cols = [col for col in df.columns if col not in order]
    return df[ordered_cols + remaining_cols]


def write_frame_csv(df: pd.DataFrame, path: Path) -> Path:
    path = Path(path)
    _ensure_parent(path)
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def fields_to_frame(rho: DensityField, u: VelocityField, **extra: np.ndarray) -> pd.DataFrame:
    grid = rho.grid
    df = pd.DataFrame(
        {
            "i": np.arange(grid.n_cells),
            "x": grid.nodes,
            "rho": rho.values,
            "u": u.values,
            **{name: np.asarray(values, dtype=float) for name, values in extra.items()},
        }
    )
    return reorder_columns(df, FIELD_COLUMN_ORDER)


def write_fields_csv(rho: DensityField, u: VelocityField, path: Path) -> Path:
    return write_frame_csv(fields_to_frame(rho, u), path)


def read_fields_csv(path: Path, length: float) -> tuple[DensityField, VelocityField]:
    """Load a snapshot written by ``write_fields_csv``; ``length`` is the torus circumference."""
    df = pd.read_csv(path, float_precision="round_trip").sort_values("i")
    validate_columns(df, {"i", "rho", "u"}, "read_fields_csv")
    grid = Grid1D(len(df), length)
    return DensityField(grid, df["rho"].to_numpy()), VelocityField(grid, df["u"].to_numpy())


def swarm_to_frame(swarm: AgentSwarm) -> pd.DataFrame:
    if swarm.dim == 1:
        data = {"i": np.arange(swarm.n_agents), "x": swarm.positions[:, 0], "vx": swarm.velocities[:, 0]}
        order = SWARM_COLUMN_ORDER_1D
    else:
        data = {
            "i": np.arange(swarm.n_agents),
            "x": swarm.positions[:, 0],
            "y": swarm.positions[:, 1],
            "vx": swarm.velocities[:, 0],
            "vy": swarm.velocities[:, 1],
        }
        order = SWARM_COLUMN_ORDER_2D
    return reorder_columns(pd.DataFrame(data), order)


def write_swarm_csv(swarm: AgentSwarm, path: Path) -> Path:
    return write_frame_csv(swarm_to_frame(swarm), path)


def read_swarm_csv(path: Path, length: float) -> AgentSwarm:
    """Load a snapshot written by ``write_swarm_csv``; the dimension follows the columns."""
    df = pd.read_csv(path, float_precision="round_trip").sort_values("i")
    dim = 2 if "y" in df.columns else 1
    order = SWARM_COLUMN_ORDER_2D if dim == 2 else SWARM_COLUMN_ORDER_1D
    validate_columns(df, set(order), "read_swarm_csv")
    positions = df[order[1 : 1 + dim]].to_numpy()
    velocities = df[order[1 + dim :]].to_numpy()
    return AgentSwarm(dim, positions, velocities, length)
