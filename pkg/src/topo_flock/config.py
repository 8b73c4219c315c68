from __future__ import annotations

import math
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[2]
PACKAGE_DIR = Path(__file__).resolve().parent
PRESETS_DIR = PACKAGE_DIR / "presets"
DEFAULT_OUTPUT_DIR = "runs"

# Numerical defaults
DEFAULT_LENGTH = 2.0 * math.pi
DEFAULT_N_CELLS = 256
DEFAULT_ALPHA = 1.2
DEFAULT_TAU = 1.0
DEFAULT_R0 = math.pi / 2.0
DEFAULT_CUTOFF = "smooth-cos2"
DEFAULT_FAMILY = "topological"
DEFAULT_CFL = 0.4
DEFAULT_T_FINAL = 10.0
DEFAULT_OUTPUT_EVERY = 0.5
DEFAULT_QUADRATURE = "zeta-corrected"
DEFAULT_DERIVATIVE_METHOD = "spectral"
DEFAULT_RECONSTRUCTION = "muscl"
DEFAULT_INITIAL_KIND = "perturbed-sine"
DEFAULT_RUN_NAME = "experiment"
DEFAULT_MODE = "hydro1d"

DEFAULT_N_AGENTS = 128
DEFAULT_AGENT_DIM = 1
DEFAULT_CONVENTION = "mean-field"
DEFAULT_R_FLOOR = 1e-6
DEFAULT_MAX_HALVINGS = 8

MIN_CELLS = 8
MAX_DENSE_CELLS = 2048
DELTA_FLOOR = 1e-3

KERNEL_FAMILIES = ("topological", "geometric", "motsch-tadmor")
CUTOFF_SHAPES = ("smooth-cos2", "indicator")
INITIAL_KINDS = ("uniform", "perturbed-sine", "two-bump", "custom-samples")
RUN_MODES = ("hydro1d", "agents", "spectral-only", "sweep")
QUADRATURES = ("zeta-corrected", "punctured")
DERIVATIVE_METHODS = ("spectral", "central")
RECONSTRUCTIONS = ("muscl", "first-order")
CONVENTIONS = ("mean-field", "raw")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
CSV_FLOAT_FORMAT = "%.17g"

# Column order for field snapshots
FIELD_COLUMN_ORDER = ["i", "x", "rho", "u"]

# Column order for swarm snapshots
SWARM_COLUMN_ORDER_1D = ["i", "x", "vx"]
SWARM_COLUMN_ORDER_2D = ["i", "x", "y", "vx", "vy"]

# Column order for operator dumps
OPERATOR_COLUMN_ORDER = [
    "i",
    "x",
    "rho",
    "u",
    "L_rho",
    "C_rho_u",
    "b_r",
    "a_r",
    "e",
    "q",
    "q1",
]

# Column order for diagnostics
DIAGNOSTICS_COLUMN_ORDER = [
    # Clock
    "t",
    # Conserved quantities
    "mass",
    "momentum",
    "momentum_y",
    # Energetics
    "energy",
    "enstrophy",
    # Velocity fluctuations
    "V2",
    "u_diam",
    # e-quantity
    "q_max",
    # Density bounds
    "rho_min",
    "rho_max",
    # Spectral gap
    "lambda2",
    # Flatness
    "campanato",
    "flatten_plus",
    "flatten_minus",
    # Vacuum clock
    "eta",
    # Agents only
    "n_components",
]

# Columns the hydro schema promises in every diagnostics CSV
HYDRO_DIAGNOSTICS_COLUMNS = [
    "t",
    "mass",
    "momentum",
    "energy",
    "V2",
    "u_diam",
    "q_max",
    "rho_min",
    "rho_max",
    "lambda2",
    "campanato",
    "eta",
]

# Columns every swarm diagnostics CSV carries
AGENT_DIAGNOSTICS_COLUMNS = [
    "t",
    "mass",
    "momentum",
    "energy",
    "enstrophy",
    "V2",
    "u_diam",
    "n_components",
]
