from __future__ import annotations

import copy
import hashlib
import itertools
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import tomli_w

from topo_flock.config import (
    CONVENTIONS,
    DEFAULT_AGENT_DIM,
    DEFAULT_ALPHA,
    DEFAULT_CFL,
    DEFAULT_CONVENTION,
    DEFAULT_CUTOFF,
    DEFAULT_DERIVATIVE_METHOD,
    DEFAULT_FAMILY,
    DEFAULT_INITIAL_KIND,
    DEFAULT_LENGTH,
    DEFAULT_MAX_HALVINGS,
    DEFAULT_MODE,
    DEFAULT_N_AGENTS,
    DEFAULT_N_CELLS,
    DEFAULT_OUTPUT_DIR,
    DEFAULT_OUTPUT_EVERY,
    DEFAULT_QUADRATURE,
    DEFAULT_R0,
    DEFAULT_R_FLOOR,
    DEFAULT_RECONSTRUCTION,
    DEFAULT_RUN_NAME,
    DEFAULT_T_FINAL,
    DEFAULT_TAU,
    INITIAL_KINDS,
    MIN_CELLS,
    RUN_MODES,
)
from topo_flock.errors import ConfigInvalid
from topo_flock.fields.grid import Grid1D
from topo_flock.fields.initial import INITIAL_DEFAULTS, build_initial_data
from topo_flock.hydro.state import SolverSettings
from topo_flock.kernels.family import KernelSpec, kernel_problems

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = DEFAULT_INITIAL_KIND
    params: dict[str, Any] = field(default_factory=dict)
    e0_zero: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated experiment; build it with ``parse_config`` or ``config_from_mapping``."""

    name: str = DEFAULT_RUN_NAME
    mode: str = DEFAULT_MODE
    sweep_mode: str = DEFAULT_MODE
    seed: int = 0
    t_final: float = DEFAULT_T_FINAL
    n_cells: int = DEFAULT_N_CELLS
    length: float = DEFAULT_LENGTH
    n_agents: int = DEFAULT_N_AGENTS
    dim: int = DEFAULT_AGENT_DIM
    convention: str = DEFAULT_CONVENTION
    r_floor: float = DEFAULT_R_FLOOR
    max_halvings: int = DEFAULT_MAX_HALVINGS
    kernel: KernelSpec = field(default_factory=KernelSpec)
    initial: InitialDataSpec = field(default_factory=InitialDataSpec)
    cfl: float = DEFAULT_CFL
    reconstruction: str = DEFAULT_RECONSTRUCTION
    quadrature: str = DEFAULT_QUADRATURE
    derivative_method: str = DEFAULT_DERIVATIVE_METHOD
    drift_radius: float | None = None
    output_every: float = DEFAULT_OUTPUT_EVERY
    snapshot_every: float | None = None
    output_dir: str = DEFAULT_OUTPUT_DIR
    spectral_enabled: bool = True
    spectral_snapshot: str | None = None
    sweep: dict[str, list[Any]] = field(default_factory=dict)

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.n_cells, self.length)

    @property
    def settings(self) -> SolverSettings:
        return SolverSettings(
            self.cfl, self.reconstruction, self.quadrature, self.derivative_method, self.drift_radius
        )


# section -> key -> (field name, expected type)
_SCHEMA: dict[str, dict[str, tuple[str, type]]] = {
    "run": {
        "name": ("name", str),
        "mode": ("mode", str),
        "sweep_mode": ("sweep_mode", str),
        "seed": ("seed", int),
        "t_final": ("t_final", float),
    },
    "grid": {"n_cells": ("n_cells", int), "length": ("length", float)},
    "agents": {
        "n_agents": ("n_agents", int),
        "dim": ("dim", int),
        "convention": ("convention", str),
        "r_floor": ("r_floor", float),
        "max_halvings": ("max_halvings", int),
    },
    "kernel": {
        "family": ("family", str),
        "alpha": ("alpha", float),
        "tau": ("tau", float),
        "r0": ("r0", float),
        "cutoff": ("cutoff", str),
        "amplitude": ("amplitude", float),
    },
    "integrator": {"cfl": ("cfl", float), "reconstruction": ("reconstruction", str)},
    "operators": {
        "quadrature": ("quadrature", str),
        "derivative_method": ("derivative_method", str),
        "drift_radius": ("drift_radius", float),
    },
    "output": {
        "every": ("output_every", float),
        "snapshot_every": ("snapshot_every", float),
        "directory": ("output_dir", str),
    },
    "spectral": {"enabled": ("spectral_enabled", bool), "snapshot": ("spectral_snapshot", str)},
}
_INITIAL_KEYS = {"kind", "e0_zero"}
_SECTIONS = set(_SCHEMA) | {"initial", "sweep"}


def _coerce(value: Any, expected: type, where: str, problems: list[str]) -> Any:
    if expected is bool:
        if isinstance(value, bool):
            return value
    elif isinstance(value, bool):
        pass
    elif expected is int and isinstance(value, int):
        return value
    elif expected is float and isinstance(value, (int, float)):
        return float(value)
    elif expected is str and isinstance(value, str):
        return value
    problems.append(f"{where} must be of type {expected.__name__}, got {value!r}")
    return None


def _plain(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def _flatten_sweep(table: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in table.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten_sweep(value, f"{dotted}."))
        else:
            flat[dotted] = value
    return flat


def _sweep_problems(sweep: Mapping[str, Any]) -> list[str]:
    problems = []
    for key, values in sweep.items():
        section, _, name = key.partition(".")
        known = name in _SCHEMA.get(section, {}) or (section == "initial" and name != "")
        if not known:
            problems.append(f"sweep.{key} does not name a configuration key")
        if not isinstance(values, list) or not values:
            problems.append(f"sweep.{key} must be a non-empty list, got {values!r}")
    return problems


def config_from_mapping(data: Mapping[str, Any], default_name: str = DEFAULT_RUN_NAME) -> ExperimentConfig:
    """Validate a nested mapping (the parsed TOML document) into an ExperimentConfig.

    Every violation is collected and raised together as ConfigInvalid.
    """
    problems: list[str] = []
    values: dict[str, Any] = {"name": default_name}
    kernel_values: dict[str, Any] = {}

    for section in sorted(set(data) - _SECTIONS):
        problems.append(f"unknown section [{section}]")

    for section, keys in _SCHEMA.items():
        table = data.get(section, {})
        if not isinstance(table, Mapping):
            problems.append(f"[{section}] must be a table")
            continue
        for key in sorted(set(table) - set(keys)):
            problems.append(f"unknown key {section}.{key}")
        for key, (name, expected) in keys.items():
            if key in table:
                coerced = _coerce(table[key], expected, f"{section}.{key}", problems)
                if coerced is not None:
                    (kernel_values if section == "kernel" else values)[name] = coerced

    initial_table = data.get("initial", {})
    if not isinstance(initial_table, Mapping):
        problems.append("[initial] must be a table")
        initial_table = {}
    kind = initial_table.get("kind", DEFAULT_INITIAL_KIND)
    e0_zero = _coerce(initial_table.get("e0_zero", False), bool, "initial.e0_zero", problems)
    params = {key: _plain(value) for key, value in initial_table.items() if key not in _INITIAL_KEYS}
    if kind not in INITIAL_KINDS:
        problems.append(f"initial.kind must be one of {INITIAL_KINDS}, got {kind!r}")
    else:
        for key in sorted(set(params) - set(INITIAL_DEFAULTS[kind])):
            problems.append(f"initial.{key} is not a parameter of {kind}")

    sweep_table = data.get("sweep", {})
    sweep = _flatten_sweep(sweep_table) if isinstance(sweep_table, Mapping) else {}
    problems += _sweep_problems(sweep)
    sweep = {key: _plain(value) for key, value in sweep.items()}

    merged = {**_defaults(), **values}
    if merged["mode"] not in RUN_MODES:
        problems.append(f"run.mode must be one of {RUN_MODES}, got {merged['mode']!r}")
    if merged["sweep_mode"] not in RUN_MODES or merged["sweep_mode"] == "sweep":
        problems.append(f"run.sweep_mode must be a single-run mode, got {merged['sweep_mode']!r}")
    if merged["mode"] == "sweep" and not sweep:
        problems.append("run.mode = 'sweep' needs at least one [sweep] entry")
    if merged["mode"] != "sweep" and sweep:
        problems.append("[sweep] entries need run.mode = 'sweep'")
    if merged["seed"] < 0:
        problems.append(f"run.seed must be nonnegative, got {merged['seed']!r}")
    if merged["t_final"] < 0:
        problems.append(f"run.t_final must be nonnegative, got {merged['t_final']!r}")
    if merged["n_cells"] < MIN_CELLS:
        problems.append(f"grid.n_cells must be at least {MIN_CELLS}, got {merged['n_cells']!r}")
    if merged["length"] <= 0:
        problems.append(f"grid.length must be positive, got {merged['length']!r}")
    if merged["n_agents"] < 2:
        problems.append(f"agents.n_agents must be at least 2, got {merged['n_agents']!r}")
    if merged["dim"] not in (1, 2):
        problems.append(f"agents.dim must be 1 or 2, got {merged['dim']!r}")
    if merged["convention"] not in CONVENTIONS:
        problems.append(f"agents.convention must be one of {CONVENTIONS}, got {merged['convention']!r}")
    if merged["r_floor"] <= 0:
        problems.append(f"agents.r_floor must be positive, got {merged['r_floor']!r}")
    if merged["max_halvings"] < 0:
        problems.append(f"agents.max_halvings must be nonnegative, got {merged['max_halvings']!r}")
    if merged["output_every"] <= 0:
        problems.append(f"output.every must be positive, got {merged['output_every']!r}")
    if merged["snapshot_every"] is not None and merged["snapshot_every"] <= 0:
        problems.append(f"output.snapshot_every must be positive, got {merged['snapshot_every']!r}")
    if merged["drift_radius"] is not None and merged["drift_radius"] <= 0:
        problems.append(f"operators.drift_radius must be positive, got {merged['drift_radius']!r}")
    try:
        SolverSettings(merged["cfl"], merged["reconstruction"], merged["quadrature"], merged["derivative_method"])
    except ValueError as exc:
        problems += [f"settings: {message}" for message in str(exc).split("; ")]

    kernel_args = {
        "family": DEFAULT_FAMILY,
        "alpha": DEFAULT_ALPHA,
        "tau": DEFAULT_TAU,
        "r0": DEFAULT_R0,
        "cutoff": DEFAULT_CUTOFF,
        "amplitude": 1.0,
        **kernel_values,
    }
    length = merged["length"] if merged["length"] > 0 else None
    kernel_issues = kernel_problems(**kernel_args, length=length)
    problems += [f"kernel: {message}" for message in kernel_issues]

    radius = merged["drift_radius"]
    if radius is not None and radius > 0 and not kernel_issues and merged["n_cells"] >= MIN_CELLS and length:
        dx = length / merged["n_cells"]
        r0 = float(kernel_args["r0"])
        if not dx * (1.0 - 1e-12) <= radius <= r0 * (1.0 + 1e-12):
            problems.append(f"operators.drift_radius must lie in [dx, r0] = [{dx:.6g}, {r0:.6g}], got {radius!r}")
        elif abs(radius / dx - round(radius / dx)) > 1e-9:
            problems.append(f"operators.drift_radius must be a multiple of dx = {dx:.6g}, got {radius!r}")

    if kind in INITIAL_KINDS and merged["n_cells"] >= MIN_CELLS and length is not None:
        try:
            build_initial_data(kind, params, Grid1D(merged["n_cells"], merged["length"]))
        except ValueError as exc:
            problems.append(f"initial: {exc}")

    if problems:
        raise ConfigInvalid(problems)

    config = ExperimentConfig(
        **merged,
        kernel=KernelSpec(**kernel_args),
        initial=InitialDataSpec(kind, params, bool(e0_zero)),
        sweep=sweep,
    )
    if config.mode == "sweep":
        # children raise ConfigInvalid with their own messages
        expand_sweep(config)
    return config


def _defaults() -> dict[str, Any]:
    base = ExperimentConfig()
    return {
        name: getattr(base, name)
        for keys in _SCHEMA.values()
        for name, _ in keys.values()
        if name not in {"family", "alpha", "tau", "r0", "cutoff", "amplitude"}
    }


def parse_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a TOML experiment file; the run name defaults to the file stem."""
    path = Path(path)
    try:
        with path.open("rb") as handle:
            data = tomllib.load(handle)
    except OSError as exc:
        raise ConfigInvalid([f"cannot read {path}: {exc.strerror or exc}"]) from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid([f"{path}: {exc}"]) from exc
    config = config_from_mapping(data, default_name=path.stem)
    logger.debug("parsed %s as %s run %r", path, config.mode, config.name)
    return config


def config_to_mapping(config: ExperimentConfig) -> dict[str, Any]:
    """Nested mapping in the file layout; unset optional values are left out."""
    data: dict[str, Any] = {}
    for section, keys in _SCHEMA.items():
        source = config.kernel if section == "kernel" else config
        table = {key: getattr(source, name) for key, (name, _) in keys.items()}
        data[section] = {key: value for key, value in table.items() if value is not None}
    data["initial"] = {
        "kind": config.initial.kind,
        "e0_zero": config.initial.e0_zero,
        **copy.deepcopy(config.initial.params),
    }
    if config.sweep:
        data["sweep"] = copy.deepcopy(config.sweep)
    return data


def dump_config(config: ExperimentConfig) -> str:
    return tomli_w.dumps(config_to_mapping(config))


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical TOML rendering."""
    return hashlib.sha256(dump_config(config).encode("utf-8")).hexdigest()


def _label(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:g}"
    if isinstance(value, list):
        return "-".join(_label(item) for item in value)
    return str(value)


def expand_sweep(config: ExperimentConfig) -> list[ExperimentConfig]:
    """Cartesian product of the [sweep] lists, one child config per combination."""
    if not config.sweep:
        return [config]
    base = config_to_mapping(config)
    base.pop("sweep")
    base["run"]["mode"] = config.sweep_mode
    keys = list(config.sweep)
    children = []
    for combination in itertools.product(*(config.sweep[key] for key in keys)):
        child = copy.deepcopy(base)
        labels = []
        for key, value in zip(keys, combination):
            section, _, name = key.partition(".")
            child.setdefault(section, {})[name] = value
            labels.append(f"{name}={_label(value)}")
        child["run"]["name"] = f"{config.name}__{'_'.join(labels)}"
        children.append(config_from_mapping(child))
    logger.info("sweep %s expands to %d runs", config.name, len(children))
    return children
