from __future__ import annotations

from topo_flock.cli.experiment import (
    ExperimentConfig,
    InitialDataSpec,
    config_from_mapping,
    config_hash,
    config_to_mapping,
    dump_config,
    expand_sweep,
    parse_config,
)
from topo_flock.cli.presets import get_preset_path, list_presets, load_preset
from topo_flock.cli.runner import RunManifest, describe_version, run_experiment, spectral_report

__all__ = [
    "ExperimentConfig",
    "InitialDataSpec",
    "RunManifest",
    "config_from_mapping",
    "config_hash",
    "config_to_mapping",
    "describe_version",
    "dump_config",
    "expand_sweep",
    "get_preset_path",
    "list_presets",
    "load_preset",
    "parse_config",
    "run_experiment",
    "spectral_report",
]
