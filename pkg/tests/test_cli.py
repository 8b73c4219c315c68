from __future__ import annotations

import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

import pandas as pd
import pytest

from topo_flock.cli import main as cli_main
from topo_flock.cli.experiment import (
    ExperimentConfig,
    config_from_mapping,
    config_hash,
    dump_config,
    expand_sweep,
    parse_config,
)
from topo_flock.cli.presets import get_preset_path, list_presets, load_preset
from topo_flock.cli.runner import RunManifest, run_experiment, spectral_report
from topo_flock.errors import ConfigInvalid
from topo_flock.metrics import PASS, bound_check

logger = logging.getLogger(__name__)

SPECTRAL_ONLY = """
[run]
mode = "spectral-only"

[grid]
n_cells = 64

[initial]
kind = "uniform"
rho_bar = 1.5
"""


def write_config(tmp_path: Path, text: str, name: str = "experiment") -> Path:
    path = tmp_path / f"{name}.toml"
    path.write_text(text, encoding="utf-8")
    return path


def test_minimal_file_takes_defaults_and_its_stem(tmp_path):
    config = parse_config(write_config(tmp_path, "[run]\nt_final = 1.0\n", "minimal"))
    defaults = ExperimentConfig()
    assert config.name == "minimal"
    assert config.mode == "hydro1d"
    assert config.t_final == 1.0
    assert config.n_cells == defaults.n_cells
    assert config.kernel == defaults.kernel


def test_integer_values_are_accepted_for_floats():
    config = config_from_mapping({"kernel": {"alpha": 1}, "run": {"t_final": 2}})
    assert config.kernel.alpha == 1.0
    assert isinstance(config.t_final, float)


def test_kernel_alpha_out_of_range_is_reported():
    with pytest.raises(ConfigInvalid) as info:
        config_from_mapping({"kernel": {"alpha": 2.5}})
    assert any(message.startswith("kernel: alpha must lie in (0,2)") for message in info.value.messages)


def test_every_problem_is_reported_at_once():
    data = {
        "grid": {"n_cells": 4, "cells": 10},
        "kernel": {"alpha": 2.5},
        "run": {"seed": -1, "t_final": "long"},
        "bogus": {},
    }
    with pytest.raises(ConfigInvalid) as info:
        config_from_mapping(data)
    messages = info.value.messages
    logger.info("collected problems: %s", messages)
    assert "unknown section [bogus]" in messages
    assert "unknown key grid.cells" in messages
    assert any(m.startswith("grid.n_cells must be at least") for m in messages)
    assert any(m.startswith("run.seed must be nonnegative") for m in messages)
    assert any(m.startswith("run.t_final must be of type float") for m in messages)
    assert any(m.startswith("kernel:") for m in messages)


def test_initial_data_parameters_are_checked():
    with pytest.raises(ConfigInvalid) as info:
        config_from_mapping({"initial": {"kind": "uniform", "a": 0.3}})
    assert "initial.a is not a parameter of uniform" in info.value.messages
    with pytest.raises(ConfigInvalid, match="initial:"):
        config_from_mapping({"initial": {"kind": "perturbed-sine", "a": 1.2}})


def test_sweep_entries_need_sweep_mode():
    with pytest.raises(ConfigInvalid, match="run.mode = 'sweep'"):
        config_from_mapping({"sweep": {"kernel": {"alpha": [0.5, 1.5]}}})
    with pytest.raises(ConfigInvalid, match="needs at least one"):
        config_from_mapping({"run": {"mode": "sweep"}})
    with pytest.raises(ConfigInvalid, match="does not name"):
        config_from_mapping({"run": {"mode": "sweep"}, "sweep": {"kernel": {"beta": [1.0]}}})


def test_drift_radius_is_checked_against_the_grid(tmp_path, capsys):
    dx = 2.0 * math.pi / 64
    config = config_from_mapping({"grid": {"n_cells": 64}, "operators": {"drift_radius": 4 * dx}})
    assert config.drift_radius == pytest.approx(4 * dx)
    with pytest.raises(ConfigInvalid, match=r"must lie in \[dx, r0\]"):
        config_from_mapping({"grid": {"n_cells": 64}, "operators": {"drift_radius": 2.0}})
    with pytest.raises(ConfigInvalid, match="must be a multiple of dx"):
        config_from_mapping({"grid": {"n_cells": 64}, "operators": {"drift_radius": 1.5 * dx}})
    path = write_config(tmp_path, "[operators]\ndrift_radius = 0.01\n", "tiny")
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path)]) == cli_main.EXIT_CONFIG
    assert "operators.drift_radius" in capsys.readouterr().err


def test_unreadable_files_are_config_errors(tmp_path):
    with pytest.raises(ConfigInvalid, match="cannot read"):
        parse_config(tmp_path / "missing.toml")
    with pytest.raises(ConfigInvalid):
        parse_config(write_config(tmp_path, "[run\nmode = 1\n", "broken"))


def test_kernel_sweep_expands_per_family():
    config = load_preset("kernel-compare")
    children = expand_sweep(config)
    assert [child.kernel.family for child in children] == ["topological", "geometric", "motsch-tadmor"]
    assert [child.name for child in children] == [
        "kernel-compare__family=topological",
        "kernel-compare__family=geometric",
        "kernel-compare__family=motsch-tadmor",
    ]
    assert all(child.mode == "hydro1d" and not child.sweep for child in children)


def test_sweep_takes_the_cartesian_product():
    config = config_from_mapping(
        {"run": {"mode": "sweep", "name": "grid"}, "sweep": {"kernel": {"alpha": [0.5, 1.5]}, "grid": {"n_cells": [32, 64]}}}
    )
    children = expand_sweep(config)
    assert len(children) == 4
    assert children[0].name == "grid__alpha=0.5_n_cells=32"
    assert {(c.kernel.alpha, c.n_cells) for c in children} == {(0.5, 32), (0.5, 64), (1.5, 32), (1.5, 64)}


@pytest.mark.parametrize("name", list_presets())
def test_presets_survive_a_dump_and_reparse(name, tmp_path):
    config = load_preset(name)
    text = dump_config(config)
    reparsed = parse_config(write_config(tmp_path, text, "copy"))
    assert reparsed.name == config.name
    assert config_hash(reparsed) == config_hash(config)
    assert tomllib.loads(text)["run"]["mode"] == config.mode


def test_shipped_presets():
    assert list_presets() == ["e0-flocking", "kernel-compare", "thm12-rootlog"]
    assert load_preset("e0-flocking").initial.e0_zero


@pytest.mark.parametrize("name", ["thm12-rootlog", "Thm12 Rootlog", "THM12_ROOTLOG"])
def test_preset_names_are_slugged(name):
    assert get_preset_path(name).name == "thm12-rootlog.toml"


def test_unknown_preset():
    assert get_preset_path("no-such-preset") is None
    with pytest.raises(ConfigInvalid, match="unknown preset"):
        load_preset("no-such-preset")


def test_config_hash_follows_the_content():
    base = config_from_mapping({})
    assert config_hash(base) == config_hash(config_from_mapping({}))
    assert config_hash(base) != config_hash(config_from_mapping({"kernel": {"tau": 0.5}}))


def test_spectral_report_on_a_uniform_density(tmp_path):
    config = parse_config(write_config(tmp_path, SPECTRAL_ONLY))
    frame, eigvec, checks = spectral_report(config)
    assert len(frame) == 1
    assert frame["lambda2"].iloc[0] > 0
    assert frame["lambda2"].iloc[0] == pytest.approx(frame["lambda2_circulant"].iloc[0], rel=1e-8)
    assert [(c.name, c.status) for c in checks] == [("circulant_match", PASS)]
    assert "eigvec2" in eigvec.columns


def test_spectral_run_writes_its_artifacts(tmp_path):
    config = parse_config(write_config(tmp_path, SPECTRAL_ONLY))
    manifest = run_experiment(config, tmp_path / "runs")
    run_dir = tmp_path / "runs" / "experiment"
    assert manifest.run_dir == run_dir
    assert not manifest.failed and not manifest.aborted
    for artifact in ("config.toml", "diagnostics.csv", "schema.md", "manifest.txt", "eigvec2.csv"):
        assert (run_dir / artifact).exists(), artifact
    text = (run_dir / "manifest.txt").read_text(encoding="utf-8")
    assert "termination: completed" in text
    assert "circulant_match: PASS" in text
    assert parse_config(run_dir / "config.toml").mode == "spectral-only"


@pytest.mark.parametrize("mode", ["hydro1d", "agents"])
def test_identical_configs_give_identical_diagnostics(tmp_path, mode):
    data = {
        "run": {"mode": mode, "t_final": 0.1, "seed": 11, "name": "repeat"},
        "grid": {"n_cells": 64},
        "agents": {"n_agents": 12},
        "output": {"every": 0.05},
        "spectral": {"enabled": False},
    }
    first = run_experiment(config_from_mapping(data), tmp_path / "a")
    second = run_experiment(config_from_mapping(data), tmp_path / "b")
    assert first.config_hash == second.config_hash
    assert (first.run_dir / "diagnostics.csv").read_bytes() == (second.run_dir / "diagnostics.csv").read_bytes()


def test_sweep_run_writes_a_summary(tmp_path):
    data = {
        "run": {"mode": "sweep", "sweep_mode": "spectral-only", "name": "alphas"},
        "grid": {"n_cells": 32},
        "initial": {"kind": "uniform"},
        "sweep": {"kernel": {"alpha": [0.6, 1.2]}},
    }
    manifest = run_experiment(config_from_mapping(data), tmp_path, workers=1)
    assert len(manifest.children) == 2
    summary = pd.read_csv(tmp_path / "alphas" / "sweep.csv")
    assert list(summary["run"]) == ["alphas__alpha=0.6", "alphas__alpha=1.2"]
    assert (tmp_path / "alphas" / "alphas__alpha=0.6" / "eigvec2.csv").exists()
    assert not manifest.failed


def test_main_runs_a_config(tmp_path, capsys):
    path = write_config(tmp_path, SPECTRAL_ONLY)
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path / "runs")]) == cli_main.EXIT_OK
    assert "termination: completed" in capsys.readouterr().out


def test_main_reports_config_errors(tmp_path, capsys):
    path = write_config(tmp_path, "[kernel]\nalpha = 2.5\n")
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path)]) == cli_main.EXIT_CONFIG
    assert "config error: kernel: alpha must lie in (0,2)" in capsys.readouterr().err
    assert cli_main.main(["--preset", "no-such-preset"]) == cli_main.EXIT_CONFIG
    assert cli_main.main(["--config", str(write_config(tmp_path, SPECTRAL_ONLY, "ok")), "--seed", "-3"]) == cli_main.EXIT_CONFIG


def test_main_exits_with_abort_on_a_stiff_pair(tmp_path):
    path = write_config(
        tmp_path,
        '[run]\nmode = "agents"\nt_final = 0.1\n\n[agents]\nn_agents = 32\nr_floor = 1.0\nmax_halvings = 0\n',
        "stiff",
    )
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path)]) == cli_main.EXIT_ABORT
    assert "stiff-pair" in (tmp_path / "stiff" / "manifest.txt").read_text(encoding="utf-8")


def test_strict_turns_failed_checks_into_an_exit_code(tmp_path, monkeypatch):
    def fake_run(config, out_dir, **kwargs):
        return RunManifest(
            name=config.name,
            mode=config.mode,
            version="v0",
            config_hash=config_hash(config),
            wall_time=0.0,
            termination="completed",
            checks=[bound_check("mass", 1.0, 0.0)],
            run_dir=Path(out_dir),
        )

    monkeypatch.setattr(cli_main, "run_experiment", fake_run)
    path = write_config(tmp_path, SPECTRAL_ONLY)
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path)]) == cli_main.EXIT_OK
    assert cli_main.main(["--config", str(path), "--out", str(tmp_path), "--strict"]) == cli_main.EXIT_ACCEPTANCE
