from __future__ import annotations

import logging
import os
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from topo_flock import __version__
from topo_flock.agents.run import run_swarm
from topo_flock.cli.experiment import ExperimentConfig, config_hash, dump_config, expand_sweep
from topo_flock.config import PROJECT_ROOT
from topo_flock.errors import TopoFlockError
from topo_flock.fields.initial import build_initial_data
from topo_flock.fields.io import fields_to_frame, read_fields_csv, write_frame_csv
from topo_flock.hydro.run import run as run_hydro
from topo_flock.metrics import AcceptanceCheck, any_failed, bound_check, render_schema_markdown, skipped
from topo_flock.spectral.gap import circulant_lambda2, lambda2

logger = logging.getLogger(__name__)

CIRCULANT_TOLERANCE = 1e-8
COMPLETED = "completed"


@dataclass
class RunManifest:
    name: str
    mode: str
    version: str
    config_hash: str
    wall_time: float
    termination: str
    checks: list[AcceptanceCheck]
    run_dir: Path
    info: dict[str, Any] = field(default_factory=dict)
    children: list[RunManifest] = field(default_factory=list)

    @property
    def failed(self) -> bool:
        return any_failed(self.checks) or any(child.failed for child in self.children)

    @property
    def aborted(self) -> bool:
        return self.termination != COMPLETED or any(child.aborted for child in self.children)

    def to_text(self) -> str:
        lines = [
            f"name: {self.name}",
            f"mode: {self.mode}",
            f"version: {self.version}",
            f"config_sha256: {self.config_hash}",
            f"wall_time_s: {self.wall_time:.3f}",
            f"termination: {self.termination}",
            "",
            "[checks]",
        ]
        lines += [f"{check.name}: {check.summary()}" for check in self.checks] or ["(none)"]
        if self.info:
            lines += ["", "[info]"]
            lines += [f"{key}: {_format_value(value)}" for key, value in self.info.items()]
        if self.children:
            lines += ["", "[children]"]
            lines += [
                f"{child.name}: {child.termination}; {'FAIL' if child.failed else 'ok'}"
                for child in self.children
            ]
        return "\n".join(lines) + "\n"


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


@lru_cache(maxsize=1)
def describe_version() -> str:
    """``git describe`` of the source tree, or the package version outside a checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--tags", "--always", "--dirty"],
            cwd=PROJECT_ROOT,
            capture_output=True,
            text=True,
            check=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return f"v{__version__}"
    return result.stdout.strip() or f"v{__version__}"


def _snapshot_name(prefix: str, t: float) -> str:
    return f"{prefix}_t{t:010.4f}.csv"


def _write_table(frame: pd.DataFrame, run_dir: Path) -> None:
    write_frame_csv(frame, run_dir / "diagnostics.csv")
    (run_dir / "schema.md").write_text(render_schema_markdown(frame.columns), encoding="utf-8")


def _run_hydro(config: ExperimentConfig, run_dir: Path, dump_operators: bool, progress: bool):
    result = run_hydro(config, dump_operators=dump_operators, progress=progress)
    _write_table(result.diagnostics, run_dir)
    for t, snapshot in result.snapshots.items():
        write_frame_csv(snapshot, run_dir / "snapshots" / _snapshot_name("fields", t))
    if result.operators is not None:
        write_frame_csv(result.operators, run_dir / "operators.csv")
    return result.termination, result.checks, result.info


def _run_agents(config: ExperimentConfig, run_dir: Path, progress: bool):
    result = run_swarm(config, progress=progress)
    _write_table(result.diagnostics, run_dir)
    for t, snapshot in result.snapshots.items():
        write_frame_csv(snapshot, run_dir / "snapshots" / _snapshot_name("swarm", t))
    return result.termination, result.checks, result.info


def spectral_report(config: ExperimentConfig) -> tuple[pd.DataFrame, pd.DataFrame, list[AcceptanceCheck]]:
    """Single-row lambda2 report for a stored snapshot (or the configured initial density)."""
    if config.spectral_snapshot:
        rho, u = read_fields_csv(Path(config.spectral_snapshot), config.length)
    else:
        rho, u = build_initial_data(config.initial.kind, config.initial.params, config.grid)
    report = lambda2(
        rho, config.kernel, quadrature=config.quadrature, derivative_method=config.derivative_method
    )
    row = {
        "t": 0.0,
        "n_cells": rho.grid.n_cells,
        "rho_min": rho.minimum,
        "rho_max": rho.maximum,
        "lambda1": report.lambda1,
        "lambda2": report.lambda2,
        "quotient_check": report.quotient_check,
    }
    checks: list[AcceptanceCheck] = []
    if np.ptp(rho.values) <= 1e-14 * rho.maximum:
        oracle = circulant_lambda2(
            rho.grid,
            config.kernel,
            float(rho.values.mean()),
            quadrature=config.quadrature,
            derivative_method=config.derivative_method,
        )
        row["lambda2_circulant"] = oracle
        mismatch = abs(report.lambda2 - oracle) / max(abs(oracle), np.finfo(float).tiny)
        checks.append(bound_check("circulant_match", mismatch, CIRCULANT_TOLERANCE))
    else:
        checks.append(skipped("circulant_match", "density is not uniform"))
    eigvec = fields_to_frame(rho, u, eigvec2=report.eigvec2)
    return pd.DataFrame([row]), eigvec, checks


def _run_spectral(config: ExperimentConfig, run_dir: Path):
    frame, eigvec, checks = spectral_report(config)
    _write_table(frame, run_dir)
    write_frame_csv(eigvec, run_dir / "eigvec2.csv")
    return COMPLETED, checks, {"lambda2": float(frame["lambda2"].iloc[0])}


def _run_child(args: tuple[ExperimentConfig, Path, bool]) -> RunManifest:
    config, out_dir, dump_operators = args
    return run_experiment(config, out_dir, dump_operators=dump_operators)


def _run_sweep(config: ExperimentConfig, run_dir: Path, dump_operators: bool, workers: int | None):
    children = expand_sweep(config)
    jobs = [(child, run_dir, dump_operators) for child in children]
    workers = workers or min(len(jobs), os.cpu_count() or 1)
    if workers <= 1:
        manifests = [_run_child(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            manifests = list(pool.map(_run_child, jobs))
    summary = pd.DataFrame(
        [
            {
                "run": manifest.name,
                "termination": manifest.termination,
                "failed_checks": ",".join(c.name for c in manifest.checks if c.failed),
                "wall_time_s": manifest.wall_time,
            }
            for manifest in manifests
        ]
    )
    write_frame_csv(summary, run_dir / "sweep.csv")
    return COMPLETED, [], {"children": len(manifests)}, manifests


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    *,
    dump_operators: bool = False,
    progress: bool = False,
    workers: int | None = None,
) -> RunManifest:
    """Run one configured experiment and write its artifacts under ``<out>/<name>/``.

    Module errors that end a run early are recorded as the termination reason,
    never raised.
    """
    run_dir = Path(out_dir or config.output_dir) / config.name
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.toml").write_text(dump_config(config), encoding="utf-8")
    logger.info("running %s (%s) into %s", config.name, config.mode, run_dir)

    started = time.perf_counter()
    children: list[RunManifest] = []
    try:
        if config.mode == "hydro1d":
            termination, checks, info = _run_hydro(config, run_dir, dump_operators, progress)
        elif config.mode == "agents":
            termination, checks, info = _run_agents(config, run_dir, progress)
        elif config.mode == "spectral-only":
            termination, checks, info = _run_spectral(config, run_dir)
        else:
            termination, checks, info, children = _run_sweep(config, run_dir, dump_operators, workers)
    except TopoFlockError as exc:
        logger.warning("run %s aborted: %s", config.name, exc)
        termination, checks, info = f"{type(exc).__name__}: {exc}", [], {}

    manifest = RunManifest(
        name=config.name,
        mode=config.mode,
        version=describe_version(),
        config_hash=config_hash(config),
        wall_time=time.perf_counter() - started,
        termination=termination,
        checks=checks,
        run_dir=run_dir,
        info=info,
        children=children,
    )
    (run_dir / "manifest.txt").write_text(manifest.to_text(), encoding="utf-8")
    for check in checks:
        logger.info("check %s: %s", check.name, check.summary())
    return manifest
