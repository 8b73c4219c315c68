from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from collections.abc import Sequence

from topo_flock.cli.experiment import ExperimentConfig, parse_config
from topo_flock.cli.presets import list_presets, load_preset
from topo_flock.cli.runner import run_experiment
from topo_flock.errors import ConfigInvalid
from topo_flock.log import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCEPTANCE = 3
EXIT_ABORT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topo-flock",
        description="Run hydrodynamic, agent-based or spectral alignment experiments and write CSV artifacts.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH", help="TOML experiment file")
    source.add_argument("--preset", metavar="NAME", help=f"shipped preset ({', '.join(list_presets())})")
    parser.add_argument("--strict", action="store_true", help="exit with code 3 when an acceptance check fails")
    parser.add_argument("--dump-operators", action="store_true", help="write operators.csv for the initial state")
    parser.add_argument("--out", metavar="DIR", default=None, help="output root (default: output.directory)")
    parser.add_argument("--seed", type=int, default=None, help="override run.seed")
    parser.add_argument("--workers", type=int, default=None, help="worker processes for sweeps")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return parser


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = parse_config(args.config) if args.config else load_preset(args.preset)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigInvalid([f"--seed must be nonnegative, got {args.seed}"])
        config = dataclasses.replace(config, seed=args.seed)
    return config


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)

    try:
        config = load_config(args)
    except ConfigInvalid as exc:
        for message in exc.messages:
            print(f"config error: {message}", file=sys.stderr)
        return EXIT_CONFIG

    manifest = run_experiment(
        config,
        args.out,
        dump_operators=args.dump_operators,
        progress=sys.stderr.isatty(),
        workers=args.workers,
    )
    print(manifest.to_text(), end="")
    print(f"artifacts: {manifest.run_dir}")

    if manifest.aborted:
        return EXIT_ABORT
    if args.strict and manifest.failed:
        logger.warning("acceptance checks failed for %s", manifest.name)
        return EXIT_ACCEPTANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
