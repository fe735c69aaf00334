#!/usr/bin/env python3
"""
coalspec - command line entry point

    python src/main.py run    --config config/presets/dynamic_population.yaml [--out DIR] [--seeds 0-9]
    python src/main.py sweep  --config config/presets/channel_sweep.yaml
    python src/main.py verify [--quick] [--mutate externality-sign]

Exit codes: 0 success, 1 runtime or property failure, 2 invalid configuration.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from artifacts import ArtifactError, ArtifactWriter
from bargaining import BargainingError
from coalition import CoalitionError
from config_loader import ConfigError, ExperimentConfig, load_config
from detection import DetectionError
from experiments import run_columns, run_experiment, run_sweep, write_artifacts
from hedonic import FormationError
from mobility import MobilityError
from network_model import ScenarioError
from sim import SimulationError
from utils import parse_seed_list, setup_logging
from verify import MUTATIONS, run_verify


logger = logging.getLogger("coalspec")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

RUNTIME_ERRORS = (
    ScenarioError,
    DetectionError,
    CoalitionError,
    BargainingError,
    FormationError,
    MobilityError,
    SimulationError,
    ArtifactError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coalspec",
        description="Two-layer coalitional spectrum sensing and access simulator",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    for name, help_text in (
        ("run", "simulate every seed of an experiment"),
        ("sweep", "run the sweep named in the config"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--config", type=Path, default=None, help="experiment YAML (default config/config.yaml)")
        sub.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
        sub.add_argument("--seeds", default=None, help="seed list such as 0,1,5-9 (overrides the config)")

    verify = commands.add_parser("verify", help="run the property suite")
    verify.add_argument("--quick", action="store_true", help="reduced draw counts")
    verify.add_argument("--mutate", choices=sorted(MUTATIONS), default=None, help="inject a known fault")
    return parser


def _load(args: argparse.Namespace) -> ExperimentConfig:
    config = load_config(args.config)
    seeds = None
    if args.seeds is not None:
        try:
            seeds = parse_seed_list(args.seeds)
        except ValueError as e:
            raise ConfigError(f"--seeds: {e}") from e
    if seeds is not None or args.out is not None:
        config = config.with_overrides(seeds=seeds, output_dir=args.out)
    return config


def cmd_run(config: ExperimentConfig) -> int:
    writer = ArtifactWriter(config.output_dir)
    result = run_experiment(config)
    files = write_artifacts(config, result, run_columns(), writer)
    for path in files:
        logger.info(f"✓ Wrote {path}")
    return EXIT_OK


def cmd_sweep(config: ExperimentConfig) -> int:
    writer = ArtifactWriter(config.output_dir)
    result, columns = run_sweep(config)
    files = write_artifacts(config, result, columns, writer)
    for path in files:
        logger.info(f"✓ Wrote {path}")
    return EXIT_OK


def cmd_verify(quick: bool = False, mutate: Optional[str] = None) -> int:
    report = run_verify(quick=quick, mutate=mutate)
    print(report.table())
    if report.passed:
        print("✅ All properties hold")
        return EXIT_OK
    print(f"❌ {len(report.failures())} propert{'y' if len(report.failures()) == 1 else 'ies'} failed")
    print(report.counterexamples_json())
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    args = build_parser().parse_args(argv)

    if args.command == "verify":
        setup_logging()
        return cmd_verify(quick=args.quick, mutate=args.mutate)

    try:
        config = _load(args)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG

    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        print(f"❌ Output directory {config.output_dir} is not writable: {e}")
        return EXIT_CONFIG
    setup_logging(log_file=config.output_dir / "coalspec.log")

    logger.info("=" * 60)
    logger.info(f"coalspec {args.command}: {config.name} (seeds {config.seeds})")
    logger.info("=" * 60)

    try:
        if args.command == "run":
            return cmd_run(config)
        return cmd_sweep(config)
    except ConfigError as e:
        print(f"❌ Configuration error: {e}")
        return EXIT_CONFIG
    except RUNTIME_ERRORS as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
