#!/usr/bin/env python3
"""
Geometric phases of monitored, driven, dissipative two-level systems.

Runs one experiment mode from a JSON config and/or command-line flags and writes
a JSON manifest plus result tables to the output directory.

Exit codes: 0 success, 2 invalid configuration, 3 numerical guard failure.
"""

import argparse
import json
import sys
import time
from datetime import datetime
from pathlib import Path
from typing import Any

from dotenv import load_dotenv
from pydantic import ValidationError

from experiment_modes import MODE_DEFINITIONS, MODE_FUNCTIONS
from models.experiment import ExperimentConfig, ModeResult
from modules.artifact_writer import write_artifacts
from modules.errors import ConfigError, NumericalGuardError
from modules.logger import SimulationLogger
from modules.mode_executor import ModeExecutor
from modules.worker_pool import default_workers

load_dotenv()

logger = SimulationLogger.get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# CLI flag -> ParameterSpec field
PARAM_FLAGS = {
    "omega_ratio": "omega_ratio",
    "gamma_ratio": "gamma_ratio",
    "theta_pi_units": "theta_pi",
    "gz_ratio": "gz_ratio",
    "lambda_ratio": "lambda_ratio",
    "ntraj": "n_traj",
    "dt": "dt",
    "seed": "seed",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Monte Carlo trajectories, spin echo and no-jump topology of a driven, "
        "dissipative two-level system"
    )
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--mode", choices=sorted(MODE_FUNCTIONS), help="Experiment mode")
    parser.add_argument("--seed", type=int, help="Root seed of the keyed RNG")
    parser.add_argument(
        "--workers", type=int, help="Worker processes (default: GPTRAJ_WORKERS or 1)"
    )
    parser.add_argument("--out", type=Path, help="Output directory")
    parser.add_argument("--omega-ratio", type=float, help="Omega / omega")
    parser.add_argument("--gamma-ratio", type=float, help="Gamma / omega")
    parser.add_argument("--theta-pi-units", type=float, help="Polar angle in units of pi")
    parser.add_argument("--gz-ratio", type=float, help="gamma_z / Gamma")
    parser.add_argument("--lambda-ratio", type=float, help="Homodyne displacement / omega")
    parser.add_argument("--ntraj", type=int, help="Number of trajectories")
    parser.add_argument("--dt", type=float, help="Time step (1/omega)")
    parser.add_argument(
        "--validate-only",
        action="store_true",
        help="Check the configuration and exit without computing",
    )
    return parser


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """
    Merge the config file with command-line overrides.

    Raises:
        ConfigError: If the config file cannot be read or parsed
        ValidationError: If the merged config is invalid
    """
    raw: dict[str, Any] = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError(f"config {args.config} must hold a JSON object")

    if args.mode is not None:
        raw["mode"] = args.mode
    params = dict(raw.get("params") or {})
    for flag, field in PARAM_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            params[field] = value
    raw["params"] = params
    if args.out is not None:
        raw["output"] = {**(raw.get("output") or {}), "directory": str(args.out)}

    return ExperimentConfig.model_validate(raw)


def run(config: ExperimentConfig, workers: int, validate_only: bool = False) -> ModeResult | dict:
    """
    Execute a mode and write its artifacts.

    Returns:
        The mode result (or the validation report for validate-only runs)
    """
    executor = ModeExecutor(MODE_FUNCTIONS, MODE_DEFINITIONS, validate_only=validate_only)
    started_at = datetime.now()
    start = time.time()
    result, _ = executor.execute(config, workers=workers)
    if validate_only:
        return result

    manifest = write_artifacts(config, result, started_at, time.time() - start, workers)
    logger.info(
        f"{config.mode.value} finished in {manifest.wall_time_s:.1f}s; "
        f"manifest {manifest.provenance_hash[:12]} in {config.output.directory}"
    )
    return result


def main(argv: list[str] | None = None) -> int:
    """
    Main function of the gp-trajectories command line.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)

    try:
        config = build_config(args)
        workers = args.workers if args.workers is not None else default_workers()
        if workers < 1:
            raise ConfigError(f"--workers must be >= 1, got {workers}")
    except (ValidationError, ConfigError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    mode_msg = " (VALIDATE-ONLY)" if args.validate_only else ""
    logger.info(f"Starting {config.mode.value} with {workers} worker(s){mode_msg}...")

    try:
        run(config, workers, validate_only=args.validate_only)
    except ConfigError as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e}")
        return EXIT_CONFIG
    except NumericalGuardError as e:
        logger.error(f"Numerical guard failed: {e}")
        return EXIT_NUMERICAL

    SimulationLogger.print_usage_summary()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
