#!/usr/bin/env python3
"""
Centralized logging for gp-trajectories runs.

Configures the root logger once (console at INFO, file at DEBUG) and tracks the
cost of every executed stage:
- Trajectories and time steps processed per stage
- Wall time per stage
- Summary statistics for throughput analysis

Usage:
    from modules.logger import SimulationLogger

    logger = SimulationLogger.get_logger(__name__)
    logger.info("Starting ensemble")

    SimulationLogger.log_stage_usage(
        stage="trajectories",
        trajectories=10000,
        steps=10000 * 200000,
        execution_time_ms=5400.0,
    )

    report = SimulationLogger.get_usage_summary()
"""

import json
import logging
import os
import sys
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, ClassVar

LOG_DIR_ENV = "GPTRAJ_LOG_DIR"


@dataclass
class StageUsageRecord:
    """Record of the work done by a single stage."""

    timestamp: str
    stage: str
    trajectories: int
    steps: int
    execution_time_ms: float | None = None
    steps_per_second: float | None = None

    def __post_init__(self):
        if self.execution_time_ms:
            self.steps_per_second = self.steps / (self.execution_time_ms / 1000)


class SimulationLogger:
    """
    Centralized logger for simulation runs.

    Provides a consistent logging interface and per-stage usage tracking.
    """

    _usage_records: ClassVar[list[StageUsageRecord]] = []
    _session_start: datetime = datetime.now()
    _loggers: ClassVar[dict[str, logging.Logger]] = {}
    _log_dir: ClassVar[Path | None] = None

    @classmethod
    def log_dir(cls) -> Path:
        """Directory for log files, from GPTRAJ_LOG_DIR (default logs/)."""
        if cls._log_dir is None:
            cls._log_dir = Path(os.getenv(LOG_DIR_ENV, "logs"))
        return cls._log_dir

    @classmethod
    def _stamp(cls) -> str:
        return cls._session_start.strftime("%Y%m%d_%H%M%S")

    @classmethod
    def log_file(cls) -> Path:
        return cls.log_dir() / f"simulation_{cls._stamp()}.log"

    @classmethod
    def usage_file(cls) -> Path:
        return cls.log_dir() / f"stages_{cls._stamp()}.json"

    @classmethod
    def _ensure_log_dir(cls):
        cls.log_dir().mkdir(parents=True, exist_ok=True)

    @classmethod
    def _configure_root_logger(cls):
        """Configure the root logger to capture all logs, including numpy/scipy warnings."""
        cls._ensure_log_dir()

        root_logger = logging.getLogger()
        root_logger.setLevel(logging.DEBUG)
        root_logger.handlers.clear()

        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s | %(name)-30s | %(levelname)-8s | %(message)s", datefmt="%H:%M:%S"
            )
        )

        file_handler = logging.FileHandler(cls.log_file())
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(
            logging.Formatter(
                "%(asctime)s | %(name)s | %(levelname)s | %(funcName)s:%(lineno)d | %(message)s",
                datefmt="%Y-%m-%d %H:%M:%S",
            )
        )

        root_logger.addHandler(console_handler)
        root_logger.addHandler(file_handler)
        logging.captureWarnings(True)

    @classmethod
    def get_logger(cls, name: str, level: int = logging.INFO) -> logging.Logger:
        """
        Get or create a logger with consistent formatting.

        Args:
            name: Logger name (typically __name__ from calling module)
            level: Logging level (default: INFO)

        Returns:
            Configured logger instance
        """
        if not cls._loggers:
            cls._configure_root_logger()

        if name in cls._loggers:
            return cls._loggers[name]

        logger = logging.getLogger(name)
        logger.setLevel(level)
        cls._loggers[name] = logger
        return logger

    @classmethod
    def log_stage_usage(
        cls,
        stage: str,
        trajectories: int,
        steps: int,
        execution_time_ms: float | None = None,
    ) -> StageUsageRecord:
        """
        Record the work done by one stage.

        Args:
            stage: Stage name (e.g., "trajectories", "lindblad", "theta_sweep")
            trajectories: Trajectories (or deterministic evolutions) processed
            steps: Total time steps across them
            execution_time_ms: Wall time in milliseconds

        Returns:
            The stored record
        """
        record = StageUsageRecord(
            timestamp=datetime.now().isoformat(),
            stage=stage,
            trajectories=trajectories,
            steps=steps,
            execution_time_ms=execution_time_ms,
        )
        cls._usage_records.append(record)
        cls._save_usage_records()

        timing = f", {execution_time_ms:.1f}ms" if execution_time_ms is not None else ""
        cls.get_logger("stage_tracker").info(
            f"[{stage}] trajectories={trajectories:,}, steps={steps:,}{timing}"
        )
        return record

    @classmethod
    def _save_usage_records(cls):
        cls._ensure_log_dir()
        records_dict = {
            "session_start": cls._session_start.isoformat(),
            "records": [asdict(r) for r in cls._usage_records],
        }
        with open(cls.usage_file(), "w") as f:
            json.dump(records_dict, f, indent=2)

    @classmethod
    def get_usage_summary(cls, detailed: bool = False) -> dict[str, Any]:
        """
        Summary statistics of the recorded stages.

        Args:
            detailed: Include the raw records

        Returns:
            Dictionary with totals and a per-stage breakdown, slowest stage first
        """
        if not cls._usage_records:
            return {"total_stages": 0, "total_steps": 0, "message": "No stage usage recorded yet"}

        stage_stats: dict[str, dict[str, Any]] = {}
        for record in cls._usage_records:
            stats = stage_stats.setdefault(
                record.stage,
                {"calls": 0, "trajectories": 0, "steps": 0, "execution_time_ms": []},
            )
            stats["calls"] += 1
            stats["trajectories"] += record.trajectories
            stats["steps"] += record.steps
            if record.execution_time_ms:
                stats["execution_time_ms"].append(record.execution_time_ms)

        for stats in stage_stats.values():
            times = stats.pop("execution_time_ms")
            stats["total_time_ms"] = sum(times)
            if times:
                stats["avg_execution_time_ms"] = sum(times) / len(times)
                stats["min_execution_time_ms"] = min(times)
                stats["max_execution_time_ms"] = max(times)
                stats["steps_per_second"] = stats["steps"] / (sum(times) / 1000)

        sorted_stages = sorted(
            stage_stats.items(), key=lambda x: x[1]["total_time_ms"], reverse=True
        )

        summary = {
            "session_start": cls._session_start.isoformat(),
            "session_duration": str(datetime.now() - cls._session_start),
            "total_stages": len(cls._usage_records),
            "total_trajectories": sum(r.trajectories for r in cls._usage_records),
            "total_steps": sum(r.steps for r in cls._usage_records),
            "stages": [{"stage": stage, **stats} for stage, stats in sorted_stages],
        }
        if detailed:
            summary["detailed_records"] = [asdict(r) for r in cls._usage_records]
        return summary

    @classmethod
    def print_usage_summary(cls):
        """Print a formatted usage summary to console."""
        summary = cls.get_usage_summary()
        if not summary["total_stages"]:
            return

        print("\n" + "=" * 80)
        print("STAGE USAGE SUMMARY")
        print("=" * 80)
        print(f"Session Start: {summary['session_start']}")
        print(f"Duration: {summary['session_duration']}")
        print(f"Trajectories: {summary['total_trajectories']:>14,}")
        print(f"Time steps:   {summary['total_steps']:>14,}")
        print(f"{'─' * 80}")
        print(f"{'Stage':<24} {'Calls':<8} {'Steps':<18} {'Time (ms)':<14} {'Steps/s':<14}")
        print(f"{'─' * 80}")
        for entry in summary["stages"]:
            rate = entry.get("steps_per_second", 0.0)
            print(
                f"{entry['stage']:<24} {entry['calls']:<8} {entry['steps']:<18,} "
                f"{entry['total_time_ms']:<14,.1f} {rate:<14,.0f}"
            )
        print("=" * 80)
        print("Log files saved to:")
        print(f"  Main log: {cls.log_file()}")
        print(f"  Stage log: {cls.usage_file()}")
        print("=" * 80 + "\n")

    @classmethod
    def reset(cls):
        """Reset all tracking data (useful for testing)."""
        cls._usage_records = []
        cls._session_start = datetime.now()
        cls._log_dir = None


def get_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """Get a logger instance (convenience wrapper)."""
    return SimulationLogger.get_logger(name, level)
