#!/usr/bin/env python3
"""Mode: monitored echo along an Omega sweep."""

from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import bin_centers, from_samples, probabilities
from modules.echo import ECHO_HIGH, ECHO_LOW, no_jump_echo
from modules.errors import ConfigError
from modules.experiment_utils import moments, sweep_points
from modules.logger import get_logger
from modules.propagators import time_grid
from modules.worker_pool import parallel_echo

logger = get_logger(__name__)


class EchoVsOmega(BaseMode):
    """One echo ensemble per Omega/omega value."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "echo-vs-omega",
        "description": "Mean jump count, circular mean and variance of varphi and the no-jump "
        "echo varphi for each Omega/omega of the sweep, plus every histogram.",
        "required_fields": ["params", "sweep"],
        "tables": {
            "summary": [
                "omega_ratio",
                "mean_jumps",
                "mean_varphi_rad",
                "circ_variance",
                "no_jump_varphi_rad",
            ],
            "histograms": ["omega_ratio", "bin_center_rad", "probability"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        if config.sweep.axis != "omega":
            raise ConfigError(f"echo-vs-omega sweeps Omega/omega, got axis '{config.sweep.axis}'")

        rows, histograms = [], []
        n_total = steps = 0
        jumps_weighted = 0.0
        for omega_ratio, p in sweep_points(config):
            ensemble = parallel_echo(p, workers=workers, chunk_size=config.chunk_size)
            h = from_samples(ensemble.varphi, config.bins, ECHO_LOW, ECHO_HIGH)
            stats = moments(h)
            rows.append(
                {
                    "omega_ratio": omega_ratio,
                    "mean_jumps": ensemble.mean_jumps,
                    "mean_varphi_rad": stats["mean_phase_rad"],
                    "circ_variance": stats["circ_variance"],
                    "no_jump_varphi_rad": no_jump_echo(p, dt=config.analysis_dt).varphi,
                }
            )
            histograms.append(
                pd.DataFrame(
                    {
                        "omega_ratio": omega_ratio,
                        "bin_center_rad": bin_centers(h),
                        "probability": probabilities(h),
                    }
                )
            )
            n_total += len(ensemble)
            jumps_weighted += ensemble.mean_jumps * len(ensemble)
            steps += 2 * time_grid(p.period, p.dt)[0] * len(ensemble)
            logger.info(f"Omega/omega={omega_ratio:.4g}: mean jumps {ensemble.mean_jumps:.3f}")

        return cls.result(
            tables={"summary": pd.DataFrame(rows), "histograms": pd.concat(histograms, ignore_index=True)},
            summary={"points": len(rows), "steps": steps},
            mean_jumps=jumps_weighted / n_total,
            n_total=n_total,
        )
