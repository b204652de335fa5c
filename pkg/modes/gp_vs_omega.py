#!/usr/bin/env python3
"""Mode: geometric-phase distributions along an Omega sweep."""

import math
from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import bin_centers, from_samples, probabilities
from modules.errors import ConfigError, SingularOverlap
from modules.experiment_utils import moments, sweep_points, total_steps
from modules.geometric_phase import gp_no_jump
from modules.logger import get_logger
from modules.model import eigensystem
from modules.worker_pool import parallel_ensemble

logger = get_logger(__name__)


class GpVsOmega(BaseMode):
    """One monitored ensemble per Omega/omega value."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "gp-vs-omega",
        "description": "Mean jump count, circular mean and variance of the GP distribution and "
        "the no-jump GP for each Omega/omega of the sweep, plus every histogram.",
        "required_fields": ["params", "sweep"],
        "tables": {
            "summary": [
                "omega_ratio",
                "mean_jumps",
                "mean_phase_rad",
                "circ_variance",
                "no_jump_gp_rad",
                "n_excluded",
            ],
            "histograms": ["omega_ratio", "bin_center_rad", "probability"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        if config.sweep.axis != "omega":
            raise ConfigError(f"gp-vs-omega sweeps Omega/omega, got axis '{config.sweep.axis}'")

        rows, histograms = [], []
        n_total = n_excluded = steps = 0
        jumps_weighted = 0.0
        for omega_ratio, p in sweep_points(config):
            duration = config.periods * p.period
            ensemble = parallel_ensemble(
                p, duration, eigensystem(p, 0.0).state_plus, workers=workers, chunk_size=config.chunk_size
            )
            h = from_samples(ensemble.gp, config.bins)
            try:
                no_jump = gp_no_jump(p, method="magnus", dt=config.analysis_dt)
            except SingularOverlap:
                no_jump = math.nan
            rows.append(
                {
                    "omega_ratio": omega_ratio,
                    "mean_jumps": ensemble.mean_jumps,
                    **moments(h),
                    "no_jump_gp_rad": no_jump,
                    "n_excluded": ensemble.n_excluded,
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
            n_excluded += ensemble.n_excluded
            jumps_weighted += ensemble.mean_jumps * len(ensemble)
            steps += total_steps(ensemble, duration)
            logger.info(
                f"Omega/omega={omega_ratio:.4g}: mean jumps {ensemble.mean_jumps:.3f}, "
                f"circular variance {rows[-1]['circ_variance']:.4f}"
            )

        return cls.result(
            tables={"summary": pd.DataFrame(rows), "histograms": pd.concat(histograms, ignore_index=True)},
            summary={"points": len(rows), "steps": steps},
            mean_jumps=jumps_weighted / n_total,
            n_total=n_total,
            n_excluded=n_excluded,
        )
