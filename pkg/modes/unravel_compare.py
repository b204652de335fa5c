#!/usr/bin/env python3
"""Mode: direct against displaced (homodyne-like) unravelling."""

from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import bin_centers, find_peaks, from_samples, probabilities
from modules.errors import ConfigError
from modules.experiment_utils import flatness, total_steps, unravelling_distances
from modules.logger import get_logger
from modules.model import eigensystem
from modules.trajectory_engine import resolve_time_step

logger = get_logger(__name__)

UNRAVELLINGS = ("direct", "displaced")


class UnravelCompare(BaseMode):
    """Both unravellings reproduce the master equation; their GP statistics differ."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "unravel-compare",
        "description": "Runs the direct unravelling (lambda = 0) and the displaced one "
        "(lambda from params.lambda_ratio), compares both averaged states with the master "
        "equation and reports their GP histograms and the flatness of the off-peak background.",
        "required_fields": ["params"],
        "tables": {
            "trace_distance": ["time", "direct", "displaced", "bound"],
            "histograms": ["unravelling", "bin_center_rad", "probability"],
            "flatness": ["unravelling", "chi2", "p_value"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        if config.params.lambda_ratio <= 0:
            raise ConfigError("unravel-compare needs params.lambda_ratio > 0")
        specs = {
            "direct": config.params.to_model_params(lambda_ratio=0.0),
            "displaced": config.params.to_model_params(),
        }
        # One shared step keeps the checkpoint times of both runs identical.
        dt = min(resolve_time_step(p, eigensystem(p, 0.0).state_plus).dt for p in specs.values())
        specs = {name: p.replace(dt=dt) for name, p in specs.items()}

        distances, histograms, flat_rows = None, [], []
        n_total = n_excluded = steps = 0
        mean_jumps = {}
        for name in UNRAVELLINGS:
            p = specs[name]
            duration = config.periods * p.period
            table, ensemble = unravelling_distances(
                p, duration, workers, config.chunk_size, config.sample_every
            )
            if distances is None:
                distances = table.rename(columns={"trace_distance": name})
            else:
                distances[name] = table["trace_distance"].to_numpy()

            h = from_samples(ensemble.gp, config.bins)
            peaks = find_peaks(h, config.peak_prominence)
            flat_rows.append({"unravelling": name, **flatness(h, peaks)})
            histograms.append(
                pd.DataFrame(
                    {"unravelling": name, "bin_center_rad": bin_centers(h), "probability": probabilities(h)}
                )
            )
            mean_jumps[name] = ensemble.mean_jumps
            n_total += len(ensemble)
            n_excluded += ensemble.n_excluded
            steps += 2 * total_steps(ensemble, duration)
            logger.info(
                f"unravel-compare [{name}]: mean jumps {ensemble.mean_jumps:.3f}, "
                f"max trace distance {table['trace_distance'].max():.4f}"
            )

        return cls.result(
            tables={
                "trace_distance": distances,
                "histograms": pd.concat(histograms, ignore_index=True),
                "flatness": pd.DataFrame(flat_rows),
            },
            summary={"mean_jumps": mean_jumps, "steps": steps},
            n_total=n_total,
            n_excluded=n_excluded,
        )
