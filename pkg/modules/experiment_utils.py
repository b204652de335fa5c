"""Helper functions shared by the experiment modes."""

import logging
import math
from collections.abc import Sequence
from typing import Any

import numpy as np
import pandas as pd

from models.experiment import ExperimentConfig
from models.histogram import CircularHistogram, Peak
from models.params import ModelParams
from models.trajectory import EnsembleResult
from modules.circular_stats import (
    background_flatness,
    bin_centers,
    circular_mean,
    circular_variance,
    probabilities,
)
from modules.errors import EmptyDistribution
from modules.lindblad import integrate, trace_distance
from modules.model import eigensystem
from modules.propagators import time_grid
from modules.trajectory_engine import resolve_time_step
from modules.worker_pool import parallel_ensemble

logger = logging.getLogger(__name__)

CHECKPOINTS = 10


def sweep_points(config: ExperimentConfig) -> list[tuple[float, ModelParams]]:
    """(axis value, parameters) for every value of the config's sweep."""
    sweep = config.sweep
    return [
        (value, config.params.to_model_params(**{sweep.field_name: value}))
        for value in sweep.values
    ]


def histogram_table(h: CircularHistogram) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "bin_center_rad": bin_centers(h),
            "count": np.asarray(h.counts, dtype=np.int64),
            "probability": probabilities(h),
        }
    )


def peaks_table(peaks: Sequence[Peak]) -> pd.DataFrame:
    return pd.DataFrame(
        {"center_rad": [peak.center for peak in peaks], "mass": [peak.mass for peak in peaks]},
        columns=["center_rad", "mass"],
    )


def moments(h: CircularHistogram) -> dict[str, float]:
    """Circular mean and variance, NaN when every sample was excluded."""
    try:
        return {"mean_phase_rad": circular_mean(h), "circ_variance": circular_variance(h)}
    except EmptyDistribution:
        logger.warning(f"all {h.n_total} samples excluded; moments undefined")
        return {"mean_phase_rad": math.nan, "circ_variance": math.nan}


def flatness(h: CircularHistogram, peaks: Sequence[Peak]) -> dict[str, float]:
    """Chi-square flatness of the off-peak background, NaN when nothing is left."""
    try:
        chi2, p_value = background_flatness(h, peaks)
    except EmptyDistribution:
        chi2, p_value = math.nan, math.nan
    return {"chi2": chi2, "p_value": p_value}


def describe_peaks(peaks: Sequence[Peak], limit: int = 5) -> list[dict[str, Any]]:
    return [peak.model_dump() for peak in peaks[:limit]]


def total_steps(ensemble: EnsembleResult, duration: float) -> int:
    return len(ensemble) * round(duration / ensemble.dt)


def unravelling_distances(
    p: ModelParams,
    duration: float,
    workers: int,
    chunk_size: int,
    sample_every: int = 1,
) -> tuple[pd.DataFrame, EnsembleResult]:
    """
    Trace distance between the trajectory average and the master equation.

    Both start from psi_plus(0) and share the step the trajectory engine settles on.
    Checkpoints are every ``sample_every`` steps when that is larger than one, else
    ten evenly spaced steps; the last step is always a checkpoint.

    Returns:
        (table with time and trace_distance per checkpoint, the ensemble)
    """
    initial = eigensystem(p, 0.0).state_plus
    p_run = resolve_time_step(p, initial)
    n_steps, dt = time_grid(duration, p_run.dt)
    p_run = p_run.replace(dt=dt)
    stride = sample_every if sample_every > 1 else max(1, n_steps // CHECKPOINTS)
    steps = sorted({*range(0, n_steps + 1, stride), n_steps})

    ensemble = parallel_ensemble(
        p_run, duration, initial, workers=workers, chunk_size=chunk_size, sample_steps=steps
    )
    path = integrate(np.outer(initial, initial.conj()), p_run, duration, sample_every=stride)

    times, distances = [], []
    for index, step in enumerate(steps):
        time = step * dt
        rho = path.rhos[path.sample_index(time)]
        times.append(time)
        distances.append(trace_distance(ensemble.sample_density(index), rho))
    table = pd.DataFrame({"time": times, "trace_distance": distances})
    table["bound"] = 3.0 / math.sqrt(len(ensemble))
    return table, ensemble
