#!/usr/bin/env python3
"""Mode: distribution of the monitored spin-echo phase."""

from collections import Counter
from typing import Any, ClassVar

import pandas as pd

from models.echo import EchoCategory
from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import find_peaks, from_samples
from modules.echo import (
    ECHO_HIGH,
    ECHO_LOW,
    adiabatic_echo_persistence,
    no_jump_echo,
    varphi_from_persistence,
)
from modules.experiment_utils import (
    describe_peaks,
    histogram_table,
    moments,
    peaks_table,
)
from modules.logger import get_logger
from modules.propagators import time_grid
from modules.worker_pool import parallel_echo

logger = get_logger(__name__)


def taxonomy_table(categories: list[EchoCategory]) -> pd.DataFrame:
    counts = Counter(categories)
    total = max(len(categories), 1)
    return pd.DataFrame(
        [
            {"category": category.value, "count": counts[category], "fraction": counts[category] / total}
            for category in EchoCategory
        ]
    )


class EchoDist(BaseMode):
    """Monitored echo realizations over [0, 2T]."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "echo-dist",
        "description": "Histogram of the echo parameter varphi on [1.25pi, 1.5pi] over n_traj "
        "monitored echo realizations, its peaks, and the split of realizations into "
        "no-jump, decay, dephasing and mixed jump records.",
        "required_fields": ["params"],
        "tables": {
            "histogram": ["bin_center_rad", "count", "probability"],
            "peaks": ["center_rad", "mass"],
            "taxonomy": ["category", "count", "fraction"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        p = config.params.to_model_params()
        logger.info(f"echo-dist: {p.n_traj} realizations, Omega={p.Omega:.4g}, Gamma={p.Gamma:.4g}")
        ensemble = parallel_echo(p, workers=workers, chunk_size=config.chunk_size)
        h = from_samples(ensemble.varphi, config.bins, ECHO_LOW, ECHO_HIGH)
        peaks = find_peaks(h, config.peak_prominence)
        no_jump = no_jump_echo(p, dt=config.analysis_dt)
        n_steps, _ = time_grid(p.period, p.dt)

        return cls.result(
            tables={
                "histogram": histogram_table(h),
                "peaks": peaks_table(peaks),
                "taxonomy": taxonomy_table(ensemble.categories),
            },
            summary={
                **moments(h),
                "no_jump_varphi_rad": no_jump.varphi,
                "adiabatic_varphi_rad": varphi_from_persistence(adiabatic_echo_persistence(p.theta)),
                "peaks": describe_peaks(peaks),
                "steps": 2 * n_steps * len(ensemble),
            },
            mean_jumps=ensemble.mean_jumps,
            n_total=len(ensemble),
        )
