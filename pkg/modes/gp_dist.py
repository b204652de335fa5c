#!/usr/bin/env python3
"""Mode: distribution of trajectory geometric phases at one parameter point."""

from typing import Any, ClassVar

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import find_peaks, from_samples
from modules.experiment_utils import (
    describe_peaks,
    histogram_table,
    moments,
    peaks_table,
    total_steps,
)
from modules.geometric_phase import reference_phases
from modules.logger import get_logger
from modules.model import eigensystem
from modules.worker_pool import parallel_ensemble

logger = get_logger(__name__)


class GpDist(BaseMode):
    """Monitored trajectories over one or more periods from psi_plus(0)."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "gp-dist",
        "description": "Histogram of the geometric phase over n_traj monitored trajectories, "
        "with its peaks, circular moments, mean jump count and the reference phases "
        "(Berry, unitary, no-jump, approximate no-jump, average).",
        "required_fields": ["params"],
        "tables": {
            "histogram": ["bin_center_rad", "count", "probability"],
            "peaks": ["center_rad", "mass"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        p = config.params.to_model_params()
        duration = config.periods * p.period
        logger.info(
            f"gp-dist: {p.n_traj} trajectories over {config.periods:g} period(s), "
            f"Omega={p.Omega:.4g}, Gamma={p.Gamma:.4g}, theta={p.theta:.4f}"
        )
        ensemble = parallel_ensemble(
            p, duration, eigensystem(p, 0.0).state_plus, workers=workers, chunk_size=config.chunk_size
        )
        h = from_samples(ensemble.gp, config.bins)
        peaks = find_peaks(h, config.peak_prominence)
        references = reference_phases(p, histogram=h, dt=config.analysis_dt)

        logger.info(
            f"gp-dist: mean jumps {ensemble.mean_jumps:.3f}, "
            f"{ensemble.n_excluded} of {len(ensemble)} excluded, {len(peaks)} peaks"
        )
        return cls.result(
            tables={"histogram": histogram_table(h), "peaks": peaks_table(peaks)},
            summary={
                **moments(h),
                "reference_phases": references.model_dump(),
                "peaks": describe_peaks(peaks),
                "steps": total_steps(ensemble, duration),
            },
            mean_jumps=ensemble.mean_jumps,
            n_total=len(ensemble),
            n_excluded=ensemble.n_excluded,
        )
