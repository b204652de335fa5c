#!/usr/bin/env python3
"""Mode: trajectory average against the master equation."""

from typing import Any, ClassVar

import numpy as np

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.circular_stats import from_samples
from modules.experiment_utils import total_steps, unravelling_distances
from modules.geometric_phase import reference_phases
from modules.lindblad import integrate
from modules.logger import get_logger
from modules.model import eigensystem

logger = get_logger(__name__)


class LindbladCheck(BaseMode):
    """Unravelling consistency of the direct jump unravelling."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "lindblad-check",
        "description": "Trace distance between the averaged trajectory projector and the RK4 "
        "solution of the master equation at checkpoints over the evolution, against the "
        "statistical bound 3/sqrt(n_traj). The manifest also carries the reference phases, "
        "including the mixed-state GP of the master-equation path.",
        "required_fields": ["params"],
        "tables": {"trace_distance": ["time", "trace_distance", "bound"]},
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        p = config.params.to_model_params()
        duration = config.periods * p.period
        table, ensemble = unravelling_distances(
            p, duration, workers, config.chunk_size, config.sample_every
        )
        worst = float(table["trace_distance"].max())
        bound = float(table["bound"].iloc[0])
        if worst > bound:
            logger.warning(f"lindblad-check: trace distance {worst:.4f} exceeds {bound:.4f}")
        else:
            logger.info(f"lindblad-check: max trace distance {worst:.4f} (bound {bound:.4f})")

        psi = eigensystem(p, 0.0).state_plus
        rho_path = integrate(np.outer(psi, psi.conj()), p, duration, dt=config.analysis_dt)
        references = reference_phases(
            p, histogram=from_samples(ensemble.gp, config.bins), rho_path=rho_path, dt=config.analysis_dt
        )
        return cls.result(
            tables={"trace_distance": table},
            summary={
                "max_trace_distance": worst,
                "within_bound": worst <= bound,
                "reference_phases": references.model_dump(),
                "steps": 2 * total_steps(ensemble, duration) + len(rho_path),
            },
            mean_jumps=ensemble.mean_jumps,
            n_total=len(ensemble),
            n_excluded=ensemble.n_excluded,
        )
