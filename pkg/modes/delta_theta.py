#!/usr/bin/env python3
"""Mode: difference of the unwrapped no-jump GP of two parameter points."""

import math
from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules import topology
from modules.logger import get_logger

logger = get_logger(__name__)


class DeltaTheta(BaseMode):
    """(phi_0 of params - phi_0 of compare) / 2pi over theta."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "delta-theta",
        "description": "Unwrapped no-jump GP of params minus that of compare, in units of 2pi, "
        "on the union of both adaptive theta grids. Points on either side of a singular "
        "point differ by an integer at theta = pi.",
        "required_fields": ["params", "compare"],
        "tables": {"delta": ["theta_pi", "delta"]},
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        p1 = config.params.to_model_params()
        p2 = config.compare.to_model_params()
        sweep = topology.delta_theta(p1, p2, dt=config.analysis_dt)
        table = pd.DataFrame(
            {"theta_pi": [theta / math.pi for theta in sweep.thetas], "delta": sweep.delta}
        )
        logger.info(f"delta-theta: {len(table)} angles, delta(pi) = {sweep.delta[-1]:.4f}")
        return cls.result(
            tables={"delta": table},
            summary={"delta_at_pi": sweep.delta[-1], "points": len(table)},
        )
