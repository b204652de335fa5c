#!/usr/bin/env python3
"""Mode: deterministic no-jump quantities along a one-parameter sweep."""

import math
from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.analytic import gp_no_jump_approx
from modules.echo import no_jump_echo
from modules.errors import SingularOverlap
from modules.experiment_utils import sweep_points
from modules.geometric_phase import gp_pancharatnam, no_jump_path
from modules.logger import get_logger

logger = get_logger(__name__)


class NoJumpGp(BaseMode):
    """Numerical and approximate no-jump GP, survival and no-jump echo per sweep value."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "no-jump-gp",
        "description": "No-jump GP (fourth-order Magnus), its small-rate closed form, the "
        "one-period survival probability and the no-jump echo varphi along a sweep of "
        "Omega/omega, Gamma/omega or theta/pi.",
        "required_fields": ["params", "sweep"],
        "tables": {
            "sweep": [
                "axis",
                "value",
                "no_jump_gp_rad",
                "approx_gp_rad",
                "survival",
                "no_jump_echo_varphi_rad",
            ],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        rows = []
        steps = 0
        for value, p in sweep_points(config):
            path = no_jump_path(p, method="magnus", dt=config.analysis_dt)
            try:
                gp = gp_pancharatnam(path.states)
            except SingularOverlap as e:
                logger.warning(f"{config.sweep.axis}={value:.6g}: no-jump GP undefined ({e})")
                gp = math.nan
            rows.append(
                {
                    "axis": config.sweep.axis,
                    "value": value,
                    "no_jump_gp_rad": gp,
                    "approx_gp_rad": gp_no_jump_approx(p),
                    "survival": path.survival_probability,
                    "no_jump_echo_varphi_rad": no_jump_echo(p, dt=config.analysis_dt).varphi,
                }
            )
            steps += 3 * path.n_steps
        logger.info(f"no-jump-gp: {len(rows)} points along {config.sweep.axis}")
        return cls.result(tables={"sweep": pd.DataFrame(rows)}, summary={"points": len(rows), "steps": steps})
