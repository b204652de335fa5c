#!/usr/bin/env python3
"""Mode: no-jump GP over an (Omega/omega, Gamma/omega) grid at fixed theta."""

import math
from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules.analytic import locate_singularity
from modules.errors import NoRootInWindow
from modules.logger import get_logger
from modules.topology import phase_map

logger = get_logger(__name__)


class PhaseDiagram(BaseMode):
    """Phase map plus, when a search window is given, the located singular point."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "phase-diagram",
        "description": "No-jump GP and normalized no-jump overlap on a grid of Omega/omega and "
        "Gamma/omega at the config's theta; with grid.omega_window and grid.gamma_window the "
        "point where the no-jump path ends orthogonal to its start is located.",
        "required_fields": ["params", "grid"],
        "tables": {
            "cells": ["omega_ratio", "gamma_ratio", "no_jump_gp_rad", "overlap", "singular"],
            "singularity": ["omega_ratio", "gamma_ratio"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        grid = config.grid
        theta = config.params.theta_pi * math.pi
        base = config.params.to_model_params()
        cells = phase_map(theta, grid.omega, grid.gamma, base=base, dt=config.analysis_dt)
        table = pd.DataFrame(
            [
                {
                    "omega_ratio": cell.omega_ratio,
                    "gamma_ratio": cell.gamma_ratio,
                    "no_jump_gp_rad": math.nan if cell.phase is None else cell.phase,
                    "overlap": cell.overlap,
                    "singular": cell.singular,
                }
                for cell in cells
            ]
        )
        tables = {"cells": table}
        summary: dict[str, Any] = {"cells": len(cells), "singular_cells": int(table["singular"].sum())}

        if grid.omega_window is not None and grid.gamma_window is not None:
            try:
                omega_ratio, gamma_ratio = locate_singularity(
                    theta, grid.omega_window, grid.gamma_window, base=base, dt=config.analysis_dt
                )
            except NoRootInWindow as e:
                logger.warning(f"phase-diagram: no singular point located: {e}")
                summary["singular_point"] = None
            else:
                tables["singularity"] = pd.DataFrame(
                    [{"omega_ratio": omega_ratio, "gamma_ratio": gamma_ratio}]
                )
                summary["singular_point"] = {"omega_ratio": omega_ratio, "gamma_ratio": gamma_ratio}
        return cls.result(tables=tables, summary=summary)
