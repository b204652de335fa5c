#!/usr/bin/env python3
"""Mode: winding number of the no-jump GP over an (Omega/omega, Gamma/omega) grid."""

import math
from typing import Any, ClassVar

import pandas as pd

from models.experiment import ExperimentConfig, ModeResult
from modes.base_mode import BaseMode
from modules import topology
from modules.logger import get_logger

logger = get_logger(__name__)


class SectorMap(BaseMode):
    """Topological sectors of the no-jump evolution."""

    MODE_DEFINITION: ClassVar[dict[str, Any]] = {
        "name": "sector-map",
        "description": "phi_0(pi)/2pi for every (Omega/omega, Gamma/omega) cell of the grid, "
        "the cells lying on a singular line, and the polar angle of minimal no-jump overlap.",
        "required_fields": ["params", "grid"],
        "tables": {
            "cells": ["omega_ratio", "gamma_ratio", "winding", "singular", "critical_theta_pi"],
        },
    }

    @classmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        grid = config.grid
        cells = topology.sector_map(
            grid.theta_grid(),
            grid.omega,
            grid.gamma,
            base=config.params.to_model_params(),
            dt=config.analysis_dt,
        )
        table = pd.DataFrame(
            {
                "omega_ratio": [cell.omega_ratio for cell in cells],
                "gamma_ratio": [cell.gamma_ratio for cell in cells],
                "winding": pd.array([cell.winding for cell in cells], dtype="Int64"),
                "singular": [cell.singular for cell in cells],
                "critical_theta_pi": [cell.critical_theta / math.pi for cell in cells],
            }
        )
        sectors = table["winding"].value_counts().to_dict()
        logger.info(f"sector-map: {len(cells)} cells, sectors {sectors}")
        return cls.result(
            tables={"cells": table},
            summary={
                "cells": len(cells),
                "singular_cells": int(table["singular"].sum()),
                "sectors": {str(k): int(v) for k, v in sectors.items()},
            },
        )
