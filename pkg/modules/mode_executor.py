"""Mode executor with validate-only support."""

import logging
import time
from collections.abc import Callable, Mapping
from typing import Any

from pydantic import BaseModel

from models.experiment import ExperimentConfig, ModeResult
from modules.errors import ConfigError, NumericalGuardError
from modules.logger import SimulationLogger

logger = logging.getLogger(__name__)


class ModeExecutor:
    """
    Executes experiment modes with config checks and result serialization.

    Responsibilities:
    - Check the fields a mode requires before any computation
    - Handle validate-only runs
    - Track execution time
    - Serialize Pydantic models to dicts
    """

    def __init__(
        self,
        mode_functions: Mapping[str, Callable[..., ModeResult]],
        mode_definitions: Mapping[str, dict[str, Any]],
        validate_only: bool = False,
    ):
        """
        Initialize executor.

        Args:
            mode_functions: Mapping of mode name to run function
            mode_definitions: Mapping of mode name to MODE_DEFINITION
            validate_only: If True, check the config and skip the computation
        """
        self.mode_functions = mode_functions
        self.mode_definitions = mode_definitions
        self.validate_only = validate_only

    def check(self, config: ExperimentConfig) -> str:
        """
        Check that the config carries everything the mode needs.

        Returns:
            Mode name

        Raises:
            ConfigError: Unknown mode or missing required fields
        """
        mode_name = config.mode.value
        if mode_name not in self.mode_functions:
            raise ConfigError(f"Unknown mode: {mode_name}")
        required = self.mode_definitions[mode_name].get("required_fields", [])
        missing = [field for field in required if getattr(config, field, None) is None]
        if missing:
            raise ConfigError(f"Mode '{mode_name}' requires config fields: {missing}")
        return mode_name

    def execute(self, config: ExperimentConfig, workers: int = 1) -> tuple[ModeResult | dict, float]:
        """
        Run a mode and return its result with the execution time.

        Args:
            config: Validated experiment config
            workers: Worker processes for trajectory modes

        Returns:
            Tuple of (ModeResult, or a dict for validate-only runs, execution time in ms)

        Raises:
            ConfigError: If the config does not fit the mode
            NumericalGuardError: If a numerical guard fails during the run
        """
        mode_name = self.check(config)

        if self.validate_only:
            logger.info(f"VALIDATE-ONLY: config for '{mode_name}' is valid, skipping run")
            return {"valid": True, "mode": mode_name, "config": self._serialize_result(config)}, 0.0

        start_time = time.time()
        try:
            result = self.mode_functions[mode_name](config=config, workers=workers)
        except NumericalGuardError as e:
            logger.error(f"Mode '{mode_name}' stopped by a numerical guard: {e!s}")
            raise
        execution_time_ms = (time.time() - start_time) * 1000

        SimulationLogger.log_stage_usage(
            stage=mode_name,
            trajectories=result.n_total,
            steps=int(result.summary.get("steps", 0)),
            execution_time_ms=execution_time_ms,
        )
        logger.info(f"Mode '{mode_name}' executed in {execution_time_ms:.2f}ms")
        return result, execution_time_ms

    def _serialize_result(self, result: Any) -> dict | list | Any:
        """Serialize Pydantic models to JSON-compatible dicts."""
        if isinstance(result, BaseModel):
            return result.model_dump(mode="json")
        elif isinstance(result, list) and result and isinstance(result[0], BaseModel):
            return [item.model_dump(mode="json") for item in result]
        return result
