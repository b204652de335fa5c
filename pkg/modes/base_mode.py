#!/usr/bin/env python3
"""Base class for experiment modes."""

import sys
from abc import ABC, abstractmethod
from typing import Any, ClassVar

from models.experiment import ExperimentConfig, ExperimentMode, ModeResult


class BaseMode(ABC):
    """Abstract base class for experiment modes."""

    MODE_DEFINITION: ClassVar[dict[str, Any]]

    def __init_subclass__(cls, **kwargs):
        """Validate that subclasses define MODE_DEFINITION and auto-export to module."""
        super().__init_subclass__(**kwargs)

        if "MODE_DEFINITION" not in cls.__dict__:
            raise TypeError(f"Mode '{cls.__name__}' must define MODE_DEFINITION")

        mode_def = cls.MODE_DEFINITION
        if not isinstance(mode_def, dict):
            raise TypeError(f"MODE_DEFINITION in '{cls.__name__}' must be a dictionary")

        required_keys = ["name", "description", "required_fields", "tables"]
        missing_keys = [key for key in required_keys if key not in mode_def]
        if missing_keys:
            raise ValueError(
                f"MODE_DEFINITION in '{cls.__name__}' is missing required keys: {missing_keys}"
            )
        ExperimentMode(mode_def["name"])

        # Export MODE_DEFINITION and a snake_case run function to the module namespace
        module = sys.modules[cls.__module__]
        module.MODE_DEFINITION = cls.MODE_DEFINITION
        setattr(module, mode_def["name"].replace("-", "_"), cls.run)

    @classmethod
    def result(cls, **fields: Any) -> ModeResult:
        """Build a ModeResult whose tables carry exactly the declared columns, in order."""
        tables = fields.pop("tables", {})
        declared = cls.MODE_DEFINITION["tables"]
        unknown = set(tables) - set(declared)
        if unknown:
            raise ValueError(f"Mode '{cls.MODE_DEFINITION['name']}' produced undeclared tables {unknown}")
        ordered = {name: table[declared[name]] for name, table in tables.items()}
        return ModeResult(mode=ExperimentMode(cls.MODE_DEFINITION["name"]), tables=ordered, **fields)

    @classmethod
    @abstractmethod
    def run(cls, config: ExperimentConfig, workers: int = 1) -> ModeResult:
        """Execute the mode for a validated config."""
        raise NotImplementedError(f"Mode '{cls.__name__}' must implement run() method")
