"""Experiment configuration, mode results and run manifests."""

import math
from enum import Enum
from pathlib import Path
from typing import Any, Literal

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from models.histogram import DEFAULT_BINS
from models.params import DEFAULT_DT, DEPHASING_RATIO, ModelParams


class ExperimentMode(str, Enum):
    """The experiments the command line can run."""

    GP_DIST = "gp-dist"
    GP_VS_OMEGA = "gp-vs-omega"
    ECHO_DIST = "echo-dist"
    ECHO_VS_OMEGA = "echo-vs-omega"
    NO_JUMP_GP = "no-jump-gp"
    PHASE_DIAGRAM = "phase-diagram"
    SECTOR_MAP = "sector-map"
    DELTA_THETA = "delta-theta"
    LINDBLAD_CHECK = "lindblad-check"
    UNRAVEL_COMPARE = "unravel-compare"


class ParameterSpec(BaseModel):
    """Physical parameters as ratios to the field amplitude omega."""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "omega_ratio": 5e-3,
                "gamma_ratio": 1e-3,
                "theta_pi": 0.34,
                "gz_ratio": 0.0,
                "lambda_ratio": 0.0,
                "n_traj": 10000,
                "seed": 1234,
            }
        },
    )

    omega_ratio: float = Field(gt=0, description="Omega / omega")
    gamma_ratio: float = Field(default=0.0, ge=0, description="Gamma / omega")
    theta_pi: float = Field(ge=0, le=1, description="Polar angle in units of pi")
    gz_ratio: float = Field(default=0.0, ge=0, description="gamma_z / Gamma")
    gamma_plus_ratio: float = Field(default=0.0, ge=0, description="gamma_plus / Gamma")
    dephasing_ratio: float = Field(default=DEPHASING_RATIO, ge=0, description="gamma_d / Gamma")
    lambda_ratio: float = Field(default=0.0, ge=0, description="Homodyne displacement / omega")
    dt: float = Field(default=DEFAULT_DT, gt=0, description="Time step (1/omega)")
    n_traj: int = Field(default=1000, ge=1, description="Number of trajectories")
    seed: int = Field(default=0, ge=0, description="Root seed")
    displace_z: bool = Field(default=True, description="Displace L_z as well when lambda > 0")

    def to_model_params(self, **overrides: Any) -> ModelParams:
        """Convert to validated ModelParams; overrides replace ratio fields first."""
        spec = self.model_copy(update=overrides) if overrides else self
        return ModelParams.from_ratios(
            spec.omega_ratio,
            spec.gamma_ratio,
            spec.theta_pi,
            gz_ratio=spec.gz_ratio,
            gamma_plus_ratio=spec.gamma_plus_ratio,
            dephasing_ratio=spec.dephasing_ratio,
            lambda_ratio=spec.lambda_ratio,
            dt=spec.dt,
            n_traj=spec.n_traj,
            seed=spec.seed,
            displace_z=spec.displace_z,
        )


class SweepSpec(BaseModel):
    """One-dimensional sweep of a ratio parameter."""

    axis: Literal["omega", "gamma", "theta"] = Field(
        default="omega", description="omega_ratio, gamma_ratio or theta_pi"
    )
    values: list[float] = Field(min_length=1, description="Sweep values, in the axis units")

    @property
    def field_name(self) -> str:
        return {"omega": "omega_ratio", "gamma": "gamma_ratio", "theta": "theta_pi"}[self.axis]


class GridSpec(BaseModel):
    """Two-dimensional (Omega/omega, Gamma/omega) grid, with polar angles in units of pi."""

    omega: list[float] = Field(min_length=1)
    gamma: list[float] = Field(min_length=1)
    theta: list[float] = Field(default_factory=list, description="Seed grid of theta/pi")
    omega_window: tuple[float, float] | None = Field(
        default=None, description="Search window for a singular point, Omega/omega"
    )
    gamma_window: tuple[float, float] | None = Field(
        default=None, description="Search window for a singular point, Gamma/omega"
    )

    @field_validator("omega")
    @classmethod
    def check_positive(cls, v: list[float]) -> list[float]:
        if any(x <= 0 for x in v):
            raise ValueError("Omega/omega values must be positive")
        return v

    @field_validator("gamma")
    @classmethod
    def check_non_negative(cls, v: list[float]) -> list[float]:
        if any(x < 0 for x in v):
            raise ValueError("Gamma/omega values must be non-negative")
        return v

    @field_validator("theta")
    @classmethod
    def check_theta(cls, v: list[float]) -> list[float]:
        if any(not 0 <= x <= 1 for x in v):
            raise ValueError("theta values are given in units of pi and must lie in [0, 1]")
        return v

    def theta_grid(self, n: int = 65) -> list[float]:
        """Seed grid in radians, always including both poles."""
        values = set(self.theta or [i / (n - 1) for i in range(n)]) | {0.0, 1.0}
        return [math.pi * x for x in sorted(values)]


class OutputSpec(BaseModel):
    """Where and how tables are written."""

    directory: Path = Field(default=Path("results"), description="Output directory")
    format: Literal["csv", "json"] = Field(default="csv", description="Table format")


class ExperimentConfig(BaseModel):
    """A complete experiment: mode, parameters and analysis settings."""

    model_config = ConfigDict(extra="forbid")

    mode: ExperimentMode
    params: ParameterSpec
    sweep: SweepSpec | None = None
    grid: GridSpec | None = None
    compare: ParameterSpec | None = Field(default=None, description="Second point (delta-theta)")
    output: OutputSpec = Field(default_factory=OutputSpec)
    bins: int = Field(default=DEFAULT_BINS, ge=2, description="Histogram bins")
    periods: float = Field(default=1.0, gt=0, description="Evolution time in drive periods")
    analysis_dt: float = Field(default=1e-2, gt=0, description="Step of deterministic analyses")
    sample_every: int = Field(default=1, ge=1, description="Lindblad sampling stride")
    peak_prominence: float = Field(default=5e-3, gt=0, description="Peak prominence (probability)")
    chunk_size: int = Field(default=500, ge=1, description="Trajectories per work unit")

    @model_validator(mode="after")
    def check_compare(self) -> "ExperimentConfig":
        if self.compare is not None and self.mode is not ExperimentMode.DELTA_THETA:
            raise ValueError("compare is only used by the delta-theta mode")
        return self


class ModeResult(BaseModel):
    """What a mode hands back to the artifact writer."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: ExperimentMode
    summary: dict[str, Any] = Field(default_factory=dict, description="Manifest extras")
    tables: dict[str, pd.DataFrame] = Field(default_factory=dict, description="Named tables")
    mean_jumps: float | None = None
    n_total: int = 0
    n_excluded: int = 0


class RunManifest(BaseModel):
    """Provenance record written next to the tables of a run."""

    mode: ExperimentMode
    config: dict[str, Any]
    seed: int
    code_version: str
    provenance_hash: str = Field(description="sha256 of the config and code version")
    started_at: str
    wall_time_s: float = Field(ge=0)
    workers: int = Field(ge=1)
    mean_jumps: float | None = None
    n_total: int = Field(default=0, ge=0)
    n_excluded: int = Field(default=0, ge=0)
    summary: dict[str, Any] = Field(default_factory=dict)
    tables: list[str] = Field(default_factory=list, description="Table files written")
