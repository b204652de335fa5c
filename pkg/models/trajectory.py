"""Trajectory data models: jump events, per-trajectory records and ensembles."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, model_validator

from models.states import PureState


class JumpChannel(str, Enum):
    """Lindblad channels, listed in the fixed order used for sampling."""

    MINUS = "minus"
    PLUS = "plus"
    DEPHASE = "dephase"
    Z = "z"


CHANNEL_ORDER: tuple[JumpChannel, ...] = tuple(JumpChannel)


class JumpEvent(BaseModel):
    """A registered quantum jump."""

    model_config = ConfigDict(frozen=True)

    label: JumpChannel = Field(description="Channel that fired")
    time: float = Field(ge=0, description="Time of the jump (start of the step), 1/omega")
    step_index: int = Field(ge=0, description="Index of the step in which the jump occurred")


class GpAccumulator(BaseModel):
    """Online sums of the trajectory geometric phase."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    pancharatnam_sum: float = Field(
        default=0.0, description="Running -sum of arg<psi_k|psi_k+1> over smooth steps"
    )
    jump_phase_sum: float = Field(
        default=0.0, description="Running -sum of arg<psi|K_alpha|psi> over jumps"
    )
    initial_state: PureState = Field(description="State at the start of the trajectory")

    @model_validator(mode="after")
    def check_finite(self) -> "GpAccumulator":
        if not (np.isfinite(self.pancharatnam_sum) and np.isfinite(self.jump_phase_sum)):
            raise ValueError("accumulated phase sums must be finite")
        return self


class TrajectoryRecord(BaseModel):
    """The outcome of one monitored trajectory."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    trajectory_id: int | None = Field(default=None, description="Index of the keyed RNG stream")
    seed: int | None = Field(default=None, description="Root seed of the keyed RNG")
    events: list[JumpEvent] = Field(default_factory=list, description="Jumps, time ordered")
    n_steps: int = Field(ge=0, description="Number of steps taken")
    dt: float = Field(gt=0, description="Step actually used")
    initial_state: PureState
    final_state: PureState
    pancharatnam_sum: float = 0.0
    jump_phase_sum: float = 0.0
    gp: float | None = Field(
        default=None, description="Trajectory geometric phase, None when singular"
    )
    singular_jump: bool = Field(default=False, description="A jump landed orthogonal to psi")
    singular_final: bool = Field(default=False, description="Final state orthogonal to initial")
    history: np.ndarray | None = Field(
        default=None, exclude=True, description="Full state history (debug mode only)"
    )

    @model_validator(mode="after")
    def check_event_order(self) -> "TrajectoryRecord":
        times = [event.time for event in self.events]
        if any(b < a for a, b in zip(times, times[1:], strict=False)):
            raise ValueError("events must be sorted by time")
        return self

    @property
    def n_jumps(self) -> int:
        return len(self.events)

    @property
    def duration(self) -> float:
        return self.n_steps * self.dt

    @property
    def excluded(self) -> bool:
        """Whether the trajectory is left out of phase histograms."""
        return self.singular_jump or self.singular_final

    def accumulator(self) -> GpAccumulator:
        return GpAccumulator(
            pancharatnam_sum=self.pancharatnam_sum,
            jump_phase_sum=self.jump_phase_sum,
            initial_state=self.initial_state,
        )


class NoJumpRecord(TrajectoryRecord):
    """The deterministic jump-free trajectory with its survival probability."""

    survival_probability: float = Field(ge=0, description="Product of p_o over all steps")
    final_norm_squared: float = Field(
        ge=0, description="<psi~(T)|psi~(T)> relative to the initial norm"
    )
    method: str = Field(default="kraus", description="Propagator used (kraus or magnus)")


class EnsembleResult(BaseModel):
    """Per-trajectory outcomes of a batch, ordered by trajectory id."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    trajectory_ids: np.ndarray = Field(description="Trajectory ids, shape (n,)")
    gp: np.ndarray = Field(description="Geometric phases, NaN where excluded")
    n_jumps: np.ndarray = Field(description="Jump counts")
    singular_jump: np.ndarray = Field(description="Singular-jump flags")
    singular_final: np.ndarray = Field(description="Singular-final flags")
    final_states: np.ndarray = Field(description="Normalized final states, shape (n, 2)")
    sample_steps: tuple[int, ...] = Field(default=(), description="Step indices sampled")
    sample_states: np.ndarray | None = Field(
        default=None, description="Normalized states at sample_steps, shape (n, s, 2)"
    )
    dt: float = Field(gt=0)
    records: list[TrajectoryRecord] | None = Field(default=None, exclude=True)

    @field_serializer("trajectory_ids", "gp", "n_jumps", "singular_jump", "singular_final")
    def serialize_array(self, v: np.ndarray) -> list:
        return v.tolist()

    @field_serializer("final_states", "sample_states")
    def serialize_states(self, v: np.ndarray | None) -> list | None:
        if v is None:
            return None
        return np.stack([v.real, v.imag], axis=-1).tolist()

    def __len__(self) -> int:
        return len(self.trajectory_ids)

    @property
    def excluded(self) -> np.ndarray:
        return self.singular_jump | self.singular_final

    @property
    def n_excluded(self) -> int:
        return int(np.count_nonzero(self.excluded))

    @property
    def mean_jumps(self) -> float:
        return float(np.mean(self.n_jumps))

    @property
    def valid_phases(self) -> np.ndarray:
        return self.gp[~self.excluded]

    def sample_density(self, index: int) -> np.ndarray:
        """Ensemble-averaged projector at the ``index``-th sampled step."""
        if self.sample_states is None:
            raise ValueError("ensemble was run without sampled states")
        psi = self.sample_states[:, index, :]
        return np.einsum("ni,nj->ij", psi, psi.conj()) / len(psi)

    @classmethod
    def concatenate(cls, parts: list["EnsembleResult"]) -> "EnsembleResult":
        """Join batches in the given order."""
        if not parts:
            raise ValueError("nothing to concatenate")
        first = parts[0]
        samples = None
        if first.sample_states is not None:
            samples = np.concatenate([part.sample_states for part in parts])
        records = None
        if all(part.records is not None for part in parts):
            records = [record for part in parts for record in part.records]
        return cls(
            trajectory_ids=np.concatenate([part.trajectory_ids for part in parts]),
            gp=np.concatenate([part.gp for part in parts]),
            n_jumps=np.concatenate([part.n_jumps for part in parts]),
            singular_jump=np.concatenate([part.singular_jump for part in parts]),
            singular_final=np.concatenate([part.singular_final for part in parts]),
            final_states=np.concatenate([part.final_states for part in parts]),
            sample_steps=first.sample_steps,
            sample_states=samples,
            dt=first.dt,
            records=records,
        )
