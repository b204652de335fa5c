"""Echo protocol data models."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.trajectory import TrajectoryRecord

PERSISTENCE_TOL = 1e-10


class EchoCategory(str, Enum):
    """Which peak of the echo distribution a realization feeds."""

    NO_JUMP = "no_jump"
    DECAY = "decay"
    DEPHASING = "dephasing"
    MIXED = "mixed"


class EchoOutcome(BaseModel):
    """Result of one monitored spin-echo realization over [0, 2T]."""

    model_config = ConfigDict(frozen=True)

    persistence: float = Field(ge=0, le=1, description="|<psi(0)|psi(2T)>|^2")
    varphi: float = Field(description="Echo fringe parameter on the display branch (rad)")
    record: TrajectoryRecord = Field(description="Events and final state over both legs")
    category: EchoCategory = Field(description="Peak taxonomy of the jump record")

    @model_validator(mode="after")
    def check_parametrization(self) -> "EchoOutcome":
        if abs(np.cos(2 * self.varphi) ** 2 - self.persistence) > PERSISTENCE_TOL:
            raise ValueError("persistence must equal cos^2(2 varphi)")
        return self


class EchoEnsemble(BaseModel):
    """Vectorized echo outcomes of a batch, ordered by trajectory id."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    trajectory_ids: np.ndarray
    persistence: np.ndarray
    varphi: np.ndarray
    n_jumps: np.ndarray
    categories: list[EchoCategory]

    def __len__(self) -> int:
        return len(self.trajectory_ids)

    @property
    def mean_jumps(self) -> float:
        return float(np.mean(self.n_jumps))

    @classmethod
    def concatenate(cls, parts: list["EchoEnsemble"]) -> "EchoEnsemble":
        if not parts:
            raise ValueError("nothing to concatenate")
        return cls(
            trajectory_ids=np.concatenate([part.trajectory_ids for part in parts]),
            persistence=np.concatenate([part.persistence for part in parts]),
            varphi=np.concatenate([part.varphi for part in parts]),
            n_jumps=np.concatenate([part.n_jumps for part in parts]),
            categories=[category for part in parts for category in part.categories],
        )
