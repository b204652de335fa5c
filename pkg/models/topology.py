"""Topology data models: angular sweeps and phase-diagram cells."""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator


class ThetaSweep(BaseModel):
    """The no-jump GP as a continuous function of the polar angle."""

    model_config = ConfigDict(frozen=True)

    omega_ratio: float
    gamma_ratio: float
    thetas: list[float] = Field(description="Ordered grid over [0, pi]")
    phases: list[float] = Field(description="Unwrapped phi_0(theta), anchored at theta = 0")
    raw_phases: list[float] = Field(description="Wrapped no-jump GP at each theta")
    overlaps: list[float] = Field(description="Normalized |<psi(0)|psi~(T)>| at each theta")

    @model_validator(mode="after")
    def check_shapes(self) -> "ThetaSweep":
        lengths = {len(self.thetas), len(self.phases), len(self.raw_phases), len(self.overlaps)}
        if len(lengths) != 1:
            raise ValueError("thetas, phases, raw_phases and overlaps must have equal length")
        if any(b <= a for a, b in zip(self.thetas, self.thetas[1:], strict=False)):
            raise ValueError("thetas must be strictly increasing")
        return self

    @property
    def end_winding(self) -> float:
        """phi_0(pi) / 2pi."""
        return self.phases[-1] / (2 * math.pi)

    def critical_theta(self) -> float:
        """Angle where the no-jump overlap is smallest."""
        index = min(range(len(self.overlaps)), key=self.overlaps.__getitem__)
        return self.thetas[index]


class DeltaSweep(BaseModel):
    """Difference of two unwrapped sweeps in units of 2pi."""

    model_config = ConfigDict(frozen=True)

    thetas: list[float]
    delta: list[float]


class SectorCell(BaseModel):
    """One (Omega, Gamma) cell of a sector map."""

    model_config = ConfigDict(frozen=True)

    omega_ratio: float
    gamma_ratio: float
    winding: int | None = Field(default=None, description="Invariant n, None when singular")
    singular: bool = Field(default=False, description="Cell lies on a singular line")
    critical_theta: float = Field(description="Angle of minimal no-jump overlap (rad)")
    min_overlap: float = Field(ge=0, description="Minimal normalized no-jump overlap")


class PhaseCell(BaseModel):
    """No-jump GP at one (Omega, Gamma) point of a fixed-theta phase diagram."""

    model_config = ConfigDict(frozen=True)

    omega_ratio: float
    gamma_ratio: float
    phase: float | None = Field(default=None, description="Wrapped no-jump GP, None when singular")
    overlap: float = Field(ge=0, description="Normalized |<psi_plus(0)|psi~(T)>|")
    singular: bool = False
