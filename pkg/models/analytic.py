"""Closed-form no-jump solution parameters and reference phases."""

from pydantic import BaseModel, ConfigDict, Field


class RotFrameParams(BaseModel):
    """Rotating-frame constants of the mean-f no-jump solution."""

    model_config = ConfigDict(frozen=True)

    nu: complex = Field(description="omega - Omega cos(theta) - i Gamma/2 (1 - sin^2(theta)/2)")
    eps: complex = Field(description="sqrt(nu^2 + Omega^2 sin^2(theta)), branch-tracked")


class ReferencePhases(BaseModel):
    """The characteristic phases a distribution is compared against (rad, wrapped)."""

    model_config = ConfigDict(frozen=True)

    berry: float = Field(description="Adiabatic Berry phase -pi(1 - cos theta)")
    unitary: float = Field(description="Closed-system GP at finite Omega")
    no_jump: float | None = Field(default=None, description="GP of the no-jump trajectory")
    no_jump_approx: float | None = Field(default=None, description="Small-rate closed form")
    average: float | None = Field(default=None, description="Argument of the mean resultant")
    mixed: float | None = Field(default=None, description="Mixed-state GP of the averaged state")
