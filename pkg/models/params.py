"""Physical parameter models."""

import math
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

# Internal unit: the field amplitude omega.
OMEGA_UNIT = 1.0
DEFAULT_DT = 2 * math.pi * 1e-3
DEPHASING_RATIO = 0.32
MAX_STEP_JUMP_PROBABILITY = 1e-2


class ModelParams(BaseModel):
    """Everything that defines one simulation of the driven two-level system."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "omega": 1.0,
                "Omega": 5e-3,
                "theta": 1.0681415022205298,
                "Gamma": 1e-3,
                "gamma_minus": 1e-3,
                "gamma_plus": 0.0,
                "gamma_d": 3.2e-4,
                "gamma_z": 0.0,
                "lambda_disp": 0.0,
                "dt": 0.006283185307179587,
                "n_traj": 10000,
                "seed": 1234,
            }
        },
    )

    omega: float = Field(default=OMEGA_UNIT, gt=0, description="Field amplitude (energy unit)")
    Omega: float = Field(gt=0, description="Angular frequency of the azimuthal drive")
    theta: float = Field(ge=0.0, le=math.pi, description="Polar angle of the field (rad)")
    Gamma: float = Field(default=0.0, ge=0, description="Dissipation scale entering H_o")
    gamma_minus: float = Field(default=0.0, ge=0, description="Decay rate")
    gamma_plus: float = Field(default=0.0, ge=0, description="Spontaneous excitation rate")
    gamma_d: float = Field(default=0.0, ge=0, description="Eigenbasis dephasing rate")
    gamma_z: float = Field(default=0.0, ge=0, description="Fixed-axis dephasing rate")
    lambda_disp: float = Field(default=0.0, ge=0, description="Homodyne displacement (0 = direct)")
    dt: float = Field(default=DEFAULT_DT, gt=0, description="Time step (1/energy)")
    n_traj: int = Field(default=1000, ge=1, description="Number of trajectories")
    seed: int = Field(default=0, ge=0, description="Root seed of the keyed RNG")
    drive_sign: Literal[1, -1] = Field(default=1, description="Direction of the azimuthal drive")
    displace_z: bool = Field(default=True, description="Whether L_z is displaced when lambda > 0")

    @model_validator(mode="after")
    def check_jump_probability(self) -> "ModelParams":
        """Keep the per-step jump probability small enough for first-order stepping."""
        bound = self.dt * self.max_jump_rate()
        if bound > MAX_STEP_JUMP_PROBABILITY:
            raise ValueError(
                f"dt={self.dt:.4g} allows a per-step jump probability up to {bound:.3g} "
                f"(limit {MAX_STEP_JUMP_PROBABILITY}); reduce dt"
            )
        return self

    def channel_rates(self) -> dict[str, float]:
        """Rates of the channels that are present, in the fixed sampling order."""
        rates = {
            "minus": self.gamma_minus,
            "plus": self.gamma_plus,
            "dephase": self.gamma_d,
            "z": self.gamma_z,
        }
        return {label: rate for label, rate in rates.items() if rate > 0}

    def max_jump_rate(self) -> float:
        """Upper bound on the total jump rate over all states and times."""
        root_lambda = math.sqrt(self.lambda_disp)
        total = 0.0
        for label, rate in self.channel_rates().items():
            shift = root_lambda if (label != "z" or self.displace_z) else 0.0
            total += (math.sqrt(rate) + shift) ** 2
        return total

    @property
    def period(self) -> float:
        """Duration T of one drive cycle."""
        return 2 * math.pi / self.Omega

    def replace(self, **updates: Any) -> "ModelParams":
        """Return a validated copy with some fields changed."""
        return ModelParams.model_validate({**self.model_dump(), **updates})

    def at_ratios(self, omega_ratio: float, gamma_ratio: float, **updates: Any) -> "ModelParams":
        """
        Move to another (Omega/omega, Gamma/omega) point keeping the channel mix.

        Every rate proportional to Gamma is rescaled with it, so gamma_plus, gamma_d
        and gamma_z keep their ratio to Gamma; lambda, drive_sign and displace_z are
        untouched. With Gamma = 0 there is no mix to keep and the default one
        (gamma_minus = Gamma, gamma_d = 0.32 Gamma) is used; other rates stay absolute.

        Args:
            omega_ratio: Omega / omega at the new point
            gamma_ratio: Gamma / omega at the new point
            **updates: Further fields to change (theta, dt, ...)
        """
        gamma = gamma_ratio * self.omega
        if self.Gamma > 0:
            scale = gamma / self.Gamma
            rates = {
                "gamma_minus": self.gamma_minus * scale,
                "gamma_plus": self.gamma_plus * scale,
                "gamma_d": self.gamma_d * scale,
                "gamma_z": self.gamma_z * scale,
            }
        else:
            rates = {"gamma_minus": gamma, "gamma_d": DEPHASING_RATIO * gamma}
        return self.replace(Omega=omega_ratio * self.omega, Gamma=gamma, **rates, **updates)

    @classmethod
    def from_ratios(
        cls,
        omega_ratio: float,
        gamma_ratio: float,
        theta_pi: float,
        *,
        gz_ratio: float = 0.0,
        gamma_plus_ratio: float = 0.0,
        dephasing_ratio: float = DEPHASING_RATIO,
        lambda_ratio: float = 0.0,
        dt: float = DEFAULT_DT,
        n_traj: int = 1000,
        seed: int = 0,
        displace_z: bool = True,
    ) -> "ModelParams":
        """
        Build parameters the way the phase diagrams are parameterized.

        Decay carries the full dissipation scale (gamma_minus = Gamma), eigenbasis
        dephasing a fixed fraction of it, and fixed-axis dephasing is given relative
        to Gamma.

        Args:
            omega_ratio: Omega / omega
            gamma_ratio: Gamma / omega
            theta_pi: Polar angle in units of pi
            gz_ratio: gamma_z / Gamma
            gamma_plus_ratio: gamma_plus / Gamma
            dephasing_ratio: gamma_d / Gamma
            lambda_ratio: lambda / omega
            dt: Time step
            n_traj: Trajectory count
            seed: Root seed
            displace_z: Displace L_z as well when lambda_ratio > 0

        Returns:
            Validated ModelParams
        """
        gamma = gamma_ratio * OMEGA_UNIT
        return cls(
            omega=OMEGA_UNIT,
            Omega=omega_ratio * OMEGA_UNIT,
            theta=theta_pi * math.pi,
            Gamma=gamma,
            gamma_minus=gamma,
            gamma_plus=gamma_plus_ratio * gamma,
            gamma_d=dephasing_ratio * gamma,
            gamma_z=gz_ratio * gamma,
            lambda_disp=lambda_ratio * OMEGA_UNIT,
            dt=dt,
            n_traj=n_traj,
            seed=seed,
            displace_z=displace_z,
        )


def grid_point(
    base: ModelParams | None, omega_ratio: float, gamma_ratio: float, theta: float, dt: float
) -> ModelParams:
    """Parameters at one (Omega/omega, Gamma/omega, theta) point of a scan over base."""
    if base is None:
        return ModelParams.from_ratios(omega_ratio, gamma_ratio, theta / math.pi, dt=dt)
    return base.at_ratios(omega_ratio, gamma_ratio, theta=theta, dt=dt)
