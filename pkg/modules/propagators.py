"""
Deterministic no-jump propagation.

The conditional evolution without jumps is linear, so the whole history follows
from prefix products of per-step matrices. Products are taken block by block with
the running state renormalized between blocks and its log-norm carried separately.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.params import ModelParams
from modules.core import IDENTITY, Matrix2c, apply, as_amplitudes, expm2, matmul, norm_squared
from modules.model import no_jump_generator

logger = logging.getLogger(__name__)

PropagatorMethod = Literal["kraus", "magnus"]
PROPAGATOR_METHODS: tuple[str, ...] = ("kraus", "magnus")

SCAN_BLOCK = 4096
GAUSS_OFFSET = math.sqrt(3.0) / 6.0
# Step for Magnus-based analysis quantities (sweeps, root finding).
ANALYSIS_DT = 1e-2


@dataclass(frozen=True)
class NoJumpPath:
    """Normalized no-jump history with log-norms of the unnormalized states."""

    states: NDArray[np.complex128]
    log_norms: NDArray[np.float64]
    log_survival: float
    dt: float
    method: str

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    @property
    def survival_probability(self) -> float:
        """Product of the per-step no-jump probabilities."""
        return math.exp(self.log_survival)

    @property
    def final_norm_squared(self) -> float:
        """<psi~(T)|psi~(T)> relative to <psi~(0)|psi~(0)>."""
        return math.exp(2.0 * (self.log_norms[-1] - self.log_norms[0]))

    def unnormalized(self) -> NDArray[np.complex128]:
        """History of psi~ itself; underflows for very long decays."""
        return self.states * np.exp(self.log_norms)[:, None]


def time_grid(duration: float, dt: float) -> tuple[int, float]:
    """
    Number of steps and effective step for a duration.

    The step is shrunk to the nearest value that divides the duration exactly.

    Returns:
        (n_steps, dt_eff); (0, dt) for a zero duration
    """
    if not (math.isfinite(duration) and duration >= 0):
        raise ValueError(f"duration must be finite and non-negative, got {duration}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if duration == 0:
        return 0, dt
    n_steps = math.ceil(duration / dt - 1e-9)
    return n_steps, duration / n_steps


def prefix_products(mats: ArrayLike) -> Matrix2c:
    """
    Inclusive prefix products out[k] = M_k ... M_1 M_0.

    Hillis-Steele scan: log2(n) rounds of elementwise 2x2 products.
    """
    out = np.array(mats, dtype=np.complex128, copy=True)
    shift = 1
    while shift < len(out):
        out[shift:] = matmul(out[shift:], out[:-shift])
        shift *= 2
    return out


def kraus_step_matrices(p: ModelParams, starts: ArrayLike, dt: float) -> Matrix2c:
    """First-order K_o = 1 - i dt G(t) at the step starts."""
    return IDENTITY - 1j * dt * no_jump_generator(p, starts)


def magnus_step_matrices(p: ModelParams, starts: ArrayLike, dt: float) -> Matrix2c:
    """Fourth-order Magnus propagators of d/dt psi = -i G(t) psi over [t, t + dt]."""
    starts = np.asarray(starts, dtype=np.float64)
    a1 = -1j * no_jump_generator(p, starts + (0.5 - GAUSS_OFFSET) * dt)
    a2 = -1j * no_jump_generator(p, starts + (0.5 + GAUSS_OFFSET) * dt)
    commutator = matmul(a2, a1) - matmul(a1, a2)
    exponent = 0.5 * dt * (a1 + a2) + (math.sqrt(3.0) / 12.0) * dt**2 * commutator
    return expm2(exponent)


def step_matrices(
    p: ModelParams, starts: ArrayLike, dt: float, method: PropagatorMethod = "kraus"
) -> Matrix2c:
    if method == "kraus":
        return kraus_step_matrices(p, starts, dt)
    if method == "magnus":
        return magnus_step_matrices(p, starts, dt)
    raise ValueError(f"unknown propagator method {method!r}; expected one of {PROPAGATOR_METHODS}")


def propagate_no_jump(
    p: ModelParams,
    n_steps: int,
    dt: float,
    initial: ArrayLike,
    method: PropagatorMethod = "kraus",
    t0: float = 0.0,
    block: int = SCAN_BLOCK,
) -> NoJumpPath:
    """
    Propagate psi~ with the no-jump operator over n_steps steps of size dt.

    Args:
        p: Model parameters (p.dt is ignored in favour of ``dt``)
        n_steps: Number of steps
        dt: Step size
        initial: Initial state, any norm
        method: "kraus" for K_o, "magnus" for the fourth-order exponential
        t0: Time of the first step start
        block: Steps per prefix scan

    Returns:
        NoJumpPath with n_steps + 1 normalized states
    """
    psi = np.asarray(as_amplitudes(initial), dtype=np.complex128)
    norm0 = math.sqrt(float(norm_squared(psi)))
    if not norm0 > 0.0:
        raise ValueError("initial state has zero norm")

    states = np.empty((n_steps + 1, 2), dtype=np.complex128)
    log_norms = np.empty(n_steps + 1)
    states[0] = psi / norm0
    log_norms[0] = math.log(norm0)
    log_survival = 0.0

    for start in range(0, n_steps, block):
        stop = min(start + block, n_steps)
        mats = step_matrices(p, t0 + dt * np.arange(start, stop), dt, method)
        carry = states[start]
        segment = apply(prefix_products(mats), carry)
        norms = np.sqrt(norm_squared(segment))
        if not np.all(norms > 0.0):
            raise FloatingPointError(f"no-jump state underflowed in steps {start}..{stop}")
        states[start + 1 : stop + 1] = segment / norms[:, None]
        log_norms[start + 1 : stop + 1] = log_norms[start] + np.log(norms)
        # Survival from the one-step probabilities along the normalized path.
        one_step = norm_squared(apply(mats, states[start:stop]))
        log_survival += float(np.sum(np.log(one_step)))

    logger.debug(
        f"no-jump propagation ({method}): {n_steps} steps, dt={dt:.4g}, "
        f"log survival {log_survival:.6g}"
    )
    return NoJumpPath(
        states=states, log_norms=log_norms, log_survival=log_survival, dt=dt, method=method
    )
