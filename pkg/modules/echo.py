"""
Monitored spin-echo protocol.

The equal superposition of the eigenstates is driven around the loop, the
eigenstates are exchanged at T, and the loop is retraced in the opposite
direction while monitoring continues. Dynamical phases cancel in the closed
adiabatic limit, leaving the geometric contribution in the persistence
probability P = |<psi(0)|psi(2T)>|^2 = cos^2(2 varphi).
"""

import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import NDArray

from models.echo import EchoCategory, EchoEnsemble, EchoOutcome
from models.params import ModelParams
from models.states import PureState
from models.trajectory import JumpChannel, JumpEvent, TrajectoryRecord
from modules.core import Matrix2c, apply, inner, norm_squared, outer
from modules.geometric_phase import berry_phase
from modules.model import eigensystem
from modules.propagators import ANALYSIS_DT, PropagatorMethod, propagate_no_jump, time_grid
from modules.rng import batch_rngs, trajectory_rng
from modules.trajectory_engine import (
    BatchState,
    ForcedJumps,
    new_batch,
    prepare_run,
    propagate_batch,
    resolve_forced,
)

logger = logging.getLogger(__name__)

ECHO_LOW = 1.25 * math.pi
ECHO_HIGH = 1.5 * math.pi
PERSISTENCE_SLACK = 1e-9

DECAY_CHANNELS = frozenset({JumpChannel.MINUS, JumpChannel.PLUS})
DEPHASING_CHANNELS = frozenset({JumpChannel.DEPHASE, JumpChannel.Z})


def varphi_from_persistence(persistence: float | NDArray[np.float64]) -> float | NDArray[np.float64]:
    """
    Echo parameter on the display branch [1.25pi, 1.5pi].

    varphi = (3pi - arccos(sqrt(P)))/2, so 1/2 -> 1.375pi and 1 -> 1.5pi. The
    parametrization only fixes varphi modulo pi/2 and up to a sign.

    Raises:
        ValueError: If P lies outside [0, 1]
    """
    arr = np.asarray(persistence, dtype=np.float64)
    if np.any(~np.isfinite(arr)) or np.any(arr < -PERSISTENCE_SLACK) or np.any(arr > 1 + PERSISTENCE_SLACK):
        raise ValueError(f"persistence must lie in [0, 1], got {persistence!r}")
    varphi = 0.5 * (3 * math.pi - np.arccos(np.sqrt(np.clip(arr, 0.0, 1.0))))
    if varphi.ndim == 0:
        return float(varphi)
    return varphi


def adiabatic_echo_persistence(theta: float) -> float:
    """cos^2(2 phi_a) for the upper-branch Berry phase."""
    return math.cos(2 * berry_phase(theta)) ** 2


def echo_initial_state(p: ModelParams) -> NDArray[np.complex128]:
    eig = eigensystem(p, 0.0)
    return (eig.state_plus + eig.state_minus) / math.sqrt(2.0)


def flip_operator(p: ModelParams, t: float) -> Matrix2c:
    """Ideal exchange |psi_+><psi_-| + |psi_-><psi_+| in the instantaneous eigenbasis."""
    eig = eigensystem(p, t)
    return outer(eig.state_plus, eig.state_minus) + outer(eig.state_minus, eig.state_plus)


def classify_echo(events: Sequence[JumpEvent] | EchoOutcome | TrajectoryRecord) -> EchoCategory:
    """
    Peak of the echo distribution a jump record feeds.

    No jumps land on the no-jump value, decay or excitation jumps on 1.375pi,
    dephasing-type jumps on the shifted peak; records mixing both kinds are MIXED.
    """
    if isinstance(events, EchoOutcome):
        events = events.record.events
    elif isinstance(events, TrajectoryRecord):
        events = events.events
    labels = {event.label for event in events}
    if not labels:
        return EchoCategory.NO_JUMP
    if labels <= DECAY_CHANNELS:
        return EchoCategory.DECAY
    if labels <= DEPHASING_CHANNELS:
        return EchoCategory.DEPHASING
    return EchoCategory.MIXED


def _split_forced(forced: ForcedJumps | None, n_steps: int) -> tuple[dict, dict]:
    first, second = {}, {}
    for step_index, label in (forced or {}).items():
        if step_index < n_steps:
            first[step_index] = label
        else:
            second[step_index - n_steps] = label
    return first, second


def _run_protocol(
    p: ModelParams,
    generators: list[np.random.Generator],
    forced_jumps: ForcedJumps | None = None,
) -> tuple[BatchState, NDArray[np.complex128], ModelParams, int, NDArray[np.float64]]:
    """Both legs for a batch; returns the batch, the initial state, params, steps per leg and P."""
    period = p.period
    p_fwd, n_steps, psi0 = prepare_run(p.replace(drive_sign=1), period, echo_initial_state(p), True)
    p_rev = p_fwd.replace(drive_sign=-1)
    forced_fwd, forced_rev = _split_forced(forced_jumps, n_steps)

    batch = new_batch(np.tile(psi0, (len(generators), 1)))
    propagate_batch(p_fwd, n_steps, batch, generators, forced=resolve_forced(p_fwd, forced_fwd))
    batch.states = apply(flip_operator(p_fwd, period), batch.states)
    propagate_batch(
        p_rev,
        n_steps,
        batch,
        generators,
        forced=resolve_forced(p_rev, forced_rev),
        time_offset=period,
        step_offset=n_steps,
    )
    persistence = np.clip(np.abs(inner(psi0[None, :], batch.states)) ** 2, 0.0, 1.0)
    return batch, psi0, p_fwd, n_steps, persistence


def run_echo(
    p: ModelParams,
    rng: np.random.Generator | None = None,
    *,
    trajectory_id: int | None = None,
    forced_jumps: ForcedJumps | None = None,
) -> EchoOutcome:
    """
    One monitored echo realization over [0, 2T].

    Args:
        p: Model parameters (the drive direction of the first leg is always positive)
        rng: Random stream, continued through both legs; defaults to the keyed stream
        trajectory_id: Id recorded in the output
        forced_jumps: Global step index -> channel; indices past the first leg
            address the reversed leg

    Returns:
        EchoOutcome with persistence, varphi, the jump record and its category
    """
    if rng is None:
        rng = trajectory_rng(p.seed, trajectory_id or 0)
    batch, psi0, p_fwd, n_steps, persistence = _run_protocol(p, [rng], forced_jumps)
    record = TrajectoryRecord(
        trajectory_id=trajectory_id,
        seed=p.seed if trajectory_id is not None else None,
        events=batch.events[0],
        n_steps=2 * n_steps,
        dt=p_fwd.dt,
        initial_state=PureState(amplitudes=psi0),
        final_state=PureState(amplitudes=batch.states[0]),
    )
    return EchoOutcome(
        persistence=float(persistence[0]),
        varphi=varphi_from_persistence(float(persistence[0])),
        record=record,
        category=classify_echo(record.events),
    )


def run_echo_ensemble(p: ModelParams, trajectory_ids: Sequence[int] | NDArray[np.int64]) -> EchoEnsemble:
    """Echo realizations for a batch of keyed streams, in lock-step."""
    ids = np.asarray(trajectory_ids, dtype=np.int64)
    batch, _, _, _, persistence = _run_protocol(p, batch_rngs(p.seed, ids))
    logger.debug(f"echo batch of {len(ids)}: {int(batch.n_jumps.sum())} jumps")
    return EchoEnsemble(
        trajectory_ids=ids,
        persistence=persistence,
        varphi=np.atleast_1d(varphi_from_persistence(persistence)),
        n_jumps=batch.n_jumps,
        categories=[classify_echo(events) for events in batch.events],
    )


def no_jump_echo(
    p: ModelParams, method: PropagatorMethod = "magnus", dt: float = ANALYSIS_DT
) -> EchoOutcome:
    """Deterministic echo with the no-jump operator on both legs."""
    period = p.period
    n_steps, dt_eff = time_grid(period, dt)
    p_fwd = p.replace(drive_sign=1)
    psi0 = echo_initial_state(p_fwd)
    forward = propagate_no_jump(p_fwd, n_steps, dt_eff, psi0, method=method)
    flipped = apply(flip_operator(p_fwd, period), forward.states[-1])
    backward = propagate_no_jump(p_fwd.replace(drive_sign=-1), n_steps, dt_eff, flipped, method=method)
    final = backward.states[-1]
    persistence = min(1.0, float(abs(inner(psi0, final)) ** 2 / norm_squared(final)))
    record = TrajectoryRecord(
        n_steps=2 * n_steps,
        dt=dt_eff,
        initial_state=PureState(amplitudes=psi0),
        final_state=PureState(amplitudes=final),
    )
    return EchoOutcome(
        persistence=persistence,
        varphi=varphi_from_persistence(persistence),
        record=record,
        category=EchoCategory.NO_JUMP,
    )
