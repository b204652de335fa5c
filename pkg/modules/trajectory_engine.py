"""
Monte Carlo wave-function propagation.

Each step draws one uniform per trajectory and partitions [0, 1) into the jump
channels in the fixed order (minus, plus, dephase, z) followed by the no-jump branch.
The geometric phase is accumulated online: smooth steps add -arg<psi_k|psi_k+1>,
jumps add -arg<psi|K_alpha psi>.

Batches are propagated in lock-step with elementwise arithmetic only, so a
trajectory's outcome is a function of (seed, trajectory id) alone.
"""

import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.params import ModelParams
from models.states import PureState
from models.trajectory import (
    CHANNEL_ORDER,
    EnsembleResult,
    JumpChannel,
    JumpEvent,
    NoJumpRecord,
    TrajectoryRecord,
)
from modules.core import (
    EPS_OVERLAP,
    Matrix2c,
    apply,
    as_amplitudes,
    dagger,
    inner,
    matmul,
    norm_squared,
)
from modules.errors import StepTooCoarse
from modules.geometric_phase import gp_from_sums, pancharatnam_sum
from modules.model import LabeledOps, displace, eigensystem, hamiltonian, kraus_step_ops, lindblad_ops
from modules.propagators import PropagatorMethod, prefix_products, propagate_no_jump, time_grid
from modules.rng import batch_rngs, draw_uniforms, trajectory_rng

logger = logging.getLogger(__name__)

PROBABILITY_TOL = 1e-4
BLOCK_STEPS = 256
MAX_HALVINGS = 12

ForcedJumps = Mapping[int, JumpChannel | str]


def displaced_ops(p: ModelParams, t: ArrayLike) -> tuple[Matrix2c, LabeledOps]:
    """
    Hamiltonian and jump operators of the displaced unravelling at time t.

    L'_alpha = L_alpha + sqrt(lambda) 1 and H' = H - (i sqrt(lambda)/2) sum (L - L^dagger).
    With lambda_disp = 0 the direct operators are returned.
    """
    h = hamiltonian(p, t)
    ops = lindblad_ops(p, eigensystem(p, t))
    return displace(h, ops, p.lambda_disp, p.displace_z)


def _channel_labels(p: ModelParams) -> list[JumpChannel]:
    present = p.channel_rates()
    return [channel for channel in CHANNEL_ORDER if channel.value in present]


def resolve_forced(p: ModelParams, forced: ForcedJumps | None) -> dict[int, int]:
    """Map step index -> position of the forced channel in the present-channel list."""
    if not forced:
        return {}
    labels = _channel_labels(p)
    resolved = {}
    for step_index, label in forced.items():
        channel = JumpChannel(label)
        if channel not in labels:
            raise ValueError(f"cannot force a {channel.value} jump: channel has zero rate")
        resolved[int(step_index)] = labels.index(channel)
    return resolved


def _step_probabilities(p: ModelParams, t: float, psi: NDArray[np.complex128]) -> float:
    k_o, jumps = kraus_step_ops(p, t)
    return float(norm_squared(apply(k_o, psi)) + sum(norm_squared(apply(k, psi)) for _, k in jumps))


def resolve_time_step(p: ModelParams, initial: PureState | ArrayLike) -> ModelParams:
    """
    Halve dt until the step probabilities of the initial state sum to one.

    Returns:
        Parameters with the accepted dt (p itself when no halving was needed)

    Raises:
        StepTooCoarse: If the guard still fails after MAX_HALVINGS halvings
    """
    psi = as_amplitudes(initial)
    psi = psi / math.sqrt(float(norm_squared(psi)))
    current = p
    for _ in range(MAX_HALVINGS + 1):
        deviation = abs(_step_probabilities(current, 0.0, psi) - 1.0)
        if deviation <= PROBABILITY_TOL:
            if current is not p:
                logger.warning(f"dt reduced from {p.dt:.4g} to {current.dt:.4g}")
            return current
        current = current.replace(dt=current.dt / 2)
    raise StepTooCoarse(0, 0.0, deviation)


@dataclass
class BatchState:
    """Per-trajectory state of a lock-step batch."""

    states: NDArray[np.complex128]
    smooth_sum: NDArray[np.float64]
    jump_sum: NDArray[np.float64]
    n_jumps: NDArray[np.int64]
    singular_jump: NDArray[np.bool_]
    events: list[list[JumpEvent]]
    samples: NDArray[np.complex128] | None = None
    history: NDArray[np.complex128] | None = None
    sample_steps: tuple[int, ...] = field(default=())


def new_batch(states: NDArray[np.complex128]) -> BatchState:
    n = len(states)
    return BatchState(
        states=states,
        smooth_sum=np.zeros(n),
        jump_sum=np.zeros(n),
        n_jumps=np.zeros(n, dtype=np.int64),
        singular_jump=np.zeros(n, dtype=bool),
        events=[[] for _ in range(n)],
    )


def _drift_block(
    k_o: Matrix2c,
    states: NDArray[np.complex128],
    outcome: BatchState,
    block_start: int,
    sample_lookup: dict[int, int],
    step_offset: int,
    time_offset: float,
    dt: float,
) -> NDArray[np.complex128]:
    """Jump-free block: the whole segment follows from prefix products of K_o."""
    segment = apply(prefix_products(k_o)[None], states[:, None, :])
    segment = segment / np.sqrt(norm_squared(segment))[..., None]
    chain = np.concatenate([states[:, None, :], segment], axis=1)
    p_o = norm_squared(apply(k_o[None], chain[:, :-1]))
    deviation = np.abs(p_o - 1.0)
    if deviation.size and float(np.max(deviation)) > PROBABILITY_TOL:
        j = int(np.argmax(np.max(deviation, axis=0)))
        raise StepTooCoarse(
            step_offset + block_start + j,
            time_offset + (block_start + j) * dt,
            float(np.max(deviation)),
        )
    outcome.smooth_sum -= np.sum(np.angle(inner(chain[:, :-1], chain[:, 1:])), axis=1)
    for k in range(block_start + 1, block_start + len(k_o) + 1):
        if k in sample_lookup:
            outcome.samples[:, sample_lookup[k]] = chain[:, k - block_start]
    if outcome.history is not None:
        outcome.history[:, block_start + 1 : block_start + len(k_o) + 1] = segment
    return segment[:, -1]


def propagate_batch(
    p: ModelParams,
    n_steps: int,
    outcome: BatchState,
    generators: list[np.random.Generator],
    *,
    forced: dict[int, int] | None = None,
    time_offset: float = 0.0,
    step_offset: int = 0,
    sample_steps: Sequence[int] = (),
    keep_history: bool = False,
) -> BatchState:
    """
    Advance a batch of normalized states n_steps steps of size p.dt.

    Operators are evaluated at local times k * dt; events are stamped with
    time_offset + k * dt and step_offset + k.
    """
    dt = p.dt
    labels = _channel_labels(p)
    forced = forced or {}
    n = len(outcome.states)
    states = outcome.states

    sample_lookup = {int(step): index for index, step in enumerate(sample_steps)}
    if sample_lookup:
        outcome.samples = np.empty((n, len(sample_lookup), 2), dtype=np.complex128)
        outcome.sample_steps = tuple(int(step) for step in sample_steps)
        if 0 in sample_lookup:
            outcome.samples[:, sample_lookup[0]] = states
    if keep_history:
        outcome.history = np.empty((n, n_steps + 1, 2), dtype=np.complex128)
        outcome.history[:, 0] = states

    for block_start in range(0, n_steps, BLOCK_STEPS):
        block = min(BLOCK_STEPS, n_steps - block_start)
        times = dt * np.arange(block_start, block_start + block)
        k_o, jumps = kraus_step_ops(p, times)
        jump_ops = [op for _, op in jumps]
        if not jump_ops:
            states = _drift_block(
                k_o, states, outcome, block_start, sample_lookup, step_offset, time_offset, dt
            )
            continue
        # p_alpha = <psi|K^dagger K|psi>, evaluated as a quadratic form.
        gram = [matmul(dagger(op), op) for op in jump_ops]
        uniforms = draw_uniforms(generators, block)

        for j in range(block):
            k = block_start + j
            a0, a1 = states[:, 0], states[:, 1]
            abs0 = a0.real**2 + a0.imag**2
            abs1 = a1.real**2 + a1.imag**2
            cross = np.conj(a0) * a1
            probs = [
                abs0 * g[j, 0, 0].real + abs1 * g[j, 1, 1].real + 2.0 * (cross * g[j, 0, 1]).real
                for g in gram
            ]
            smooth = apply(k_o[j], states)
            p_o = norm_squared(smooth)
            total = p_o + sum(probs)
            deviation = np.abs(total - 1.0)
            if n and float(np.max(deviation)) > PROBABILITY_TOL:
                raise StepTooCoarse(step_offset + k, time_offset + times[j], float(np.max(deviation)))

            chosen = np.full(n, -1, dtype=np.int64)
            r = uniforms[:, j]
            edge = np.zeros(n)
            for c, prob in enumerate(probs):
                edge = edge + prob
                chosen[(chosen < 0) & (r < edge)] = c
            if k in forced:
                chosen[:] = forced[k]

            new_states = smooth
            new_norm2 = p_o
            jumped = chosen >= 0
            if np.any(jumped):
                new_states = smooth.copy()
                new_norm2 = p_o.copy()
                for c in np.unique(chosen[jumped]):
                    rows = np.flatnonzero(chosen == c)
                    landed = apply(jump_ops[c][j], states[rows])
                    new_states[rows] = landed
                    new_norm2[rows] = norm_squared(landed)
                if np.any(new_norm2[jumped] <= 0.0):
                    raise ValueError(f"jump at step {step_offset + k} has zero probability")

            overlap = inner(states, new_states)
            phase = np.angle(overlap)
            outcome.smooth_sum[~jumped] -= phase[~jumped]
            if np.any(jumped):
                outcome.jump_sum[jumped] -= phase[jumped]
                singular = jumped & (np.abs(overlap) <= EPS_OVERLAP * np.sqrt(new_norm2))
                outcome.singular_jump |= singular
                outcome.n_jumps[jumped] += 1
                event_time = time_offset + float(times[j])
                for i in np.flatnonzero(jumped):
                    outcome.events[i].append(
                        JumpEvent(
                            label=labels[chosen[i]], time=event_time, step_index=step_offset + k
                        )
                    )

            states = new_states / np.sqrt(new_norm2)[:, None]
            if (k + 1) in sample_lookup:
                outcome.samples[:, sample_lookup[k + 1]] = states
            if outcome.history is not None:
                outcome.history[:, k + 1] = states

    outcome.states = states
    return outcome


def step(
    state: PureState | ArrayLike,
    p: ModelParams,
    t: float,
    rng: np.random.Generator,
    forced: JumpChannel | str | None = None,
    step_index: int = 0,
) -> tuple[NDArray[np.complex128], JumpEvent | None]:
    """
    One Monte Carlo step of size p.dt starting at time t.

    Args:
        state: Current state (normalized on output regardless of input norm)
        p: Model parameters
        t: Time at the start of the step
        rng: Stream supplying the single uniform of this step
        forced: Channel to fire regardless of the draw
        step_index: Index recorded in the event and in guard errors

    Returns:
        (new normalized state, JumpEvent or None)

    Raises:
        StepTooCoarse: If p_o + sum p_alpha deviates from 1 by more than 1e-4
    """
    psi = as_amplitudes(state)
    psi = psi / math.sqrt(float(norm_squared(psi)))
    k_o, jumps = kraus_step_ops(p, t)
    smooth = apply(k_o, psi)
    probs = [float(norm_squared(apply(op, psi))) for _, op in jumps]
    p_o = float(norm_squared(smooth))
    deviation = abs(p_o + sum(probs) - 1.0)
    if deviation > PROBABILITY_TOL:
        raise StepTooCoarse(step_index, t, deviation)

    r = rng.random()
    chosen = None
    if forced is not None:
        labels = [label for label, _ in jumps]
        channel = JumpChannel(forced)
        if channel not in labels:
            raise ValueError(f"cannot force a {channel.value} jump: channel has zero rate")
        chosen = labels.index(channel)
    else:
        edge = 0.0
        for c, prob in enumerate(probs):
            edge += prob
            if r < edge:
                chosen = c
                break

    if chosen is None:
        return smooth / math.sqrt(p_o), None
    label, op = jumps[chosen]
    landed = apply(op, psi)
    event = JumpEvent(label=label, time=t, step_index=step_index)
    return landed / math.sqrt(float(norm_squared(landed))), event


def _finish_gp(
    initial: NDArray[np.complex128], outcome: BatchState
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    gp, singular_final = gp_from_sums(initial, outcome.states, outcome.smooth_sum, outcome.jump_sum)
    gp = np.where(outcome.singular_jump, np.nan, gp)
    return gp, singular_final


def prepare_run(
    p: ModelParams, duration: float, initial: PureState | ArrayLike, resolve_dt: bool
) -> tuple[ModelParams, int, NDArray[np.complex128]]:
    """Normalize the initial state and fix the step for a run of the given duration."""
    psi = as_amplitudes(initial)
    psi = psi / math.sqrt(float(norm_squared(psi)))
    if resolve_dt:
        p = resolve_time_step(p, psi)
    n_steps, dt_eff = time_grid(duration, p.dt)
    if dt_eff != p.dt:
        p = p.replace(dt=dt_eff)
    return p, n_steps, psi


def run_trajectory(
    p: ModelParams,
    duration: float,
    initial: PureState | ArrayLike,
    rng: np.random.Generator | None = None,
    *,
    trajectory_id: int | None = None,
    forced_jumps: ForcedJumps | None = None,
    keep_history: bool = False,
    resolve_dt: bool = True,
) -> TrajectoryRecord:
    """
    Propagate a single monitored trajectory over [0, duration].

    Args:
        p: Model parameters
        duration: Evolution time
        initial: Initial state
        rng: Random stream; defaults to the keyed stream of (p.seed, trajectory_id or 0)
        trajectory_id: Id recorded in the output
        forced_jumps: step index -> channel, overriding the draw at those steps
        keep_history: Keep every normalized state (debug)
        resolve_dt: Halve dt until the probability guard passes for the initial state

    Returns:
        TrajectoryRecord with events, online GP sums and the GP (None when singular)
    """
    p_run, n_steps, psi = prepare_run(p, duration, initial, resolve_dt)
    if rng is None:
        rng = trajectory_rng(p.seed, trajectory_id or 0)
    outcome = propagate_batch(
        p_run,
        n_steps,
        new_batch(psi[None, :].copy()),
        [rng],
        forced=resolve_forced(p_run, forced_jumps),
        keep_history=keep_history,
    )
    gp, singular_final = _finish_gp(psi, outcome)
    return TrajectoryRecord(
        trajectory_id=trajectory_id,
        seed=p.seed if trajectory_id is not None else None,
        events=outcome.events[0],
        n_steps=n_steps,
        dt=p_run.dt,
        initial_state=PureState(amplitudes=psi),
        final_state=PureState(amplitudes=outcome.states[0]),
        pancharatnam_sum=float(outcome.smooth_sum[0]),
        jump_phase_sum=float(outcome.jump_sum[0]),
        gp=None if np.isnan(gp[0]) else float(gp[0]),
        singular_jump=bool(outcome.singular_jump[0]),
        singular_final=bool(singular_final[0]),
        history=None if outcome.history is None else outcome.history[0],
    )


def run_ensemble(
    p: ModelParams,
    duration: float,
    initial: PureState | ArrayLike,
    trajectory_ids: Sequence[int] | NDArray[np.int64],
    *,
    sample_steps: Sequence[int] = (),
    keep_records: bool = False,
    resolve_dt: bool = True,
) -> EnsembleResult:
    """
    Propagate a batch of trajectories in lock-step.

    Args:
        p: Model parameters (p.seed keys the streams)
        duration: Evolution time
        initial: Common initial state
        trajectory_ids: Ids of the keyed streams to run
        sample_steps: Step indices at which normalized states are kept
        keep_records: Also build a TrajectoryRecord per trajectory
        resolve_dt: Halve dt until the probability guard passes

    Returns:
        EnsembleResult ordered as trajectory_ids
    """
    ids = np.asarray(trajectory_ids, dtype=np.int64)
    p_run, n_steps, psi = prepare_run(p, duration, initial, resolve_dt)
    bad = [step for step in sample_steps if not 0 <= step <= n_steps]
    if bad:
        raise ValueError(f"sample steps {bad} outside the grid [0, {n_steps}]")

    outcome = propagate_batch(
        p_run,
        n_steps,
        new_batch(np.tile(psi, (len(ids), 1))),
        batch_rngs(p.seed, ids),
        sample_steps=sample_steps,
    )
    gp, singular_final = _finish_gp(psi, outcome)

    records = None
    if keep_records:
        records = [
            TrajectoryRecord(
                trajectory_id=int(tid),
                seed=p.seed,
                events=outcome.events[i],
                n_steps=n_steps,
                dt=p_run.dt,
                initial_state=PureState(amplitudes=psi),
                final_state=PureState(amplitudes=outcome.states[i]),
                pancharatnam_sum=float(outcome.smooth_sum[i]),
                jump_phase_sum=float(outcome.jump_sum[i]),
                gp=None if np.isnan(gp[i]) else float(gp[i]),
                singular_jump=bool(outcome.singular_jump[i]),
                singular_final=bool(singular_final[i]),
            )
            for i, tid in enumerate(ids)
        ]

    logger.debug(
        f"ensemble of {len(ids)} trajectories, {n_steps} steps: "
        f"{int(outcome.n_jumps.sum())} jumps, {int(np.count_nonzero(np.isnan(gp)))} excluded"
    )
    return EnsembleResult(
        trajectory_ids=ids,
        gp=gp,
        n_jumps=outcome.n_jumps,
        singular_jump=outcome.singular_jump,
        singular_final=singular_final,
        final_states=outcome.states,
        sample_steps=tuple(int(step) for step in sample_steps),
        sample_states=outcome.samples,
        dt=p_run.dt,
        records=records,
    )


def run_no_jump(
    p: ModelParams,
    duration: float,
    initial: PureState | ArrayLike,
    method: PropagatorMethod = "kraus",
    keep_history: bool = True,
) -> NoJumpRecord:
    """
    Deterministic propagation with the no-jump operator only.

    Returns:
        NoJumpRecord whose survival_probability is the product of the per-step
        no-jump probabilities and whose history holds the unnormalized psi~(t)
    """
    psi = as_amplitudes(initial)
    n_steps, dt_eff = time_grid(duration, p.dt)
    path = propagate_no_jump(p, n_steps, dt_eff, psi, method=method)
    smooth_sum = pancharatnam_sum(path.states)
    gp, singular_final = gp_from_sums(
        path.states[0], path.states[-1:], np.array([smooth_sum]), np.zeros(1)
    )
    return NoJumpRecord(
        n_steps=n_steps,
        dt=dt_eff,
        initial_state=PureState(amplitudes=path.states[0]),
        final_state=PureState(amplitudes=path.states[-1]),
        pancharatnam_sum=smooth_sum,
        gp=None if singular_final[0] else float(gp[0]),
        singular_final=bool(singular_final[0]),
        history=path.unnormalized() if keep_history else None,
        survival_probability=path.survival_probability,
        final_norm_squared=path.final_norm_squared,
        method=method,
    )
