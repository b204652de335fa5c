"""Tests for keyed streams and Monte Carlo wave-function propagation."""

import math

import numpy as np
import pytest

from models.params import ModelParams
from models.trajectory import JumpChannel
from modules.core import apply, inner, norm_squared, wrap_phase
from modules.errors import StepTooCoarse
from modules.model import eigensystem, hamiltonian, kraus_step_ops, lindblad_ops
from modules.propagators import time_grid
from modules.rng import batch_rngs, draw_uniforms, trajectory_rng
from modules.trajectory_engine import (
    displaced_ops,
    resolve_time_step,
    run_ensemble,
    run_no_jump,
    run_trajectory,
    step,
)
from modules.worker_pool import chunk_ids, parallel_ensemble


def test_streams_are_keyed_by_seed_and_id():
    a = trajectory_rng(5, 17).random(4)
    b = trajectory_rng(5, 17).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, trajectory_rng(5, 18).random(4))
    assert not np.array_equal(a, trajectory_rng(6, 17).random(4))
    with pytest.raises(ValueError):
        trajectory_rng(-1, 0)


def test_uniform_blocks_continue_each_stream():
    split = batch_rngs(3, [0, 1])
    first = draw_uniforms(split, 3)
    second = draw_uniforms(split, 2)
    whole = draw_uniforms(batch_rngs(3, [0, 1]), 5)
    np.testing.assert_array_equal(np.concatenate([first, second], axis=1), whole)
    assert draw_uniforms([], 4).shape == (0, 4)


def test_displaced_operators_shift_every_present_channel(fast_params):
    t = 5.0
    h, ops = displaced_ops(fast_params, t)
    np.testing.assert_array_equal(h, hamiltonian(fast_params, t))
    direct = lindblad_ops(fast_params, eigensystem(fast_params, t))
    assert [label for label, _ in ops] == [label for label, _ in direct]

    shifted = fast_params.replace(lambda_disp=0.01)
    _, ops_shifted = displaced_ops(shifted, t)
    for (label, op), (_, base) in zip(ops_shifted, direct, strict=True):
        np.testing.assert_allclose(op - base, 0.1 * np.eye(2), atol=1e-15, err_msg=label.value)


def test_time_grid_divides_the_duration_exactly():
    n_steps, dt = time_grid(10.0, 0.3)
    assert n_steps == 34
    assert n_steps * dt == pytest.approx(10.0, rel=1e-15)
    assert dt <= 0.3
    assert time_grid(1.0, 0.25) == (4, 0.25)
    assert time_grid(0.0, 0.1) == (0, 0.1)
    with pytest.raises(ValueError):
        time_grid(-1.0, 0.1)
    with pytest.raises(ValueError):
        time_grid(1.0, 0.0)


def test_forced_step_fires_the_requested_channel(fast_params, psi_plus):
    new_state, event = step(psi_plus, fast_params, 0.0, trajectory_rng(0, 0), forced="minus", step_index=4)
    assert event is not None
    assert event.label is JumpChannel.MINUS
    assert event.step_index == 4
    assert float(norm_squared(new_state)) == pytest.approx(1.0)
    psi_minus = eigensystem(fast_params, 0.0).state_minus
    assert abs(inner(psi_minus, new_state)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_decay_cannot_fire_from_the_ground_state(fast_params):
    eig = eigensystem(fast_params, 2.0)
    _, jumps = kraus_step_ops(fast_params, 2.0)
    probs = {label: float(norm_squared(apply(op, eig.state_minus))) for label, op in jumps}
    assert probs[JumpChannel.MINUS] == pytest.approx(0.0, abs=1e-20)
    assert probs[JumpChannel.DEPHASE] > 0.0
    assert float(norm_squared(apply(dict(jumps)[JumpChannel.MINUS], eig.state_plus))) > 0.0


def test_forcing_an_absent_channel_fails(fast_params, psi_plus):
    with pytest.raises(ValueError, match="zero rate"):
        step(psi_plus, fast_params, 0.0, trajectory_rng(0, 0), forced=JumpChannel.Z)


def test_coarse_step_trips_the_probability_guard():
    p = ModelParams(Omega=0.1, theta=1.0, dt=0.5)
    with pytest.raises(StepTooCoarse) as excinfo:
        step([1.0, 0.0], p, 0.0, trajectory_rng(0, 0), step_index=2)
    assert excinfo.value.step_index == 2
    assert excinfo.value.deviation > 1e-4


def test_time_step_is_halved_until_the_guard_passes():
    p = ModelParams(Omega=0.1, theta=1.0, dt=0.5)
    resolved = resolve_time_step(p, [1.0, 0.0])
    halvings = math.log2(p.dt / resolved.dt)
    assert halvings >= 1
    assert halvings == pytest.approx(round(halvings))
    assert resolve_time_step(resolved, [1.0, 0.0]) is resolved


def test_trajectory_is_a_function_of_seed_and_id(fast_params, psi_plus):
    duration = fast_params.period / 8
    first = run_trajectory(fast_params, duration, psi_plus, trajectory_id=11)
    second = run_trajectory(fast_params, duration, psi_plus, trajectory_id=11)
    assert first.events == second.events
    assert first.gp == second.gp
    np.testing.assert_array_equal(first.final_state.amplitudes, second.final_state.amplitudes)


def test_batch_outcome_does_not_depend_on_batch_mates(fast_params, psi_plus):
    duration = fast_params.period / 8
    batch = run_ensemble(fast_params, duration, psi_plus, [0, 1, 2, 3], keep_records=True)
    alone = run_ensemble(fast_params, duration, psi_plus, [2])
    single = run_trajectory(fast_params, duration, psi_plus, trajectory_id=2)

    assert batch.n_jumps[2] == alone.n_jumps[0] == single.n_jumps
    np.testing.assert_allclose(batch.final_states[2], alone.final_states[0], atol=1e-12)
    assert batch.records[2].events == single.events
    if single.gp is not None:
        assert batch.gp[2] == pytest.approx(single.gp, abs=1e-12)


def test_chunking_and_workers_do_not_change_results(fast_params, psi_plus):
    p = fast_params.replace(n_traj=8)
    duration = p.period / 16
    reference = parallel_ensemble(p, duration, psi_plus, workers=1, chunk_size=8)
    rechunked = parallel_ensemble(p, duration, psi_plus, workers=1, chunk_size=3)
    pooled = parallel_ensemble(p, duration, psi_plus, workers=2, chunk_size=3)
    for other in (rechunked, pooled):
        np.testing.assert_array_equal(other.trajectory_ids, np.arange(8))
        np.testing.assert_array_equal(other.n_jumps, reference.n_jumps)
        np.testing.assert_array_equal(other.gp, reference.gp)


@pytest.mark.slow
def test_eight_workers_reproduce_a_single_worker_bit_for_bit(fast_params, psi_plus):
    p = fast_params.replace(n_traj=96)
    duration = p.period / 8
    single = parallel_ensemble(p, duration, psi_plus, workers=1, chunk_size=8)
    pooled = parallel_ensemble(p, duration, psi_plus, workers=8, chunk_size=8)
    np.testing.assert_array_equal(pooled.trajectory_ids, single.trajectory_ids)
    np.testing.assert_array_equal(pooled.n_jumps, single.n_jumps)
    np.testing.assert_array_equal(pooled.gp, single.gp)
    np.testing.assert_array_equal(pooled.final_states, single.final_states)


def test_chunks_cover_every_id_once():
    chunks = chunk_ids(10, 4)
    assert [len(chunk) for chunk in chunks] == [4, 4, 2]
    np.testing.assert_array_equal(np.concatenate(chunks), np.arange(10))
    with pytest.raises(ValueError):
        chunk_ids(0, 4)


def test_forced_jump_is_recorded(fast_params, psi_plus):
    record = run_trajectory(
        fast_params, fast_params.period / 16, psi_plus, trajectory_id=0, forced_jumps={10: "minus"}
    )
    assert any(e.step_index == 10 and e.label is JumpChannel.MINUS for e in record.events)
    assert record.events[0].time >= 0.0


def test_zero_duration_returns_the_initial_state(fast_params, psi_plus):
    record = run_trajectory(fast_params, 0.0, psi_plus, trajectory_id=0)
    assert record.n_steps == 0
    assert record.n_jumps == 0
    assert record.gp == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(record.final_state.amplitudes, psi_plus)


def test_closed_system_trajectory_matches_the_no_jump_path(closed_params):
    psi = [math.cos(0.3), math.sin(0.3)]
    duration = closed_params.period / 4
    record = run_trajectory(closed_params, duration, psi, trajectory_id=0)
    no_jump = run_no_jump(closed_params, duration, psi, method="kraus")
    assert record.n_jumps == 0
    assert abs(wrap_phase(record.gp - no_jump.gp)) < 1e-8


def test_no_jump_record_reports_its_survival(fast_params, psi_plus):
    record = run_no_jump(fast_params, fast_params.period / 4, psi_plus)
    assert 0.0 < record.survival_probability < 1.0
    assert record.final_norm_squared == pytest.approx(record.survival_probability, rel=1e-9)
    assert record.history.shape == (record.n_steps + 1, 2)


def test_jump_free_fraction_matches_the_survival_probability(fast_params, psi_plus):
    duration = fast_params.period / 2
    n = 400
    ensemble = run_ensemble(fast_params, duration, psi_plus, np.arange(n))
    survival = run_no_jump(fast_params, duration, psi_plus, keep_history=False).survival_probability
    fraction = float(np.mean(ensemble.n_jumps == 0))
    sigma = math.sqrt(survival * (1 - survival) / n)
    assert abs(fraction - survival) < 4 * sigma + 0.01


def test_excluded_trajectories_carry_nan_phases(fast_params, psi_plus):
    ensemble = run_ensemble(fast_params, fast_params.period / 8, psi_plus, np.arange(20))
    assert np.all(np.isnan(ensemble.gp[ensemble.excluded]))
    assert np.all(np.isfinite(ensemble.valid_phases))
    assert len(ensemble.valid_phases) == len(ensemble) - ensemble.n_excluded


@pytest.mark.slow
@pytest.mark.parametrize(
    ("omega_ratio", "gz_ratio", "expected"),
    [(5e-3, 0.0, 0.63), (5e-4, 0.0, 1.77), (5e-3, 0.1, 0.69), (5e-4, 0.1, 2.66)],
)
def test_mean_jump_count_over_one_period(omega_ratio, gz_ratio, expected):
    p = ModelParams.from_ratios(omega_ratio, 1e-3, 0.34, gz_ratio=gz_ratio, n_traj=10_000, seed=11)
    ensemble = parallel_ensemble(p, p.period, eigensystem(p, 0.0).state_plus, workers=4)
    sigma = math.sqrt(expected / len(ensemble))
    assert abs(ensemble.mean_jumps - expected) < 3 * sigma + 0.02
