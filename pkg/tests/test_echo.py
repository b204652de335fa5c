"""Tests for the monitored spin-echo protocol."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from models.echo import EchoCategory
from models.params import ModelParams
from models.trajectory import JumpChannel, JumpEvent
from modules.circular_stats import find_peaks, from_samples, peak_mass_fraction
from modules.core import apply, inner
from modules.echo import (
    ECHO_HIGH,
    ECHO_LOW,
    adiabatic_echo_persistence,
    classify_echo,
    echo_initial_state,
    flip_operator,
    no_jump_echo,
    run_echo,
    run_echo_ensemble,
    varphi_from_persistence,
)
from modules.model import eigensystem
from modules.worker_pool import parallel_echo


def _event(label, step_index=0):
    return JumpEvent(label=label, time=float(step_index), step_index=step_index)


@given(persistence=st.floats(min_value=0.0, max_value=1.0))
def test_varphi_parametrizes_the_persistence(persistence):
    varphi = varphi_from_persistence(persistence)
    assert ECHO_LOW - 1e-12 <= varphi <= ECHO_HIGH + 1e-12
    assert math.cos(2 * varphi) ** 2 == pytest.approx(persistence, abs=1e-9)


def test_varphi_landmarks():
    assert varphi_from_persistence(1.0) == pytest.approx(1.5 * math.pi)
    assert varphi_from_persistence(0.5) == pytest.approx(1.375 * math.pi)
    assert varphi_from_persistence(0.0) == pytest.approx(1.25 * math.pi)
    np.testing.assert_allclose(varphi_from_persistence(np.array([1.0, 0.5])), [1.5 * math.pi, 1.375 * math.pi])
    with pytest.raises(ValueError):
        varphi_from_persistence(1.5)


def test_adiabatic_value():
    persistence = adiabatic_echo_persistence(0.34 * math.pi)
    assert varphi_from_persistence(persistence) == pytest.approx(1.4818 * math.pi, abs=1e-3)


def test_flip_exchanges_the_eigenstates(fast_params):
    eig = eigensystem(fast_params, 3.0)
    flip = flip_operator(fast_params, 3.0)
    assert abs(inner(eig.state_minus, apply(flip, eig.state_plus))) == pytest.approx(1.0)
    assert abs(inner(eig.state_plus, apply(flip, eig.state_minus))) == pytest.approx(1.0)
    psi0 = echo_initial_state(fast_params)
    start = eigensystem(fast_params, 0.0)
    assert abs(inner(start.state_plus, psi0)) ** 2 == pytest.approx(0.5)


@pytest.mark.parametrize(
    ("labels", "category"),
    [
        ([], EchoCategory.NO_JUMP),
        ([JumpChannel.MINUS], EchoCategory.DECAY),
        ([JumpChannel.MINUS, JumpChannel.PLUS], EchoCategory.DECAY),
        ([JumpChannel.DEPHASE, JumpChannel.Z], EchoCategory.DEPHASING),
        ([JumpChannel.MINUS, JumpChannel.DEPHASE], EchoCategory.MIXED),
    ],
)
def test_jump_records_are_classified(labels, category):
    assert classify_echo([_event(label, i) for i, label in enumerate(labels)]) is category


def test_closed_slow_echo_approaches_the_adiabatic_persistence():
    theta = 0.34 * math.pi
    p = ModelParams(Omega=1e-3, theta=theta)
    outcome = no_jump_echo(p, dt=0.1)
    assert outcome.category is EchoCategory.NO_JUMP
    assert outcome.persistence == pytest.approx(adiabatic_echo_persistence(theta), abs=1e-2)


def test_forced_decay_lands_in_the_decay_class(decay_only_params):
    outcome = run_echo(decay_only_params, trajectory_id=0, forced_jumps={100: "minus"})
    assert outcome.category is EchoCategory.DECAY
    assert outcome.record.n_jumps >= 1
    assert outcome.record.n_steps % 2 == 0
    assert math.cos(2 * outcome.varphi) ** 2 == pytest.approx(outcome.persistence, abs=1e-9)


def test_forced_jumps_address_the_reversed_leg(decay_only_params):
    outcome = run_echo(decay_only_params, trajectory_id=0, forced_jumps={15_000: "minus"})
    half = outcome.record.n_steps // 2
    assert any(event.step_index == 15_000 for event in outcome.record.events)
    assert any(event.time >= half * outcome.record.dt for event in outcome.record.events)


def test_echo_batch_matches_single_realizations(decay_only_params):
    batch = run_echo_ensemble(decay_only_params, [1, 3])
    single = run_echo(decay_only_params, trajectory_id=3)
    assert batch.persistence[1] == pytest.approx(single.persistence, abs=1e-12)
    assert batch.n_jumps[1] == single.record.n_jumps
    assert batch.categories[1] is single.category
    assert len(batch) == 2


@pytest.mark.parametrize("omega", [1.0, 1.37, 2.9])
def test_echo_cancels_the_dynamical_phase_of_the_field(omega):
    # Along the pole the state never leaves the eigenbasis; only omega*T/2 changes.
    damped = ModelParams.from_ratios(0.05, 0.01, 0.0).replace(omega=omega)
    assert no_jump_echo(damped, dt=0.05).persistence == pytest.approx(1.0, abs=1e-8)
    closed = ModelParams.from_ratios(0.05, 0.0, 0.0).replace(omega=omega)
    assert run_echo(closed, trajectory_id=0).persistence == pytest.approx(1.0, abs=1e-8)


@pytest.mark.slow
@pytest.mark.parametrize("step_index", [1_000, 20_000, 60_000, 120_000, 300_000])
def test_decay_leaves_half_persistence_whenever_it_happens(step_index):
    p = ModelParams.from_ratios(5e-3, 1e-7, 0.34, dephasing_ratio=0.0, seed=2)
    outcome = run_echo(p, trajectory_id=0, forced_jumps={step_index: "minus"})
    assert outcome.category is EchoCategory.DECAY
    assert outcome.persistence == pytest.approx(0.5, abs=0.01)


ECHO_BINS = 60
ECHO_PROMINENCE = 1e-2


def _echo_histogram(p):
    ensemble = parallel_echo(p, workers=4)
    return from_samples(ensemble.varphi, ECHO_BINS, ECHO_LOW, ECHO_HIGH)


def _mass_away_from(h, centers):
    return 1.0 - sum(peak_mass_fraction(h, center, 1.5 * h.bin_width) for center in centers)


@pytest.mark.slow
def test_echo_distribution_has_three_peaks_that_merge_for_slow_driving(reference_params):
    fast = _echo_histogram(reference_params.replace(seed=21))
    peaks = find_peaks(fast, ECHO_PROMINENCE)
    assert len(peaks) == 3
    centers = sorted(peak.center for peak in peaks)
    assert abs(centers[1] - 1.375 * math.pi) <= fast.bin_width

    slow = _echo_histogram(reference_params.replace(Omega=5e-4, n_traj=2_000, seed=21))
    central = [1.375 * math.pi]
    assert _mass_away_from(slow, central) < _mass_away_from(fast, central)


@pytest.mark.slow
def test_fixed_axis_dephasing_adds_a_broad_background(reference_params):
    p = reference_params.replace(gamma_z=0.1 * reference_params.Gamma, seed=22)
    h = _echo_histogram(p)
    peaks = find_peaks(h, ECHO_PROMINENCE)
    assert _mass_away_from(h, [peak.center for peak in peaks]) > 0.05
