"""Tests for pure-state, trajectory and mixed-state geometric phases."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from models.histogram import DEFAULT_BINS
from models.params import ModelParams
from modules.circular_stats import circular_mean, circular_variance, from_samples
from modules.core import outer, wrap_phase
from modules.errors import DegenerateSpectrum, SingularOverlap
from modules.geometric_phase import (
    average_phase,
    berry_phase,
    gp_mixed,
    gp_no_jump,
    gp_pancharatnam,
    gp_trajectory,
    reference_phases,
    unitary_gp,
)
from modules.model import eigensystem
from modules.trajectory_engine import run_trajectory
from modules.worker_pool import parallel_ensemble

N_PATH = 24


def _bloch_state(polar, azimuth):
    return np.stack(
        [np.cos(polar / 2) * np.ones_like(azimuth), np.exp(1j * azimuth) * np.sin(polar / 2)],
        axis=-1,
    )


def _open_path():
    k = np.arange(N_PATH)
    return _bloch_state(0.5 + 0.03 * k, 0.1 * k)


def _latitude_loop(theta, n):
    azimuth = np.linspace(0.0, 2 * math.pi, n + 1)
    return _bloch_state(theta, azimuth)


@settings(max_examples=40)
@given(
    phases=arrays(np.float64, N_PATH, elements=st.floats(-10.0, 10.0)),
    scales=arrays(np.float64, N_PATH, elements=st.floats(0.1, 10.0)),
)
def test_pancharatnam_phase_is_gauge_invariant(phases, scales):
    path = _open_path()
    regauged = path * (scales * np.exp(1j * phases))[:, None]
    assert abs(wrap_phase(gp_pancharatnam(regauged) - gp_pancharatnam(path))) < 1e-9


def test_short_paths_have_no_phase():
    assert gp_pancharatnam(_open_path()[:1]) == 0.0


def test_orthogonal_end_point_is_singular():
    path = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(SingularOverlap) as excinfo:
        gp_pancharatnam(path)
    assert excinfo.value.pair_index == 2


@pytest.mark.parametrize("theta", [0.2, 0.34 * math.pi, 2.5])
def test_latitude_loop_gives_the_berry_phase(theta):
    assert gp_pancharatnam(_latitude_loop(theta, 20_000)) == pytest.approx(berry_phase(theta), abs=1e-6)


def test_berry_phase_branches():
    assert berry_phase(0.0) == 0.0
    assert berry_phase(math.pi / 2) == pytest.approx(-math.pi / 2)
    assert berry_phase(math.pi / 2, -1) == pytest.approx(-math.pi / 2)
    with pytest.raises(ValueError):
        berry_phase(1.0, branch=0)


def test_unitary_phase_approaches_the_berry_phase_for_slow_driving():
    theta = 0.34 * math.pi
    p = ModelParams(Omega=1e-4, theta=theta)
    assert abs(wrap_phase(unitary_gp(p, dt=1.0) - berry_phase(theta))) < 5e-3


def test_no_jump_phase_reduces_to_the_unitary_phase_without_damping(closed_params):
    phase = gp_no_jump(closed_params, method="magnus", dt=1e-2)
    assert abs(wrap_phase(phase - unitary_gp(closed_params, dt=1e-2))) < 1e-12


def test_trajectory_phase_from_online_sums(fast_params, psi_plus):
    record = run_trajectory(fast_params, fast_params.period / 8, psi_plus, trajectory_id=5)
    if record.gp is None:
        pytest.skip("trajectory ended orthogonal to its start")
    assert gp_trajectory(record.accumulator(), record.final_state) == pytest.approx(record.gp, abs=1e-12)


def test_mixed_phase_interpolates_the_branch_phases():
    theta, weight, n = 0.34 * math.pi, 0.8, 1500
    upper = _latitude_loop(theta, n)
    lower = _bloch_state(math.pi + theta, np.linspace(0.0, 2 * math.pi, n + 1))
    rhos = weight * outer(upper, upper) + (1 - weight) * outer(lower, lower)
    expected = np.angle(
        weight * np.exp(1j * berry_phase(theta)) + (1 - weight) * np.exp(1j * berry_phase(theta, -1))
    )
    assert abs(wrap_phase(gp_mixed(rhos) - expected)) < 1e-4


def test_mixed_phase_of_a_pure_path_is_the_pure_phase():
    path = _latitude_loop(0.7, 800)
    rhos = 0.999 * outer(path, path) + 0.001 * np.eye(2) / 2
    assert abs(wrap_phase(gp_mixed(rhos) - gp_pancharatnam(path))) < 1e-3


def test_mixed_phase_needs_a_spectral_gap():
    rhos = np.broadcast_to(np.eye(2) / 2, (5, 2, 2))
    with pytest.raises(DegenerateSpectrum):
        gp_mixed(rhos)


def test_average_phase_is_the_argument_of_the_mean_resultant():
    samples = np.array([3.0, -3.1, 2.9, -3.0])
    expected = np.angle(np.mean(np.exp(1j * samples)))
    assert average_phase(from_samples(samples, 72)) == pytest.approx(expected, abs=1e-12)


def test_reference_phases_bundle(reference_params):
    phases = reference_phases(reference_params.replace(theta=0.0), dt=0.05)
    assert phases.berry == 0.0
    assert abs(wrap_phase(phases.unitary)) < 1e-9
    assert phases.average is None
    assert phases.mixed is None


def test_no_jump_phase_converges_at_second_order_or_better(reference_params):
    phases = [gp_no_jump(reference_params, method="magnus", dt=dt) for dt in (0.2, 0.1, 0.05)]
    coarse = abs(wrap_phase(phases[0] - phases[1]))
    fine = abs(wrap_phase(phases[1] - phases[2]))
    assert 0.0 < fine < coarse
    assert math.log2(coarse / fine) > 1.8


def test_no_jump_phase_is_stable_under_step_halving(reference_params):
    full = gp_no_jump(reference_params)
    half = gp_no_jump(reference_params, dt=reference_params.dt / 2)
    assert abs(wrap_phase(full - half)) < 1e-4


@pytest.mark.slow
def test_phase_spread_grows_as_the_drive_slows(reference_params):
    variances, errors = [], []
    for omega_ratio in np.geomspace(5e-2, 5e-4, 10):
        p = reference_params.replace(Omega=float(omega_ratio), n_traj=2_000)
        ensemble = parallel_ensemble(p, p.period, eigensystem(p, 0.0).state_plus, workers=4)
        h = from_samples(ensemble.gp, DEFAULT_BINS)
        phases = ensemble.valid_phases
        variances.append(circular_variance(h))
        # Standard error of the mean resultant length.
        errors.append(float(np.std(np.cos(phases - circular_mean(h)))) / math.sqrt(len(phases)))
    for k in range(len(variances) - 1):
        assert variances[k + 1] >= variances[k] - 3 * math.hypot(errors[k], errors[k + 1])
    assert variances[-1] > variances[0]
