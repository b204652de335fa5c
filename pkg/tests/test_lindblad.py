"""Tests for the master-equation integrator and its agreement with the trajectories."""

import numpy as np
import pytest

from models.histogram import DEFAULT_BINS
from models.states import DensityMatrix
from modules.circular_stats import background_flatness, find_peaks, from_samples
from modules.core import outer
from modules.errors import IntegrationDiverged
from modules.experiment_utils import unravelling_distances
from modules.lindblad import (
    ensemble_density,
    integrate,
    lindblad_rhs,
    superoperator,
    trace_distance,
)
from modules.model import eigensystem

RHO = np.array([[0.6, 0.25 - 0.1j], [0.25 + 0.1j, 0.4]])


def test_generator_preserves_trace_and_hermiticity(fast_params):
    drho = lindblad_rhs(RHO, fast_params.replace(gamma_z=0.01, gamma_plus=0.02), 4.2)
    assert abs(np.trace(drho)) < 1e-14
    np.testing.assert_allclose(drho, drho.conj().T, atol=1e-14)


def test_superoperator_acts_on_row_major_vectors(fast_params):
    p = fast_params.replace(gamma_z=0.01, gamma_plus=0.02)
    vec = superoperator(p, 4.2) @ RHO.reshape(4)
    np.testing.assert_allclose(vec.reshape(2, 2), lindblad_rhs(RHO, p, 4.2), atol=1e-14)
    assert superoperator(p, np.array([0.0, 1.0, 2.0])).shape == (3, 4, 4)


def test_closed_evolution_keeps_the_state_pure(closed_params):
    psi = eigensystem(closed_params, 0.0).state_plus
    path = integrate(DensityMatrix.from_state(psi), closed_params, closed_params.period / 4, sample_every=100)
    assert path.times[0] == 0.0
    assert path.times[-1] == pytest.approx(closed_params.period / 4)
    assert path.at(-1).purity == pytest.approx(1.0, abs=1e-8)


def test_damped_evolution_stays_physical(fast_params, psi_plus):
    path = integrate(outer(psi_plus, psi_plus), fast_params, fast_params.period / 2, sample_every=500)
    traces = np.trace(path.rhos, axis1=1, axis2=2).real
    np.testing.assert_allclose(traces, 1.0, atol=1e-12)
    assert all(np.linalg.eigvalsh(rho)[0] > -1e-10 for rho in path.rhos)
    assert path.at(-1).purity < 1.0


def test_invalid_initial_state_is_rejected(fast_params):
    with pytest.raises(IntegrationDiverged):
        integrate(np.array([[1.0, 0.5], [0.0, 0.0]]), fast_params, 1.0)
    with pytest.raises(ValueError):
        integrate(RHO, fast_params, 1.0, sample_every=0)


def test_trace_distance_bounds():
    up, down = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert trace_distance(RHO, RHO) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(outer(up, up), outer(down, down)) == pytest.approx(1.0)
    assert trace_distance(outer(up, up), np.eye(2) / 2) == pytest.approx(0.5)


def test_ensemble_density_averages_projectors():
    states = np.array([[2.0, 0.0], [0.0, 1j], [1.0, 1.0]])
    rho = ensemble_density(states)
    np.testing.assert_allclose(rho, np.array([[0.5, 1 / 6], [1 / 6, 0.5]]), atol=1e-14)


@pytest.mark.parametrize("lambda_disp", [0.0, 0.01])
def test_trajectory_average_reproduces_the_master_equation(fast_params, lambda_disp):
    p = fast_params.replace(n_traj=400, lambda_disp=lambda_disp)
    table, ensemble = unravelling_distances(p, p.period / 4, workers=1, chunk_size=200)
    assert len(ensemble) == 400
    assert table["time"].iloc[0] == 0.0
    assert table["trace_distance"].iloc[0] == pytest.approx(0.0, abs=1e-12)
    assert (table["trace_distance"] < table["bound"]).all()


def test_integrator_converges_at_fourth_order(fast_params, psi_plus):
    rho0 = outer(psi_plus, psi_plus)
    finals = [integrate(rho0, fast_params, 16.0, dt=dt).rhos[-1] for dt in (0.2, 0.1, 0.05, 0.025, 0.0125)]
    changes = [float(np.max(np.abs(a - b))) for a, b in zip(finals[:-1], finals[1:], strict=True)]
    assert changes[0] / changes[1] == pytest.approx(16.0, rel=0.2)
    assert changes[-1] < 1e-6


@pytest.mark.slow
def test_both_unravellings_reproduce_the_master_equation_over_a_period(reference_params):
    chi2 = {}
    for lambda_disp in (0.0, 2.5e-5):
        p = reference_params.replace(lambda_disp=lambda_disp)
        table, ensemble = unravelling_distances(p, p.period, workers=4, chunk_size=500)
        assert len(ensemble) == 10_000
        assert (table["trace_distance"] < 3.0 / 100).all()
        h = from_samples(ensemble.gp, DEFAULT_BINS)
        chi2[lambda_disp], _ = background_flatness(h, find_peaks(h, 5e-3))
    assert chi2[2.5e-5] < chi2[0.0]
