"""Tests for the closed-form no-jump description and singular-point search."""

import math

import numpy as np
import pytest

from models.params import ModelParams
from modules.analytic import (
    analytic_coefficients,
    analytic_no_jump_state,
    coeff_odes_rhs,
    gp_no_jump_approx,
    locate_singularity,
    no_jump_overlap,
    normalized_residual,
    rot_frame_params,
    singularity_residual,
)
from modules.core import inner, wrap_phase
from modules.errors import NoRootInWindow
from modules.geometric_phase import gp_no_jump
from modules.model import eigensystem

STENCIL_H = 1e-3


def _stencil(values):
    """Five-point central derivative from samples at t - 2h ... t + 2h."""
    return (values[0] - 8 * values[1] + 8 * values[3] - values[4]) / (12 * STENCIL_H)


def test_eps_squares_to_the_characteristic_value(reference_params):
    rot = rot_frame_params(reference_params)
    expected = rot.nu**2 + (reference_params.Omega * math.sin(reference_params.theta)) ** 2
    assert abs(rot.eps**2 - expected) < 1e-13
    flipped = rot_frame_params(reference_params, eps_ref=-rot.eps)
    assert flipped.eps == pytest.approx(-rot.eps)


@pytest.mark.parametrize("branch", [1, -1])
@pytest.mark.parametrize("t", [0.0, 37.5, 900.0])
def test_mean_drift_solution_satisfies_its_equations(reference_params, branch, t):
    times = t + STENCIL_H * np.arange(-2, 3)
    c_plus, c_minus = analytic_coefficients(reference_params, times, branch)
    d_plus, d_minus = coeff_odes_rhs(c_plus[2], c_minus[2], reference_params, t, mean_f=True)
    assert abs(_stencil(c_plus) - d_plus) < 1e-8
    assert abs(_stencil(c_minus) - d_minus) < 1e-8


def test_mean_drift_solution_starts_on_the_eigenstate(reference_params):
    c_plus, c_minus = analytic_coefficients(reference_params, 0.0)
    assert complex(c_plus) == pytest.approx(1.0)
    assert complex(c_minus) == pytest.approx(0.0)
    state = analytic_no_jump_state(reference_params, 0.0)
    assert abs(inner(eigensystem(reference_params, 0.0).state_plus, state.amplitudes)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        analytic_coefficients(reference_params, 1.0, branch=2)


def test_normalized_residual_is_bounded(reference_params):
    for omega_ratio in (1e-3, 4.8e-3, 2e-2):
        for gamma_ratio in (0.0, 0.03, 0.3):
            p = ModelParams.from_ratios(omega_ratio, gamma_ratio, 0.34, dt=1e-3)
            assert 0.0 <= normalized_residual(p) <= 1.0 + 1e-12


def test_normalized_residual_scales_the_raw_residual():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34)
    rot = rot_frame_params(p)
    twist = abs(np.exp(2j * math.pi * rot.eps / p.Omega))
    scale = abs(rot.nu + rot.eps) + abs(rot.nu - rot.eps) * twist
    assert normalized_residual(p) == pytest.approx(abs(singularity_residual(p)) / scale, rel=1e-9)


def test_approximate_no_jump_phase_matches_the_propagator(reference_params):
    numeric = gp_no_jump(reference_params, method="magnus", dt=1e-2)
    assert abs(wrap_phase(gp_no_jump_approx(reference_params) - numeric)) < 1e-2


def test_approximate_phase_is_nan_when_the_damping_factor_overflows():
    p = ModelParams.from_ratios(1e-3, 0.5, 0.34)
    assert math.isnan(gp_no_jump_approx(p))


def test_no_singular_point_at_the_pole():
    with pytest.raises(NoRootInWindow):
        locate_singularity(0.0, (4e-3, 6e-3), (0.02, 0.04), grid_points=5)


def test_search_window_must_be_ordered():
    with pytest.raises(ValueError):
        locate_singularity(1.0, (6e-3, 4e-3), (0.02, 0.04))


@pytest.mark.slow
def test_singular_point_at_the_reference_angle():
    omega_ratio, gamma_ratio = locate_singularity(0.34 * math.pi, (4.5e-3, 5.2e-3), (0.025, 0.036))
    assert omega_ratio == pytest.approx(4.8082e-3, rel=2e-4)
    assert gamma_ratio == pytest.approx(0.0306, rel=2e-3)
    p = ModelParams.from_ratios(omega_ratio, gamma_ratio, 0.34, dt=1e-2)
    assert no_jump_overlap(p) < 1e-6
