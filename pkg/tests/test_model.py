"""Tests for parameters and the operators of the driven qubit."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from models.params import ModelParams
from models.trajectory import JumpChannel
from modules.analytic import mean_drift
from modules.core import IDENTITY, apply, dagger, inner, matmul
from modules.model import (
    displace,
    drift_hamiltonian,
    drift_profile,
    field_direction,
    eigensystem,
    hamiltonian,
    kraus_step_ops,
    lindblad_ops,
    no_jump_generator,
)


def _master_rhs(h, ops, rho):
    drho = -1j * (h @ rho - rho @ h)
    for _, op in ops:
        gram = dagger(op) @ op
        drho = drho + op @ rho @ dagger(op) - 0.5 * (gram @ rho + rho @ gram)
    return drho


def test_from_ratios_sets_channel_rates():
    p = ModelParams.from_ratios(5e-3, 1e-3, 0.34, gz_ratio=0.1)
    assert p.Omega == pytest.approx(5e-3)
    assert p.gamma_minus == pytest.approx(1e-3)
    assert p.gamma_d == pytest.approx(0.32e-3)
    assert p.gamma_z == pytest.approx(1e-4)
    assert list(p.channel_rates()) == ["minus", "dephase", "z"]
    assert p.period == pytest.approx(2 * math.pi / 5e-3)


def test_coarse_step_is_rejected():
    with pytest.raises(ValidationError, match="reduce dt"):
        ModelParams.from_ratios(0.1, 5.0, 0.34, dt=0.01)


def test_displacement_counts_towards_the_step_bound():
    p = ModelParams.from_ratios(0.1, 1e-3, 0.34, dt=0.01)
    with pytest.raises(ValidationError):
        p.replace(lambda_disp=2.0)


def test_params_are_frozen_and_replace_validates():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34)
    with pytest.raises(ValidationError):
        p.theta = 0.0
    assert p.replace(seed=9).seed == 9
    with pytest.raises(ValidationError):
        p.replace(theta=4.0)


def test_moving_to_another_grid_point_keeps_the_channel_mix():
    mix = {
        "gz_ratio": 0.1,
        "gamma_plus_ratio": 0.8,
        "dephasing_ratio": 0.5,
        "lambda_ratio": 2e-3,
        "displace_z": False,
    }
    base = ModelParams.from_ratios(5e-3, 1e-3, 0.34, **mix)
    moved = base.at_ratios(0.02, 4e-3, theta=0.5, dt=0.05)
    expected = ModelParams.from_ratios(0.02, 4e-3, 0.5 / math.pi, dt=0.05, **mix)
    rates = ("Omega", "Gamma", "gamma_minus", "gamma_plus", "gamma_d", "gamma_z", "lambda_disp")
    for field in (*rates, "theta"):
        assert getattr(moved, field) == pytest.approx(getattr(expected, field), rel=1e-12)
    assert moved.displace_z is False
    assert moved.dt == 0.05

    closed = ModelParams.from_ratios(5e-3, 0.0, 0.34).at_ratios(5e-3, 1e-3)
    assert closed.gamma_minus == pytest.approx(1e-3)
    assert closed.gamma_d == pytest.approx(0.32e-3)


@settings(max_examples=25)
@given(
    theta=st.floats(min_value=0.0, max_value=math.pi),
    t=st.floats(min_value=0.0, max_value=1e3),
)
def test_eigenvectors_diagonalize_the_hamiltonian(theta, t):
    p = ModelParams(Omega=0.05, theta=theta)
    eig = eigensystem(p, t)
    h = hamiltonian(p, t)
    np.testing.assert_allclose(apply(h, eig.state_plus), 0.5 * eig.state_plus, atol=1e-12)
    np.testing.assert_allclose(apply(h, eig.state_minus), -0.5 * eig.state_minus, atol=1e-12)
    assert abs(inner(eig.state_plus, eig.state_minus)) < 1e-12


def test_eigenvectors_are_single_valued_and_continuous():
    p = ModelParams.from_ratios(0.1, 0.0, 0.34)
    times = np.linspace(0.0, p.period, 2001)
    eig = eigensystem(p, times)
    steps = inner(eig.state_plus[:-1], eig.state_plus[1:])
    assert np.all(steps.real > 0)
    np.testing.assert_allclose(eig.state_plus[-1], eig.state_plus[0], atol=1e-12)
    np.testing.assert_allclose(eig.state_minus[-1], eig.state_minus[0], atol=1e-12)


def test_channels_follow_the_fixed_order():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34, gamma_plus_ratio=0.2, gz_ratio=0.1)
    labels = [label for label, _ in lindblad_ops(p, eigensystem(p, 1.0))]
    assert labels == [JumpChannel.MINUS, JumpChannel.PLUS, JumpChannel.DEPHASE, JumpChannel.Z]


@pytest.mark.parametrize("displace_z", [True, False])
def test_displacement_leaves_the_master_equation_unchanged(displace_z):
    p = ModelParams.from_ratios(0.1, 0.05, 0.34, gz_ratio=0.1, lambda_ratio=0.02)
    t = 3.7
    h = hamiltonian(p, t)
    ops = lindblad_ops(p, eigensystem(p, t))
    h_disp, ops_disp = displace(h, ops, p.lambda_disp, displace_z)
    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    np.testing.assert_allclose(_master_rhs(h_disp, ops_disp, rho), _master_rhs(h, ops, rho), atol=1e-13)
    z_op = dict(ops_disp)[JumpChannel.Z]
    assert np.allclose(z_op, dict(ops)[JumpChannel.Z]) != displace_z


def test_drift_profile_averages_to_its_mean():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34)
    times = np.linspace(0.0, p.period, 4096, endpoint=False)
    assert float(np.mean(drift_profile(p, times))) == pytest.approx(mean_drift(p.theta), abs=1e-12)


def test_kraus_operators_are_complete_to_second_order():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34, gz_ratio=0.1)
    k_o, jumps = kraus_step_ops(p, 12.0)
    total = matmul(dagger(k_o), k_o)
    for _, k in jumps:
        total = total + matmul(dagger(k), k)
    assert np.max(np.abs(total - IDENTITY)) < 5 * p.dt**2


def _traceless(m):
    return m - np.trace(m, axis1=-2, axis2=-1)[..., None, None] * IDENTITY / 2


def test_no_jump_generator_is_the_drift_hamiltonian_up_to_the_identity():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34, gz_ratio=0.1)
    times = np.array([0.0, 2.5, 11.0, 40.0])
    np.testing.assert_allclose(
        _traceless(no_jump_generator(p, times)), drift_hamiltonian(p, times), atol=1e-12
    )
    with_plus = p.replace(gamma_plus=0.01)
    assert not np.allclose(_traceless(no_jump_generator(with_plus, 2.5)), drift_hamiltonian(with_plus, 2.5))


def test_field_turns_once_per_period_at_fixed_polar_angle():
    p = ModelParams.from_ratios(0.1, 0.05, 0.34)
    times = np.linspace(0.0, p.period, 9)
    nx, ny, nz = field_direction(p, times)
    np.testing.assert_allclose(nx**2 + ny**2 + nz**2, 1.0, atol=1e-14)
    np.testing.assert_allclose(nz, math.cos(p.theta), atol=1e-14)
    np.testing.assert_allclose([nx[0], ny[0]], [nx[-1], ny[-1]], atol=1e-12)
    reversed_nx, reversed_ny, _ = field_direction(p.replace(drive_sign=-1), times)
    np.testing.assert_allclose(reversed_ny, -ny, atol=1e-14)
    np.testing.assert_allclose(reversed_nx, nx, atol=1e-14)
