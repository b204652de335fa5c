"""Shared fixtures for the trajectory simulator tests."""

import math
import os
import tempfile

# Log files go to a scratch directory, never into the working tree.
os.environ.setdefault("GPTRAJ_LOG_DIR", tempfile.mkdtemp(prefix="gptraj-logs-"))

import pytest  # noqa: E402

from models.params import ModelParams  # noqa: E402
from modules.model import eigensystem  # noqa: E402

THETA = 0.34 * math.pi


@pytest.fixture
def fast_params() -> ModelParams:
    """Fast drive and strong damping: one period is 10^4 steps and jumps are common."""
    return ModelParams.from_ratios(0.1, 0.05, 0.34, seed=7)


@pytest.fixture
def closed_params() -> ModelParams:
    """The same drive without any dissipation."""
    return ModelParams.from_ratios(0.1, 0.0, 0.34)


@pytest.fixture
def decay_only_params() -> ModelParams:
    """Decay as the only channel, so every jump record is a pure decay record."""
    return ModelParams.from_ratios(0.1, 0.05, 0.34, dephasing_ratio=0.0, seed=3)


@pytest.fixture
def reference_params() -> ModelParams:
    """Slow drive, weak damping: Omega = 5e-3 omega, Gamma = 1e-3 omega, theta = 0.34 pi."""
    return ModelParams.from_ratios(5e-3, 1e-3, 0.34, n_traj=10_000, seed=1234)


@pytest.fixture
def psi_plus(fast_params):
    return eigensystem(fast_params, 0.0).state_plus
