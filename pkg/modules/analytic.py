"""
Closed-form description of the no-jump evolution.

Replacing f(t) by its mean 1 - sin^2(theta)/2 makes the eigenbasis coefficient
equations constant in the frame co-rotating with the field, which gives the
no-jump state, an approximate geometric phase and the condition for full
population transfer within one period. Singular points are then refined on the
numerical (exact f) propagator.
"""

import logging
import math

import numpy as np
from numpy.typing import ArrayLike
from scipy import optimize

from models.analytic import RotFrameParams
from models.params import ModelParams, grid_point
from models.states import PureState
from modules.core import inner, norm_squared, wrap_phase
from modules.errors import NoRootInWindow
from modules.model import drift_profile, eigensystem
from modules.propagators import ANALYSIS_DT, PropagatorMethod, propagate_no_jump, time_grid

logger = logging.getLogger(__name__)

SEED_GRID_POINTS = 81
SEED_RESIDUAL_MAX = 0.5
ROOT_OVERLAP_TOL = 1e-6


def mean_drift(theta: float) -> float:
    """Time average of f(t) over a period."""
    return 1.0 - 0.5 * math.sin(theta) ** 2


def rot_frame_params(p: ModelParams, eps_ref: complex | None = None) -> RotFrameParams:
    """
    nu and eps of the mean-f solution.

    Args:
        p: Model parameters
        eps_ref: Previous eps along a parameter path; the sign of eps is chosen so
            that Re(conj(eps_ref) eps) >= 0

    Returns:
        RotFrameParams with eps^2 = nu^2 + Omega^2 sin^2(theta)
    """
    sin_theta = math.sin(p.theta)
    nu = complex(p.omega - p.Omega * math.cos(p.theta), -0.5 * p.Gamma * mean_drift(p.theta))
    eps = complex(np.sqrt(nu * nu + (p.Omega * sin_theta) ** 2))
    if eps_ref is not None and (eps_ref.conjugate() * eps).real < 0:
        eps = -eps
    return RotFrameParams(nu=nu, eps=eps)


def coeff_odes_rhs(
    c_plus: complex, c_minus: complex, p: ModelParams, t: float, mean_f: bool = False
) -> tuple[complex, complex]:
    """
    Time derivatives of the eigenbasis amplitudes of psi~ under the drift Hamiltonian.

    dc_+-/dt = (-+ i omega/2 - i Omega/2 (1 -+ cos theta) -+ Gamma f(t)/4) c_+-
               + i Omega/2 sin(theta) c_-+
    """
    f = mean_drift(p.theta) if mean_f else float(drift_profile(p, t))
    cos_theta, sin_theta = math.cos(p.theta), math.sin(p.theta)
    coupling = 0.5j * p.Omega * sin_theta
    d_plus = (
        -0.5j * p.omega - 0.5j * p.Omega * (1 - cos_theta) - 0.25 * p.Gamma * f
    ) * c_plus + coupling * c_minus
    d_minus = (
        0.5j * p.omega - 0.5j * p.Omega * (1 + cos_theta) + 0.25 * p.Gamma * f
    ) * c_minus + coupling * c_plus
    return complex(d_plus), complex(d_minus)


def analytic_coefficients(p: ModelParams, t: ArrayLike, branch: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """
    Unnormalized eigenbasis amplitudes (c_+, c_-) of the mean-f solution.

    Starting from psi_plus (branch +1) or psi_minus (branch -1) at t = 0:
    c_same = cos(eps t/2) -+ i nu sin(eps t/2)/eps and c_other = i Omega sin(theta)
    sin(eps t/2)/eps, both times e^{-i Omega t/2}.
    """
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    rot = rot_frame_params(p)
    t = np.asarray(t, dtype=np.float64)
    half = 0.5 * rot.eps * t
    # sin(eps t/2)/eps, finite as eps -> 0.
    sinc = 0.5 * t * np.sinc(half / np.pi) if abs(rot.eps) > 0 else 0.5 * t
    carrier = np.exp(-0.5j * p.Omega * t)
    same = np.cos(half) - branch * 1j * rot.nu * sinc
    other = 1j * p.Omega * math.sin(p.theta) * sinc
    if branch == 1:
        return carrier * same, carrier * other
    return carrier * other, carrier * same


def analytic_no_jump_state(p: ModelParams, t: float, branch: int = 1) -> PureState:
    """Normalized mean-f no-jump state at time t in the sigma_z basis."""
    c_plus, c_minus = analytic_coefficients(p, t, branch)
    eig = eigensystem(p, t)
    amplitudes = complex(c_plus) * eig.state_plus + complex(c_minus) * eig.state_minus
    return PureState(amplitudes=amplitudes).normalized()


def gp_no_jump_approx(p: ModelParams) -> float:
    """
    Small-rate approximation of the no-jump geometric phase.

    -pi(1 - cos theta) - pi sin^2(theta) (Omega/omega + cos(theta) Omega^2/omega^2)
    - sin^2(theta)/4 (Omega/omega + cos(theta) Omega^2/omega^2) g, with
    g = (e^{-4 pi Im(nu)/Omega} - 1) / (2 Im(nu)/Omega) -> -2 pi as Im(nu) -> 0.

    Returns:
        Wrapped phase, or NaN when the environmental factor overflows
    """
    ratio = p.Omega / p.omega
    sin2 = math.sin(p.theta) ** 2
    drive = ratio + math.cos(p.theta) * ratio**2
    a = 2.0 * rot_frame_params(p).nu.imag / p.Omega
    try:
        g = -2.0 * math.pi if a == 0.0 else math.expm1(-2.0 * math.pi * a) / a
    except OverflowError:
        logger.warning(f"approximate no-jump GP overflows at Gamma={p.Gamma:.4g}, Omega={p.Omega:.4g}")
        return math.nan
    phase = -math.pi * (1 - math.cos(p.theta)) - math.pi * sin2 * drive - 0.25 * sin2 * drive * g
    return wrap_phase(phase)


def singularity_residual(p: ModelParams) -> complex:
    """(nu + eps) - (nu - eps) e^{2 pi i eps / Omega}; zero where the no-jump path ends on psi_minus."""
    rot = rot_frame_params(p)
    nu, eps = rot.nu, rot.eps
    return complex((nu + eps) - (nu - eps) * np.exp(2j * math.pi * eps / p.Omega))


def normalized_residual(p: ModelParams) -> float:
    """
    |residual| / (|nu + eps| + |nu - eps| |e^{2 pi i eps / Omega}|), in [0, 1].

    Evaluated in log space so strongly damped parameters do not overflow.
    """
    rot = rot_frame_params(p)
    nu, eps = rot.nu, rot.eps
    if nu - eps == 0:
        return 1.0
    log_a = np.log(nu + eps)
    log_b = np.log(nu - eps) + 2j * math.pi * eps / p.Omega
    scale = max(log_a.real, log_b.real)
    numerator = abs(np.exp(log_a - scale) - np.exp(log_b - scale))
    denominator = math.exp(log_a.real - scale) + math.exp(log_b.real - scale)
    return float(numerator / denominator)


def _final_state(p: ModelParams, method: PropagatorMethod, dt: float) -> tuple[np.ndarray, np.ndarray]:
    eig = eigensystem(p, 0.0)
    n_steps, dt_eff = time_grid(p.period, dt)
    path = propagate_no_jump(p, n_steps, dt_eff, eig.state_plus, method=method)
    return path.states[-1], np.stack([eig.state_plus, eig.state_minus])


def no_jump_overlap(p: ModelParams, method: PropagatorMethod = "magnus", dt: float = ANALYSIS_DT) -> float:
    """Normalized |<psi_plus(0)|psi~(T)>| of the no-jump evolution over one period."""
    final, basis = _final_state(p, method, dt)
    return float(abs(inner(basis[0], final)) / math.sqrt(float(norm_squared(final))))


def _amplitude_ratio(p: ModelParams, dt: float) -> complex:
    """c_+(T)/c_-(T) on the Magnus propagator; gauge free and zero at a singular point."""
    final, basis = _final_state(p, "magnus", dt)
    return complex(inner(basis[0], final) / inner(basis[1], final))


def locate_singularity(
    theta: float,
    omega_window: tuple[float, float],
    gamma_window: tuple[float, float],
    *,
    base: ModelParams | None = None,
    grid_points: int = SEED_GRID_POINTS,
    dt: float = ANALYSIS_DT,
    tol: float = ROOT_OVERLAP_TOL,
) -> tuple[float, float]:
    """
    Find (Omega/omega, Gamma/omega) where the no-jump path over one period ends
    orthogonal to psi_plus(0).

    The normalized mean-f residual is scanned on a grid to seed the search, then
    c_+(T)/c_-(T) of the numerical propagator is driven to zero with scipy's root
    finder in window-scaled coordinates.

    Args:
        theta: Polar angle (rad)
        omega_window: (low, high) of Omega/omega
        gamma_window: (low, high) of Gamma/omega
        base: Parameters whose channel mix, displacement and drive carry over to
            every trial point (default: gamma_minus = Gamma, gamma_d = 0.32 Gamma)
        grid_points: Seed grid points per axis
        dt: Magnus step
        tol: Largest accepted normalized overlap at the root

    Returns:
        (Omega/omega, Gamma/omega)

    Raises:
        NoRootInWindow: If the seed scan finds no candidate, the refinement leaves the
            window, or the overlap at the result is not below tol
    """
    (w_lo, w_hi), (g_lo, g_hi) = omega_window, gamma_window
    if not (0 < w_lo < w_hi and 0 <= g_lo < g_hi):
        raise ValueError(f"invalid search window {omega_window} x {gamma_window}")

    def params(omega_ratio: float, gamma_ratio: float) -> ModelParams:
        return grid_point(base, omega_ratio, gamma_ratio, theta, dt)

    omegas = np.linspace(w_lo, w_hi, grid_points)
    gammas = np.linspace(g_lo, g_hi, grid_points)
    residuals = np.array([[normalized_residual(params(w, g)) for g in gammas] for w in omegas])
    i, j = np.unravel_index(int(np.argmin(residuals)), residuals.shape)
    if residuals[i, j] > SEED_RESIDUAL_MAX:
        raise NoRootInWindow(
            f"no candidate in window (smallest normalized residual {residuals[i, j]:.3f})"
        )
    logger.info(
        f"seed Omega/omega={omegas[i]:.6g}, Gamma/omega={gammas[j]:.6g} "
        f"(normalized residual {residuals[i, j]:.3e})"
    )

    w_span, g_span = w_hi - w_lo, g_hi - g_lo

    def equations(x: np.ndarray) -> list[float]:
        omega_ratio = w_lo + x[0] * w_span
        gamma_ratio = g_lo + x[1] * g_span
        if omega_ratio <= 0 or gamma_ratio < 0:
            return [1e3, 1e3]
        ratio = _amplitude_ratio(params(omega_ratio, gamma_ratio), dt)
        return [ratio.real, ratio.imag]

    start = [(omegas[i] - w_lo) / w_span, (gammas[j] - g_lo) / g_span]
    solution = optimize.root(equations, start, method="hybr", options={"xtol": 1e-12})
    omega_ratio = w_lo + solution.x[0] * w_span
    gamma_ratio = g_lo + solution.x[1] * g_span
    if not (w_lo <= omega_ratio <= w_hi and g_lo <= gamma_ratio <= g_hi):
        raise NoRootInWindow(
            f"refinement left the window: Omega/omega={omega_ratio:.6g}, Gamma/omega={gamma_ratio:.6g}"
        )
    overlap = no_jump_overlap(params(omega_ratio, gamma_ratio), dt=dt)
    if overlap >= tol:
        raise NoRootInWindow(
            f"overlap {overlap:.3e} at Omega/omega={omega_ratio:.6g}, Gamma/omega={gamma_ratio:.6g} "
            f"did not fall below {tol:.0e}"
        )
    logger.info(f"singular point Omega/omega={omega_ratio:.8g}, Gamma/omega={gamma_ratio:.8g}")
    return float(omega_ratio), float(gamma_ratio)
