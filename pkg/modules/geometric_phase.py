"""
Geometric phases of pure-state paths, trajectories and mixed-state paths.

All phases are returned wrapped into (-pi, pi].
"""

import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.analytic import ReferencePhases
from models.histogram import CircularHistogram
from models.params import ModelParams
from models.states import DensityMatrix, LindbladPath, PureState
from models.trajectory import GpAccumulator
from modules.analytic import gp_no_jump_approx
from modules.circular_stats import circular_mean
from modules.core import EPS_OVERLAP, arg_overlap, as_amplitudes, inner, norm_squared, wrap_phase
from modules.errors import DegenerateSpectrum, SingularOverlap
from modules.model import eigensystem
from modules.propagators import NoJumpPath, PropagatorMethod, propagate_no_jump, time_grid

logger = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-8


def pancharatnam_sum(states: ArrayLike, tol: float = EPS_OVERLAP) -> float:
    """
    -sum_k arg<psi_k|psi_k+1> along an ordered sequence of states.

    Raises:
        SingularOverlap: If a consecutive overlap vanishes; pair_index names the first one
    """
    arr = as_amplitudes(states)
    if len(arr) < 2:
        return 0.0
    z = inner(arr[:-1], arr[1:])
    scale = np.sqrt(norm_squared(arr[:-1]) * norm_squared(arr[1:]))
    vanishing = ~(np.abs(z) > tol * scale)
    if np.any(vanishing):
        index = int(np.argmax(vanishing))
        raise SingularOverlap(
            f"consecutive overlap {index} -> {index + 1} vanishes (|z| = {abs(z[index]):.3e})",
            pair_index=index,
        )
    return -float(np.sum(np.angle(z)))


def gp_pancharatnam(states: ArrayLike, tol: float = EPS_OVERLAP) -> float:
    """
    Discrete Pancharatnam phase arg<psi_1|psi_N> - sum_k arg<psi_k|psi_k+1>.

    Invariant under independent rephasing and positive rescaling of every state.

    Args:
        states: Ordered states, shape (N, 2); any norms
        tol: Relative threshold below which an overlap counts as zero

    Returns:
        Wrapped phase; 0 for fewer than two states

    Raises:
        SingularOverlap: If a consecutive or the closing overlap vanishes
    """
    arr = as_amplitudes(states)
    if len(arr) < 2:
        return 0.0
    chain = pancharatnam_sum(arr, tol)
    closing = complex(inner(arr[0], arr[-1]))
    scale = math.sqrt(float(norm_squared(arr[0]) * norm_squared(arr[-1])))
    if not abs(closing) > tol * scale:
        raise SingularOverlap(
            f"closing overlap <psi_1|psi_N> vanishes (|z| = {abs(closing):.3e})",
            pair_index=len(arr) - 1,
        )
    return wrap_phase(np.angle(closing) + chain)


def gp_trajectory(acc: GpAccumulator, final: PureState | ArrayLike) -> float:
    """
    Geometric phase of a monitored trajectory from its online sums.

    Raises:
        SingularOverlap: If the final state is orthogonal to the initial one
    """
    closing = arg_overlap(acc.initial_state, final)
    return wrap_phase(closing + acc.pancharatnam_sum + acc.jump_phase_sum)


def gp_from_sums(
    initial: ArrayLike,
    finals: ArrayLike,
    smooth_sums: ArrayLike,
    jump_sums: ArrayLike,
) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
    """
    Vectorized gp_trajectory over a batch sharing one initial state.

    Returns:
        (phases with NaN where the closing overlap vanishes, singular-final flags)
    """
    psi0 = as_amplitudes(initial)
    finals = as_amplitudes(finals)
    z = inner(psi0[None, :], finals)
    scale = np.sqrt(norm_squared(psi0) * norm_squared(finals))
    singular = ~(np.abs(z) > EPS_OVERLAP * scale)
    raw = np.angle(z) + np.asarray(smooth_sums) + np.asarray(jump_sums)
    phases = np.full(len(finals), np.nan)
    if np.any(~singular):
        phases[~singular] = wrap_phase(raw[~singular])
    return phases, singular


def no_jump_path(
    p: ModelParams,
    duration: float | None = None,
    initial: PureState | ArrayLike | None = None,
    method: PropagatorMethod = "kraus",
    dt: float | None = None,
) -> NoJumpPath:
    """No-jump history over one period from psi_plus(0) unless told otherwise."""
    duration = p.period if duration is None else duration
    psi = eigensystem(p, 0.0).state_plus if initial is None else as_amplitudes(initial)
    n_steps, dt_eff = time_grid(duration, p.dt if dt is None else dt)
    return propagate_no_jump(p, n_steps, dt_eff, psi, method=method)


def gp_no_jump(
    p: ModelParams,
    duration: float | None = None,
    initial: PureState | ArrayLike | None = None,
    method: PropagatorMethod = "kraus",
    dt: float | None = None,
) -> float:
    """
    Pancharatnam phase of the no-jump history psi~(t).

    Args:
        p: Model parameters
        duration: Evolution time (default one period)
        initial: Initial state (default psi_plus(0))
        method: No-jump propagator
        dt: Step override (default p.dt)

    Raises:
        SingularOverlap: If psi~(T) is orthogonal to the initial state
    """
    return gp_pancharatnam(no_jump_path(p, duration, initial, method, dt).states)


def unitary_gp(
    p: ModelParams, method: PropagatorMethod = "magnus", dt: float | None = None
) -> float:
    """Closed-system GP at the same drive: gp_no_jump with every rate set to zero."""
    closed = p.replace(
        Gamma=0.0, gamma_minus=0.0, gamma_plus=0.0, gamma_d=0.0, gamma_z=0.0, lambda_disp=0.0
    )
    return gp_no_jump(closed, method=method, dt=dt)


def berry_phase(theta: float, branch: int = 1) -> float:
    """Adiabatic Berry phase -pi(1 -+ cos theta) of the upper (+1) or lower (-1) eigenstate."""
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1, got {branch}")
    return wrap_phase(-math.pi * (1.0 - branch * math.cos(theta)))


def _rho_stack(rho_path: LindbladPath | Sequence[DensityMatrix] | ArrayLike) -> np.ndarray:
    if isinstance(rho_path, LindbladPath):
        return np.asarray(rho_path.rhos)
    if len(rho_path) and isinstance(rho_path[0], DensityMatrix):
        return np.stack([rho.entries for rho in rho_path])
    return np.asarray(rho_path, dtype=np.complex128)


def gp_mixed(rho_path: LindbladPath | Sequence[DensityMatrix] | ArrayLike) -> float:
    """
    Interferometric geometric phase of a mixed-state path.

    arg sum_m sqrt(l_m(0) l_m(T)) <xi_m(0)|xi_m(T)> exp(-i sum_k arg<xi_m,k|xi_m,k+1>),
    summed over both eigenbranches. The product is gauge invariant, so the
    eigenvector phases returned by eigh need no fixing; branches are tracked by order.

    Raises:
        DegenerateSpectrum: If the eigenvalue gap drops below 1e-8 anywhere
        SingularOverlap: If the weighted sum vanishes
    """
    rhos = _rho_stack(rho_path)
    if rhos.ndim != 3 or rhos.shape[1:] != (2, 2) or len(rhos) < 1:
        raise ValueError(f"expected a path of 2x2 matrices, got shape {rhos.shape}")
    weights, vectors = np.linalg.eigh(rhos)
    gap = weights[:, 1] - weights[:, 0]
    if np.any(gap < DEGENERACY_GAP):
        index = int(np.argmax(gap < DEGENERACY_GAP))
        raise DegenerateSpectrum(f"eigenvalue gap {gap[index]:.3e} at sample {index}")
    weights = np.clip(weights, 0.0, None)

    total = 0j
    for branch in range(2):
        xi = vectors[:, :, branch]
        amplitude = math.sqrt(weights[0, branch] * weights[-1, branch])
        if amplitude == 0.0:
            continue
        transport = pancharatnam_sum(xi)
        total += amplitude * complex(inner(xi[0], xi[-1])) * np.exp(1j * transport)
    if not abs(total) > EPS_OVERLAP:
        raise SingularOverlap("mixed-state interference sum vanishes")
    return wrap_phase(np.angle(total))


def average_phase(h: CircularHistogram) -> float:
    """Argument of the mean resultant of a GP distribution."""
    return circular_mean(h)


def reference_phases(
    p: ModelParams,
    histogram: CircularHistogram | None = None,
    rho_path: LindbladPath | None = None,
    method: PropagatorMethod = "magnus",
    dt: float | None = None,
) -> ReferencePhases:
    """
    Bundle the characteristic phases of a parameter point.

    Quantities that cannot be evaluated (singular no-jump overlap, empty histogram,
    degenerate density matrix) are left as None.
    """
    no_jump = None
    try:
        no_jump = gp_no_jump(p, method=method, dt=dt)
    except SingularOverlap as e:
        logger.warning(f"no-jump GP undefined at these parameters: {e}")
    average = None
    if histogram is not None and histogram.n_samples > 0:
        average = average_phase(histogram)
    mixed = None
    if rho_path is not None:
        try:
            mixed = gp_mixed(rho_path)
        except (DegenerateSpectrum, SingularOverlap) as e:
            logger.warning(f"mixed-state GP undefined: {e}")
    approx = gp_no_jump_approx(p)
    return ReferencePhases(
        berry=berry_phase(p.theta),
        unitary=unitary_gp(p, method=method, dt=dt),
        no_jump=no_jump,
        no_jump_approx=None if math.isnan(approx) else approx,
        average=average,
        mixed=mixed,
    )
