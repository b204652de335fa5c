"""
Fixed-step RK4 integration of the Lindblad master equation.

The generator is linear, so each RK4 step is a 4x4 matrix acting on the row-major
vectorization of rho. Step matrices are built for whole blocks of steps at once and
applied in order.
"""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.params import ModelParams
from models.states import (
    HERMITICITY_TOL,
    POSITIVITY_TOL,
    TRACE_TOL,
    DensityMatrix,
    LindbladPath,
    PureState,
)
from modules.core import IDENTITY, Matrix2c, as_amplitudes, dagger, matmul, norm_squared
from modules.errors import IntegrationDiverged
from modules.model import eigensystem, hamiltonian, lindblad_ops
from modules.propagators import time_grid

logger = logging.getLogger(__name__)

RK4_BLOCK = 8192
IDENTITY4 = np.eye(4, dtype=np.complex128)


def _as_matrix(rho: DensityMatrix | ArrayLike) -> Matrix2c:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=np.complex128)


def lindblad_rhs(rho: DensityMatrix | ArrayLike, p: ModelParams, t: float) -> Matrix2c:
    """-i[H, rho] + sum_alpha (L rho L^dagger - {L^dagger L, rho}/2) at time t."""
    rho = _as_matrix(rho)
    h = hamiltonian(p, t)
    drho = -1j * (matmul(h, rho) - matmul(rho, h))
    for _, op in lindblad_ops(p, eigensystem(p, t)):
        op_dag = dagger(op)
        gram = matmul(op_dag, op)
        drho = drho + matmul(matmul(op, rho), op_dag) - 0.5 * (matmul(gram, rho) + matmul(rho, gram))
    return drho


def superoperator(p: ModelParams, t: ArrayLike) -> NDArray[np.complex128]:
    """
    Lindblad generator on row-major vec(rho), shape (..., 4, 4).

    vec(A rho B) = (A kron B^T) vec(rho).
    """
    h = hamiltonian(p, t)
    lead = h.shape[:-2]

    def kron(a: NDArray, b: NDArray) -> NDArray:
        return np.einsum("...ij,...kl->...ikjl", a, b).reshape(*lead, 4, 4)

    eye = np.broadcast_to(IDENTITY, h.shape)
    generator = -1j * (kron(h, eye) - kron(eye, np.swapaxes(h, -1, -2)))
    for _, op in lindblad_ops(p, eigensystem(p, t)):
        gram = matmul(dagger(op), op)
        generator = (
            generator
            + kron(op, np.conj(op))
            - 0.5 * kron(gram, eye)
            - 0.5 * kron(eye, np.swapaxes(gram, -1, -2))
        )
    return generator


def rk4_step_matrices(p: ModelParams, starts: ArrayLike, dt: float) -> NDArray[np.complex128]:
    """Classic RK4 step of the linear ODE d vec(rho)/dt = A(t) vec(rho), as matrices."""
    starts = np.asarray(starts, dtype=np.float64)
    a0 = superoperator(p, starts)
    am = superoperator(p, starts + 0.5 * dt)
    a1 = superoperator(p, starts + dt)
    m1 = a0
    m2 = am @ (IDENTITY4 + 0.5 * dt * m1)
    m3 = am @ (IDENTITY4 + 0.5 * dt * m2)
    m4 = a1 @ (IDENTITY4 + dt * m3)
    return IDENTITY4 + (dt / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4)


def _clean_sample(rho: Matrix2c, time: float) -> Matrix2c:
    """Check a sampled state, then re-hermitize and renormalize its trace."""
    if not np.all(np.isfinite(rho)):
        raise IntegrationDiverged(f"non-finite density matrix at t={time:.6g}")
    asymmetry = float(np.max(np.abs(rho - rho.conj().T)))
    if asymmetry > HERMITICITY_TOL:
        raise IntegrationDiverged(f"hermiticity lost at t={time:.6g} (deviation {asymmetry:.3e})")
    trace = float(np.trace(rho).real)
    if abs(trace - 1.0) > TRACE_TOL:
        raise IntegrationDiverged(f"trace drifted to {trace:.12f} at t={time:.6g}")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / trace
    lowest = float(np.linalg.eigvalsh(rho)[0])
    if lowest < -POSITIVITY_TOL:
        raise IntegrationDiverged(f"negative eigenvalue {lowest:.3e} at t={time:.6g}")
    return rho


def integrate(
    rho0: DensityMatrix | ArrayLike,
    p: ModelParams,
    duration: float,
    sample_every: int = 1,
    dt: float | None = None,
) -> LindbladPath:
    """
    Integrate the master equation with classic RK4 on the shared time grid.

    Args:
        rho0: Initial density matrix
        p: Model parameters
        duration: Evolution time
        sample_every: Keep every k-th step (the last step is always kept)
        dt: Step override (default p.dt, shrunk to divide the duration)

    Returns:
        LindbladPath with re-hermitized, trace-normalized samples

    Raises:
        IntegrationDiverged: If a sample violates hermiticity, trace or positivity
    """
    if sample_every < 1:
        raise ValueError(f"sample_every must be >= 1, got {sample_every}")
    rho = _clean_sample(_as_matrix(rho0).copy(), 0.0)
    n_steps, dt_eff = time_grid(duration, p.dt if dt is None else dt)

    times = [0.0]
    rhos = [rho]
    vec = rho.reshape(4)
    for start in range(0, n_steps, RK4_BLOCK):
        stop = min(start + RK4_BLOCK, n_steps)
        steps = rk4_step_matrices(p, dt_eff * np.arange(start, stop), dt_eff)
        for offset, propagator in enumerate(steps):
            vec = propagator @ vec
            k = start + offset + 1
            if k % sample_every == 0 or k == n_steps:
                sample = _clean_sample(vec.reshape(2, 2), k * dt_eff)
                vec = sample.reshape(4)
                times.append(k * dt_eff)
                rhos.append(sample)

    logger.debug(f"RK4 integration: {n_steps} steps of {dt_eff:.4g}, {len(times)} samples")
    return LindbladPath(times=np.asarray(times), rhos=np.stack(rhos), dt=dt_eff)


def trace_distance(rho: DensityMatrix | ArrayLike, sigma: DensityMatrix | ArrayLike) -> float:
    """Half the trace norm of rho - sigma."""
    diff = _as_matrix(rho) - _as_matrix(sigma)
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def ensemble_density(states: Sequence[PureState] | ArrayLike) -> Matrix2c:
    """Average projector over a set of pure states of any norm."""
    if len(states) and isinstance(states[0], PureState):
        states = [state.amplitudes for state in states]
    vecs = as_amplitudes(np.asarray(states, dtype=np.complex128))
    vecs = vecs / np.sqrt(norm_squared(vecs))[:, None]
    return np.einsum("ni,nj->ij", vecs, vecs.conj()) / len(vecs)
