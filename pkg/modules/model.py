"""
Operators of the cyclically driven, dissipative qubit.

Every function accepts a scalar time or an array of times and returns operators
with the time axes leading, so the propagators can build whole blocks of steps
at once.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.params import ModelParams
from models.states import EigenPair
from models.trajectory import JumpChannel
from modules.core import IDENTITY, SIGMA_X, SIGMA_Z, Matrix2c, apply, dagger, inner, matmul, outer

LabeledOps = list[tuple[JumpChannel, Matrix2c]]


def azimuth(p: ModelParams, t: ArrayLike) -> NDArray[np.float64]:
    return p.drive_sign * p.Omega * np.asarray(t, dtype=np.float64)


def field_direction(
    p: ModelParams, t: ArrayLike
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """Unit vector of the field at time(s) t."""
    phi = azimuth(p, t)
    sin_theta = np.sin(p.theta)
    return (
        sin_theta * np.cos(phi),
        sin_theta * np.sin(phi),
        np.cos(p.theta) * np.ones_like(phi),
    )


def hamiltonian(p: ModelParams, t: ArrayLike) -> Matrix2c:
    """H(t) = (omega/2) n(t) . sigma."""
    nx, ny, nz = field_direction(p, t)
    half = 0.5 * p.omega
    h = np.empty((*np.shape(nx), 2, 2), dtype=np.complex128)
    h[..., 0, 0] = half * nz
    h[..., 1, 1] = -half * nz
    h[..., 0, 1] = half * (nx - 1j * ny)
    h[..., 1, 0] = half * (nx + 1j * ny)
    return h


def _canonical_phase(v: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Make the first nonzero component real and positive."""
    lead = np.where(np.abs(v[..., 0]) > 0, v[..., 0], v[..., 1])
    return v * np.conj(lead / np.abs(lead))[..., None]


def _align(v: NDArray[np.complex128], ref: NDArray[np.complex128]) -> NDArray[np.complex128]:
    """Rephase v so that <ref|v> is real and positive."""
    z = inner(ref, v)
    magnitude = np.abs(z)
    phase = np.where(magnitude > 0, z / np.where(magnitude > 0, magnitude, 1.0), 1.0)
    return v * np.conj(phase)[..., None]


def eigenvectors(
    p: ModelParams, t: ArrayLike
) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """
    Closed-form eigenvectors (psi_plus, psi_minus) of H(t).

    psi_plus = (cos(theta/2), e^{i phi} sin(theta/2)) and
    psi_minus = (sin(theta/2), -e^{i phi} cos(theta/2)) are single valued along the
    drive and satisfy Re<psi(t)|psi(t+dt)> > 0 for any step shorter than half a period.
    """
    phi = azimuth(p, t)
    half = 0.5 * p.theta
    c, s = np.cos(half), np.sin(half)
    rotor = np.exp(1j * phi)
    ones = np.ones_like(rotor)
    plus = np.stack([c * ones, s * rotor], axis=-1)
    minus = np.stack([s * ones, -c * rotor], axis=-1)
    return _canonical_phase(plus), _canonical_phase(minus)


def eigensystem(p: ModelParams, t: ArrayLike, gauge_ref: EigenPair | None = None) -> EigenPair:
    """
    Instantaneous eigensystem of H(t).

    Args:
        p: Model parameters
        t: Time or array of times
        gauge_ref: Previous eigensystem; when given each eigenvector is rephased so
            that its overlap with the reference is real and positive

    Returns:
        EigenPair with energies +-omega/2
    """
    plus, minus = eigenvectors(p, t)
    if gauge_ref is not None:
        plus = _align(plus, gauge_ref.state_plus)
        minus = _align(minus, gauge_ref.state_minus)
    return EigenPair(
        energy_plus=0.5 * p.omega,
        energy_minus=-0.5 * p.omega,
        state_plus=plus,
        state_minus=minus,
    )


def lindblad_ops(p: ModelParams, eig: EigenPair) -> LabeledOps:
    """
    Lindblad operators in the fixed channel order (minus, plus, dephase, z).

    Decay and excitation are weighted by the sigma_x transition element between
    the instantaneous eigenstates, eigenbasis dephasing by the diagonal elements.
    Channels with zero rate are omitted.
    """
    plus, minus = eig.state_plus, eig.state_minus
    sx_plus = apply(SIGMA_X, plus)
    sx_minus = apply(SIGMA_X, minus)
    x_mp = np.asarray(inner(minus, sx_plus))
    x_pp = np.asarray(inner(plus, sx_plus).real)
    x_mm = np.asarray(inner(minus, sx_minus).real)

    ops: LabeledOps = []
    if p.gamma_minus > 0:
        ops.append((JumpChannel.MINUS, np.sqrt(p.gamma_minus) * x_mp[..., None, None] * outer(minus, plus)))
    if p.gamma_plus > 0:
        x_pm = np.conj(x_mp)
        ops.append((JumpChannel.PLUS, np.sqrt(p.gamma_plus) * x_pm[..., None, None] * outer(plus, minus)))
    if p.gamma_d > 0:
        dephase = x_pp[..., None, None] * outer(plus, plus) + x_mm[..., None, None] * outer(minus, minus)
        ops.append((JumpChannel.DEPHASE, np.sqrt(p.gamma_d) * dephase))
    if p.gamma_z > 0:
        shape = (*plus.shape[:-1], 2, 2)
        ops.append((JumpChannel.Z, np.sqrt(p.gamma_z) * np.broadcast_to(SIGMA_Z, shape).copy()))
    return ops


def displace(
    h: Matrix2c, ops: LabeledOps, lambda_disp: float, displace_z: bool = True
) -> tuple[Matrix2c, LabeledOps]:
    """
    Shift every jump operator by sqrt(lambda) and compensate in the Hamiltonian.

    L' = L + sqrt(lambda) 1 and H' = H - (i sqrt(lambda)/2) sum (L - L^dagger) leave the
    master equation unchanged while changing the unravelling.
    """
    if lambda_disp <= 0:
        return h, ops
    root = np.sqrt(lambda_disp)
    h_shifted = np.array(h, dtype=np.complex128, copy=True)
    shifted: LabeledOps = []
    for label, op in ops:
        if label is JumpChannel.Z and not displace_z:
            shifted.append((label, op))
            continue
        h_shifted = h_shifted - 0.5j * root * (op - dagger(op))
        shifted.append((label, op + root * IDENTITY))
    return h_shifted, shifted


def generators(p: ModelParams, t: ArrayLike) -> tuple[Matrix2c, Matrix2c, LabeledOps]:
    """
    Hamiltonian, no-jump generator and jump operators used for stepping.

    Returns:
        (H', G, ops') where G = H' - (i/2) sum L'^dagger L' and primes denote the
        displaced set when lambda_disp > 0
    """
    h = hamiltonian(p, t)
    ops = lindblad_ops(p, eigensystem(p, t))
    h, ops = displace(h, ops, p.lambda_disp, p.displace_z)
    generator = np.array(h, copy=True)
    for _, op in ops:
        generator = generator - 0.5j * matmul(dagger(op), op)
    return h, generator, ops


def no_jump_generator(p: ModelParams, t: ArrayLike) -> Matrix2c:
    """The bracket H - (i/2) sum L^dagger L that multiplies -i dt in K_o."""
    return generators(p, t)[1]


def kraus_step_ops(p: ModelParams, t: ArrayLike) -> tuple[Matrix2c, LabeledOps]:
    """
    First-order step operators at time t.

    Returns:
        (K_o, [(label, K_alpha), ...]) with K_o = 1 - i dt G and K_alpha = sqrt(dt) L_alpha
    """
    _, generator, ops = generators(p, t)
    k_o = IDENTITY - 1j * p.dt * generator
    return k_o, [(label, np.sqrt(p.dt) * op) for label, op in ops]


def drift_profile(p: ModelParams, t: ArrayLike) -> NDArray[np.float64]:
    """f(t) = cos^2(theta) + sin^2(theta) sin^2(Omega t)."""
    phi = azimuth(p, t)
    return np.cos(p.theta) ** 2 + np.sin(p.theta) ** 2 * np.sin(phi) ** 2


def drift_hamiltonian(p: ModelParams, t: ArrayLike) -> Matrix2c:
    """H_o(t) = (1 - i Gamma f(t) / (2 omega)) H(t); blind to gamma_z."""
    factor = 1.0 - 0.5j * p.Gamma * drift_profile(p, t) / p.omega
    return np.asarray(factor)[..., None, None] * hamiltonian(p, t)
