"""
Shared numerical vocabulary.

Pauli matrices, phase wrapping, overlaps and the elementwise 2x2 algebra used by
the propagators. The elementwise helpers spell out every product so that the
result for one trajectory never depends on how many others share the batch.
"""

import numpy as np
from numpy.typing import ArrayLike, NDArray

from models.states import PureState
from modules.errors import SingularOverlap

EPS_OVERLAP = 1e-12

IDENTITY = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

StateVector = NDArray[np.complex128]
Matrix2c = NDArray[np.complex128]


def as_amplitudes(state: PureState | ArrayLike) -> StateVector:
    """Amplitudes of a PureState, or an array of states with trailing axis 2."""
    if isinstance(state, PureState):
        return state.amplitudes
    vec = np.asarray(state, dtype=np.complex128)
    if vec.ndim == 0 or vec.shape[-1] != 2:
        raise ValueError(f"expected states with a trailing axis of length 2, got {vec.shape}")
    return vec


def wrap_phase(x: ArrayLike) -> float | NDArray[np.float64]:
    """
    Wrap angles into (-pi, pi].

    Args:
        x: Angle or array of angles (rad)

    Returns:
        Wrapped value(s); a float for scalar input

    Raises:
        ValueError: If any input is not finite
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"cannot wrap a non-finite phase: {x!r}")
    wrapped = np.pi - np.mod(np.pi - arr, 2 * np.pi)
    wrapped = np.where(wrapped <= -np.pi, np.pi, wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def inner(a: ArrayLike, b: ArrayLike) -> NDArray[np.complex128]:
    """<a|b> along the trailing axis, broadcasting over leading axes."""
    va, vb = np.asarray(a), np.asarray(b)
    return np.conj(va[..., 0]) * vb[..., 0] + np.conj(va[..., 1]) * vb[..., 1]


def norm_squared(v: ArrayLike) -> NDArray[np.float64]:
    vec = np.asarray(v)
    return (
        vec[..., 0].real ** 2 + vec[..., 0].imag ** 2 + vec[..., 1].real ** 2 + vec[..., 1].imag ** 2
    )


def normalized_overlap(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """|<a|b>| / (|a| |b|), elementwise over leading axes."""
    return np.abs(inner(a, b)) / np.sqrt(norm_squared(a) * norm_squared(b))


def arg_overlap(a: PureState | ArrayLike, b: PureState | ArrayLike) -> float:
    """
    Phase of the inner product <a|b>.

    Args:
        a: Bra state (normalization irrelevant)
        b: Ket state (normalization irrelevant)

    Returns:
        arg<a|b> wrapped into (-pi, pi]

    Raises:
        SingularOverlap: If |<a|b>| <= EPS_OVERLAP |a| |b|
    """
    va, vb = as_amplitudes(a), as_amplitudes(b)
    z = complex(np.vdot(va, vb))
    scale = float(np.linalg.norm(va) * np.linalg.norm(vb))
    if not abs(z) > EPS_OVERLAP * scale:
        raise SingularOverlap(f"overlap |<a|b>| = {abs(z):.3e} vanishes (scale {scale:.3e})")
    return wrap_phase(np.angle(z))


def apply(m: ArrayLike, v: ArrayLike) -> StateVector:
    """m @ v for stacks of 2x2 matrices and 2-vectors, written out elementwise."""
    m, v = np.asarray(m), np.asarray(v)
    v0, v1 = v[..., 0], v[..., 1]
    return np.stack(
        [m[..., 0, 0] * v0 + m[..., 0, 1] * v1, m[..., 1, 0] * v0 + m[..., 1, 1] * v1], axis=-1
    )


def matmul(a: ArrayLike, b: ArrayLike) -> Matrix2c:
    """a @ b for stacks of 2x2 matrices, written out elementwise."""
    a, b = np.asarray(a), np.asarray(b)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape), dtype=np.complex128)
    out[..., 0, 0] = a[..., 0, 0] * b[..., 0, 0] + a[..., 0, 1] * b[..., 1, 0]
    out[..., 0, 1] = a[..., 0, 0] * b[..., 0, 1] + a[..., 0, 1] * b[..., 1, 1]
    out[..., 1, 0] = a[..., 1, 0] * b[..., 0, 0] + a[..., 1, 1] * b[..., 1, 0]
    out[..., 1, 1] = a[..., 1, 0] * b[..., 0, 1] + a[..., 1, 1] * b[..., 1, 1]
    return out


def dagger(m: ArrayLike) -> Matrix2c:
    return np.conj(np.swapaxes(np.asarray(m), -1, -2))


def outer(a: ArrayLike, b: ArrayLike) -> Matrix2c:
    """|a><b| for stacks of 2-vectors."""
    a, b = np.asarray(a), np.asarray(b)
    return a[..., :, None] * np.conj(b)[..., None, :]


def expm2(m: ArrayLike) -> Matrix2c:
    """
    Matrix exponential of stacks of 2x2 matrices in closed form.

    exp(M) = e^{tr M / 2} (cosh s I + sinh(s)/s (M - tr M / 2 I)), s^2 = -det(M - tr M / 2 I).
    """
    m = np.asarray(m, dtype=np.complex128)
    half_trace = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    traceless = m - half_trace[..., None, None] * IDENTITY
    s = np.sqrt(traceless[..., 0, 0] ** 2 + traceless[..., 0, 1] * traceless[..., 1, 0])
    small = np.abs(s) < 1e-8
    safe_s = np.where(small, 1.0, s)
    sinhc = np.where(small, 1.0 + s**2 / 6.0, np.sinh(safe_s) / safe_s)
    scale = np.exp(half_trace)
    return scale[..., None, None] * (
        np.cosh(s)[..., None, None] * IDENTITY + sinhc[..., None, None] * traceless
    )
