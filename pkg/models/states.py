"""State data models: pure states, density matrices and integrator output."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_serializer, field_validator

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-10


def _complex_pairs(values: np.ndarray) -> list:
    """Serialize a complex array as nested [re, im] pairs."""
    pairs = np.stack([values.real, values.imag], axis=-1)
    return pairs.tolist()


def _coerce_complex(value: object, pair_ndim: int) -> np.ndarray:
    """Accept complex arrays or their nested [re, im] serialization."""
    arr = np.asarray(value)
    if arr.dtype.kind in "iuf" and arr.ndim == pair_ndim and arr.shape[-1] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    return np.array(arr, dtype=np.complex128)


class PureState(BaseModel):
    """A two-level wave function, possibly non-normalized."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    amplitudes: np.ndarray = Field(
        description="Complex amplitudes in the sigma_z basis (|0>, |1>)",
    )

    @field_validator("amplitudes", mode="before")
    @classmethod
    def validate_amplitudes(cls, v: object) -> np.ndarray:
        """Coerce to a finite, nonzero complex 2-vector."""
        arr = _coerce_complex(v, pair_ndim=2)
        if arr.shape != (2,):
            raise ValueError(f"amplitudes must have shape (2,), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite")
        if np.vdot(arr, arr).real <= 0.0:
            raise ValueError("the zero vector is not a state")
        return arr

    @field_serializer("amplitudes")
    def serialize_amplitudes(self, v: np.ndarray) -> list:
        return _complex_pairs(v)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        """Return the unit-norm state on the same ray."""
        return PureState(amplitudes=self.amplitudes / self.norm)


class DensityMatrix(BaseModel):
    """A 2x2 density matrix: Hermitian, unit trace, positive."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    entries: np.ndarray = Field(description="2x2 complex matrix in the sigma_z basis")

    @field_validator("entries", mode="before")
    @classmethod
    def validate_entries(cls, v: object) -> np.ndarray:
        arr = _coerce_complex(v, pair_ndim=3)
        if arr.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("density matrix entries must be finite")
        if np.max(np.abs(arr - arr.conj().T)) > HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(arr).real - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {np.trace(arr).real:.12f} != 1")
        if np.min(np.linalg.eigvalsh(arr)) < -POSITIVITY_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        return arr

    @field_serializer("entries")
    def serialize_entries(self, v: np.ndarray) -> list:
        return _complex_pairs(v)

    @classmethod
    def from_state(cls, state: "PureState | np.ndarray") -> "DensityMatrix":
        """Projector onto a (not necessarily normalized) pure state."""
        vec = state.amplitudes if isinstance(state, PureState) else np.asarray(state, complex)
        vec = vec / np.linalg.norm(vec)
        return cls(entries=np.outer(vec, vec.conj()))

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


class LindbladPath(BaseModel):
    """Sampled solution of the master equation on the shared time grid."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        json_schema_extra={
            "example": {"times": [0.0, 628.3], "rhos": "(2, 2, 2) complex array", "dt": 0.00628}
        },
    )

    times: np.ndarray = Field(description="Sample times in units of 1/omega")
    rhos: np.ndarray = Field(description="Density matrices, shape (n_samples, 2, 2)")
    dt: float = Field(gt=0, description="Integration step actually used")

    def __len__(self) -> int:
        return len(self.times)

    def at(self, index: int) -> DensityMatrix:
        return DensityMatrix(entries=self.rhos[index])

    def sample_index(self, time: float) -> int:
        """Index of the sample closest to ``time``."""
        return int(np.argmin(np.abs(self.times - time)))


class EigenPair(BaseModel):
    """Instantaneous eigensystem of H(t); states may carry leading time axes."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    energy_plus: float = Field(description="Upper eigenvalue, +omega/2")
    energy_minus: float = Field(description="Lower eigenvalue, -omega/2")
    state_plus: np.ndarray = Field(description="Normalized upper eigenvector(s), shape (..., 2)")
    state_minus: np.ndarray = Field(description="Normalized lower eigenvector(s), shape (..., 2)")

    @field_serializer("state_plus", "state_minus")
    def serialize_state(self, v: np.ndarray) -> list:
        return _complex_pairs(v)
