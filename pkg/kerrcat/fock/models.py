from dataclasses import dataclass
from typing import Any

import numpy as np

from kerrcat.exceptions import InvalidArgumentError


def _frozen_array(values: Any, ndim: int) -> np.ndarray:
    array = np.array(values, dtype=complex)
    if array.ndim != ndim:
        raise InvalidArgumentError(f"Expected a {ndim}-dimensional array, got shape {array.shape}")
    if ndim == 2 and array.shape[0] != array.shape[1]:
        raise InvalidArgumentError(f"Expected a square matrix, got shape {array.shape}")
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'amplitudes', _frozen_array(self.amplitudes, 1))

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        norm = self.norm
        if norm == 0:
            raise InvalidArgumentError("Cannot normalize the zero vector")
        return StateVector(self.amplitudes / norm)

    def overlap(self, other: "StateVector") -> complex:
        """<self|other>."""
        if other.cutoff != self.cutoff:
            raise InvalidArgumentError(f"Cutoff mismatch: {self.cutoff} != {other.cutoff}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(cutoff={self.cutoff}, norm={self.norm:.12g})"


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    matrix: np.ndarray
    truncation_warning: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen_array(self.matrix, 2))

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0]

    @property
    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.matrix.conj().T, self.truncation_warning)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            return OperatorMatrix(self.matrix @ other.matrix,
                                  self.truncation_warning or other.truncation_warning)
        if isinstance(other, StateVector):
            return StateVector(self.matrix @ other.amplitudes)
        return NotImplemented

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(cutoff={self.cutoff}, truncation_warning={self.truncation_warning})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'matrix', _frozen_array(self.matrix, 2))

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        return np.linalg.eigvalsh(hermitian)

    def normalized(self) -> "DensityMatrix":
        """Hermitian part divided by its trace."""
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        trace = np.trace(hermitian).real
        if trace <= 0:
            raise InvalidArgumentError(f"Cannot normalize a matrix with trace {trace}")
        return DensityMatrix(hermitian / trace)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(cutoff={self.cutoff}, trace={self.trace.real:.12g})"
