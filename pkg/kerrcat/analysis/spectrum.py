from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from loguru import logger

from kerrcat.exceptions import InvalidArgumentError, InvalidStateError
from kerrcat.fock.models import DensityMatrix, OperatorMatrix, StateVector
from kerrcat.fock.operators import parity_diagonal

HERMITIAN_TOL = 1e-8
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    probabilities: np.ndarray
    eigenstates: list[StateVector]
    photon_numbers: np.ndarray
    parities: np.ndarray

    @property
    def cutoff(self) -> int:
        return self.eigenstates[0].cutoff

    @property
    def residual(self) -> float:
        """1 - p1 - p2."""
        return float(1.0 - self.probabilities[:2].sum())

    def reconstruct(self) -> DensityMatrix:
        vectors = np.column_stack([state.amplitudes for state in self.eigenstates])
        return DensityMatrix((vectors * self.probabilities) @ vectors.conj().T)

    def summary(self, count: int = 2) -> dict:
        return {
            'p': self.probabilities[:count].tolist(),
            'residual': self.residual,
            'n': self.photon_numbers[:count].tolist(),
            'parity': self.parities[:count].tolist(),
        }


class ObservableSplit(NamedTuple):
    total: complex
    first: complex
    second: complex
    bound: float


def _fix_phase(vector: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude amplitude real and positive."""
    pivot = vector[np.argmax(np.abs(vector))]
    return vector * (abs(pivot) / pivot)


def _ordering(probabilities: np.ndarray, parities: np.ndarray) -> list[int]:
    order = list(np.argsort(-probabilities, kind='stable'))
    result, cluster = [], [order[0]]
    for index in order[1:]:
        if abs(probabilities[cluster[-1]] - probabilities[index]) < TIE_TOL:
            cluster.append(index)
            continue
        result += sorted(cluster, key=lambda i: -parities[i])
        cluster = [index]
    return result + sorted(cluster, key=lambda i: -parities[i])


def spectral_decompose(rho: DensityMatrix) -> SpectrumReport:
    """rho = sum_k p_k |Psi_k><Psi_k| with p sorted descending.

    Ties (|dp| < 1e-12) are broken by descending parity.
    """
    error = rho.hermiticity_error()
    if error > HERMITIAN_TOL:
        logger.error(f"Spectral decomposition refused: Hermiticity error {error:.2e}")
        raise InvalidStateError(f"Density matrix is not Hermitian (max deviation {error:.2e})")
    hermitian = 0.5 * (rho.matrix + rho.matrix.conj().T)
    values, vectors = np.linalg.eigh(hermitian)
    signs = parity_diagonal(rho.cutoff)
    n = np.arange(rho.cutoff)
    weights = np.abs(vectors) ** 2
    parities = signs @ weights
    photon_numbers = n @ weights
    order = _ordering(values, parities)
    return SpectrumReport(
        probabilities=values[order],
        eigenstates=[StateVector(_fix_phase(vectors[:, i])) for i in order],
        photon_numbers=photon_numbers[order],
        parities=parities[order],
    )


def observable_split(report: SpectrumReport, op: OperatorMatrix) -> ObservableSplit:
    """Tr[rho O] next to the two leading eigenstate values <Psi_1|O|Psi_1>, <Psi_2|O|Psi_2>.

    ``bound`` is residual * ||O||, which limits |O - (p1 O1 + p2 O2)|.
    """
    if op.cutoff != report.cutoff:
        raise InvalidArgumentError(f"Cutoff mismatch: report {report.cutoff}, operator {op.cutoff}")
    vectors = np.column_stack([state.amplitudes for state in report.eigenstates])
    values = np.einsum('ik,ij,jk->k', vectors.conj(), op.matrix, vectors)
    total = complex(np.dot(report.probabilities, values))
    second = complex(values[1]) if values.size > 1 else 0j
    bound = max(report.residual, 0.0) * float(np.linalg.norm(op.matrix, 2))
    return ObservableSplit(total=total, first=complex(values[0]), second=second, bound=bound)
