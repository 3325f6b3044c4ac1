from functools import lru_cache

import numpy as np

from kerrcat.exceptions import InvalidArgumentError
from kerrcat.fock.models import DensityMatrix, OperatorMatrix, StateVector
from kerrcat.fock.schemas import SystemParams
from kerrcat.fock.utils import check_cutoff


def annihilation(cutoff: int) -> OperatorMatrix:
    cutoff = check_cutoff(cutoff)
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1))


def creation(cutoff: int) -> OperatorMatrix:
    return annihilation(cutoff).dag


def number(cutoff: int) -> OperatorMatrix:
    cutoff = check_cutoff(cutoff)
    return OperatorMatrix(np.diag(np.arange(cutoff, dtype=float)))


def parity(cutoff: int) -> OperatorMatrix:
    """exp(i pi n): +1 on even Fock states, -1 on odd ones."""
    cutoff = check_cutoff(cutoff)
    return OperatorMatrix(np.diag(parity_diagonal(cutoff)))


def parity_diagonal(cutoff: int) -> np.ndarray:
    return np.where(np.arange(cutoff) % 2 == 0, 1.0, -1.0)


def parity_projector(parity_sign: int, cutoff: int) -> OperatorMatrix:
    """(1 + s P)/2, projecting onto the Fock states of parity s."""
    cutoff = check_cutoff(cutoff)
    return OperatorMatrix(np.diag(0.5 * (1.0 + parity_sign * parity_diagonal(cutoff))))


def identity(cutoff: int) -> OperatorMatrix:
    cutoff = check_cutoff(cutoff)
    return OperatorMatrix(np.eye(cutoff))


def hamiltonian(params: SystemParams, cutoff: int) -> OperatorMatrix:
    """-Delta n + (U/2) a+a+aa + (G/2) a+a+ + (G*/2) aa + F a+ + F* a in the pump frame."""
    a = annihilation(cutoff).matrix
    a2 = a @ a
    n = np.arange(cutoff, dtype=float)
    matrix = np.diag(-params.detuning * n + 0.5 * params.kerr * n * (n - 1)).astype(complex)
    matrix += 0.5 * params.pump * a2.T + 0.5 * np.conj(params.pump) * a2
    if params.one_photon_drive != 0:
        matrix += params.one_photon_drive * a.T + np.conj(params.one_photon_drive) * a
    return OperatorMatrix(matrix)


@lru_cache(maxsize=32)
def quadrature_eigensystem(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    a = annihilation(cutoff).matrix
    quadrature = 1j * (a - a.T)
    values, vectors = np.linalg.eigh(quadrature)
    values.setflags(write=False)
    vectors.setflags(write=False)
    return values, vectors


def displacement(beta: complex, cutoff: int) -> OperatorMatrix:
    """exp(beta a+ - beta* a) on the truncated space.

    The generator is a rotated quadrature, r R i(a - a+) R+ with R = exp(i theta n),
    so one Hermitian eigendecomposition per cutoff serves every beta.
    """
    cutoff = check_cutoff(cutoff)
    beta = complex(beta)
    radius, theta = abs(beta), np.angle(beta)
    values, vectors = quadrature_eigensystem(cutoff)
    rotation = np.exp(1j * theta * np.arange(cutoff))
    core = (vectors * np.exp(1j * radius * values)) @ vectors.conj().T
    matrix = rotation[:, None] * core * rotation.conj()[None, :]
    return OperatorMatrix(matrix, truncation_warning=radius ** 2 > cutoff / 4)


def expectation(state: StateVector | DensityMatrix, op: OperatorMatrix) -> complex:
    if state.cutoff != op.cutoff:
        raise InvalidArgumentError(f"Cutoff mismatch: state {state.cutoff}, operator {op.cutoff}")
    if isinstance(state, StateVector):
        return complex(np.vdot(state.amplitudes, op.matrix @ state.amplitudes))
    return complex(np.einsum('ij,ji->', state.matrix, op.matrix))
