import numpy as np
from loguru import logger

from kerrcat.exceptions import InvalidArgumentError, InvalidStateError
from kerrcat.fock.models import DensityMatrix

POSITIVITY_TOL = 1e-8


def _psd_sqrt(matrix: np.ndarray, name: str) -> np.ndarray:
    hermitian = 0.5 * (matrix + matrix.conj().T)
    values, vectors = np.linalg.eigh(hermitian)
    if values.min() < -POSITIVITY_TOL:
        logger.error(f"Fidelity input {name} has eigenvalue {values.min():.2e}")
        raise InvalidStateError(f"Density matrix {name} is not positive (eigenvalue {values.min():.2e})")
    return (vectors * np.sqrt(np.clip(values, 0.0, None))) @ vectors.conj().T


def fidelity(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(A) B sqrt(A)), clipped to [0, 1]."""
    if rho_a.cutoff != rho_b.cutoff:
        raise InvalidArgumentError(f"Cutoff mismatch: {rho_a.cutoff} != {rho_b.cutoff}")
    root_a = _psd_sqrt(rho_a.matrix, 'A')
    _psd_sqrt(rho_b.matrix, 'B')
    inner = root_a @ rho_b.matrix @ root_a
    values = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.clip(np.sqrt(np.clip(values, 0.0, None)).sum(), 0.0, 1.0))
