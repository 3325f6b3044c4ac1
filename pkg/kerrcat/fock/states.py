import numpy as np
from loguru import logger
from scipy.stats import poisson

from kerrcat.exceptions import CutoffTooSmallError, DegenerateCatError, InvalidArgumentError
from kerrcat.fock.models import DensityMatrix, StateVector
from kerrcat.fock.schemas import Parity
from kerrcat.fock.utils import check_cutoff, log_factorials

TRUNCATION_TOL = 1e-10


def fock_state(n: int, cutoff: int) -> StateVector:
    cutoff = check_cutoff(cutoff)
    if not 0 <= n < cutoff:
        raise InvalidArgumentError(f"Fock index {n} outside 0..{cutoff - 1}")
    amplitudes = np.zeros(cutoff, dtype=complex)
    amplitudes[n] = 1.0
    return StateVector(amplitudes)


def vacuum(cutoff: int) -> StateVector:
    return fock_state(0, cutoff)


def required_cutoff(alpha: complex, tol: float = TRUNCATION_TOL) -> int:
    """Smallest cutoff keeping the Poissonian tail of |alpha> below tol."""
    mean = abs(alpha) ** 2
    if mean == 0:
        return 1
    return int(poisson.isf(tol, mean)) + 1


def _coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    n = np.arange(cutoff)
    if alpha == 0:
        amplitudes = np.zeros(cutoff, dtype=complex)
        amplitudes[0] = 1.0
        return amplitudes
    log_magnitude = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * log_factorials(cutoff)
    return np.exp(log_magnitude) * np.exp(1j * np.angle(alpha) * n)


def _check_truncation(alpha: complex, cutoff: int, amplitudes: np.ndarray):
    kept = float(np.sum(np.abs(amplitudes) ** 2))
    if kept < 1 - TRUNCATION_TOL:
        needed = required_cutoff(alpha)
        logger.error(f"Cutoff {cutoff} keeps only {kept:.3e} of |{alpha}>; need {needed}")
        raise CutoffTooSmallError(
            f"Cutoff {cutoff} too small for amplitude {alpha}: need at least {needed}",
            required_cutoff=needed,
            tail_mass=1 - kept,
        )


def coherent_state(alpha: complex, cutoff: int) -> StateVector:
    cutoff = check_cutoff(cutoff)
    alpha = complex(alpha)
    amplitudes = _coherent_amplitudes(alpha, cutoff)
    _check_truncation(alpha, cutoff, amplitudes)
    return StateVector(amplitudes / np.linalg.norm(amplitudes))


def cat_state(alpha: complex, sign: Parity | str | int, cutoff: int) -> StateVector:
    """(|alpha> +- |-alpha>) normalized on the truncated space."""
    cutoff = check_cutoff(cutoff)
    alpha = complex(alpha)
    parity = Parity.from_sign(sign)
    if alpha == 0 and parity is Parity.odd:
        raise DegenerateCatError()
    amplitudes = _coherent_amplitudes(alpha, cutoff)
    _check_truncation(alpha, cutoff, amplitudes)
    mask = np.where(np.arange(cutoff) % 2 == 0, 1.0, -1.0) * parity.sign + 1.0
    amplitudes = amplitudes * mask
    norm = np.linalg.norm(amplitudes)
    if norm == 0:
        raise DegenerateCatError(f"Cat state with alpha={alpha} underflows to zero")
    return StateVector(amplitudes / norm)


def fock_mixture(populations, cutoff: int) -> DensityMatrix:
    """Diagonal density matrix from Fock populations (padded with zeros)."""
    cutoff = check_cutoff(cutoff)
    values = np.zeros(cutoff)
    populations = np.asarray(populations, dtype=float)
    if populations.size > cutoff:
        raise InvalidArgumentError(f"{populations.size} populations exceed cutoff {cutoff}")
    values[:populations.size] = populations
    return DensityMatrix(np.diag(values)).normalized()
