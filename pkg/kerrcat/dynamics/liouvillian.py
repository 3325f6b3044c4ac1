import numpy as np
from loguru import logger
from scipy.linalg import lu_factor, lu_solve

from kerrcat.dynamics.channels import JumpChannel, jump_channels
from kerrcat.exceptions import InvalidArgumentError, StiffnessError, UnsupportedParameterError
from kerrcat.fock.models import DensityMatrix, OperatorMatrix
from kerrcat.fock.operators import hamiltonian
from kerrcat.fock.schemas import SystemParams
from kerrcat.fock.utils import check_cutoff, estimate_memory_bytes

INVERSE_ITERATION_SHIFT = 1e-12
INVERSE_ITERATION_TOL = 1e-13
INVERSE_ITERATION_MAX = 12


class Liouvillian:
    """i[rho, H] + sum_k rate_k (L rho L+ - {L+L, rho}/2) for fixed parameters and cutoff."""

    def __init__(self, params: SystemParams, cutoff: int):
        self.params = params
        self.cutoff = check_cutoff(cutoff)
        self.hamiltonian = hamiltonian(params, self.cutoff).matrix
        self.channels: list[JumpChannel] = jump_channels(params, self.cutoff)
        loss = sum((channel.rate * channel.loss_operator for channel in self.channels),
                   np.zeros((self.cutoff, self.cutoff), dtype=complex))
        # rho' = -i (K rho - rho K+) + sum rate L rho L+
        self.effective = self.hamiltonian - 0.5j * loss

    def apply(self, rho: np.ndarray) -> np.ndarray:
        result = -1j * (self.effective @ rho - rho @ self.effective.conj().T)
        for channel in self.channels:
            op = channel.operator.matrix
            result += channel.rate * (op @ rho @ op.conj().T)
        return result

    def matrix(self) -> np.ndarray:
        """Superoperator acting on row-major vec(rho): vec(A rho B) = (A kron B^T) vec(rho)."""
        identity = np.eye(self.cutoff)
        logger.info(f"Assembling Liouvillian of dimension {self.cutoff ** 2} "
                    f"(~{estimate_memory_bytes(self.cutoff) / 1024 ** 2:.0f} MiB)")
        superop = -1j * np.kron(self.effective, identity) + 1j * np.kron(identity, self.effective.conj())
        for channel in self.channels:
            op = channel.operator.matrix
            superop += channel.rate * np.kron(op, op.conj())
        return superop


def liouvillian_apply(params: SystemParams, rho: DensityMatrix) -> OperatorMatrix:
    """Time derivative of rho; traceless and Hermitian for Hermitian input."""
    return OperatorMatrix(Liouvillian(params, rho.cutoff).apply(np.asarray(rho.matrix)))


def liouvillian_matrix(params: SystemParams, cutoff: int) -> np.ndarray:
    return Liouvillian(params, cutoff).matrix()


def steady_state_numeric(params: SystemParams, cutoff: int) -> DensityMatrix:
    """Null vector of the assembled Liouvillian by shifted inverse iteration."""
    if not (params.is_dissipative or params.gamma_f > 0):
        raise UnsupportedParameterError("Steady state needs at least one dissipative channel")
    liouvillian = Liouvillian(params, cutoff)
    superop = liouvillian.matrix()
    dimension = superop.shape[0]
    scale = float(np.abs(superop).sum(axis=1).max())
    shift = INVERSE_ITERATION_SHIFT * max(scale, 1.0)
    factors = lu_factor(superop + shift * np.eye(dimension))

    vector = np.eye(cutoff, dtype=complex).ravel() / cutoff
    residual = np.inf
    for iteration in range(1, INVERSE_ITERATION_MAX + 1):
        vector = lu_solve(factors, vector)
        vector /= np.linalg.norm(vector)
        residual = float(np.linalg.norm(superop @ vector)) / max(scale, 1.0)
        if residual < INVERSE_ITERATION_TOL:
            break
    logger.info(f"Inverse iteration finished after {iteration} steps, residual {residual:.2e}")
    if residual > 1e-8:
        logger.error(f"Liouvillian null vector not resolved: residual {residual:.2e}")
        raise StiffnessError(f"Shifted inverse iteration did not converge (residual {residual:.2e})")

    rho = vector.reshape(cutoff, cutoff)
    trace = np.trace(rho)
    if abs(trace) == 0:
        raise InvalidArgumentError("Null vector has zero trace")
    return DensityMatrix(rho / trace).normalized()
