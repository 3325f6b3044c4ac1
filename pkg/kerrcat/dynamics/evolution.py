from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.integrate import RK45

from kerrcat.config import settings
from kerrcat.dynamics.fidelity import fidelity
from kerrcat.dynamics.liouvillian import Liouvillian
from kerrcat.exceptions import InvalidArgumentError, InvalidStateError, StiffnessError
from kerrcat.fock.models import DensityMatrix
from kerrcat.fock.operators import parity_diagonal
from kerrcat.fock.schemas import SystemParams

STATE_TOL = 1e-8
REPAIR_BUDGET = 1e-6
STAGE_EVALUATIONS = 6


@dataclass(frozen=True, eq=False)
class EvolutionResult:
    times: np.ndarray
    photon_number: np.ndarray
    parity: np.ndarray
    fidelity: np.ndarray | None
    states: list[DensityMatrix] | None
    steps: int
    rejected_steps: int
    repair_total: float

    def first_time_at_least(self, threshold: float) -> float | None:
        """First output time where fidelity-to-target reaches ``threshold``."""
        if self.fidelity is None:
            raise InvalidArgumentError("Evolution was run without a fidelity target")
        hits = np.nonzero(self.fidelity >= threshold)[0]
        return float(self.times[hits[0]]) if hits.size else None

    def statistics(self) -> dict:
        return {'steps': self.steps, 'rejected_steps': self.rejected_steps, 'repair_total': self.repair_total}


def validate_density_matrix(rho: DensityMatrix, tol: float = STATE_TOL):
    error = rho.hermiticity_error()
    if error > tol:
        raise InvalidStateError(f"Initial state not Hermitian (deviation {error:.2e})")
    if abs(rho.trace - 1) > tol:
        raise InvalidStateError(f"Initial state trace {rho.trace.real:.12g} differs from 1")
    smallest = float(rho.eigenvalues().min())
    if smallest < -tol:
        raise InvalidStateError(f"Initial state has negative eigenvalue {smallest:.2e}")


def _repair(matrix: np.ndarray) -> np.ndarray:
    hermitian = 0.5 * (matrix + matrix.conj().T)
    return hermitian / np.trace(hermitian).real


def evolve(params: SystemParams, rho0: DensityMatrix, t_grid, rtol: float | None = None,
           atol: float | None = None, target: DensityMatrix | None = None,
           store_states: bool = True) -> EvolutionResult:
    """Integrate the master equation with an adaptive 4(5) Runge-Kutta pair.

    Output times are hit through the step's dense output. After each accepted
    step the state is replaced by its trace-normalized Hermitian part; the summed
    size of those corrections must stay below 1e-6.
    """
    rtol = settings.RTOL if rtol is None else rtol
    atol = settings.ATOL if atol is None else atol
    if not (rtol > 0 and atol > 0):
        raise InvalidArgumentError(f"Tolerances must be positive, got rtol={rtol}, atol={atol}")
    times = np.asarray(t_grid, dtype=float)
    if times.ndim != 1 or times.size == 0 or times[0] != 0 or np.any(np.diff(times) <= 0):
        raise InvalidArgumentError("t_grid must be strictly increasing and start at 0")
    validate_density_matrix(rho0)
    if target is not None and target.cutoff != rho0.cutoff:
        raise InvalidArgumentError(f"Target cutoff {target.cutoff} != state cutoff {rho0.cutoff}")

    cutoff = rho0.cutoff
    liouvillian = Liouvillian(params, cutoff)
    n = np.arange(cutoff)
    signs = parity_diagonal(cutoff)
    photon_number = np.empty(times.size)
    parity = np.empty(times.size)
    fidelities = np.empty(times.size) if target is not None else None
    states: list[DensityMatrix] | None = [] if store_states else None

    def record(index: int, matrix: np.ndarray):
        rho = DensityMatrix(_repair(matrix))
        populations = rho.populations
        photon_number[index] = n @ populations
        parity[index] = signs @ populations
        if fidelities is not None:
            fidelities[index] = fidelity(target, rho)
        if states is not None:
            states.append(rho)

    def rhs(_, y):
        return liouvillian.apply(y.reshape(cutoff, cutoff)).ravel()

    logger.info(f"Evolving cutoff {cutoff} to t={times[-1]:g} ({times.size} outputs, rtol={rtol:g}, atol={atol:g})")
    record(0, np.asarray(rho0.matrix))
    pending, steps, repair_total = 1, 0, 0.0
    if times.size > 1:
        solver = RK45(rhs, 0.0, np.asarray(rho0.matrix, dtype=complex).ravel(), times[-1], rtol=rtol, atol=atol)
        while pending < times.size:
            message = solver.step()
            if solver.status == 'failed':
                logger.error(f"Integrator failed at t={solver.t:g}: {message}")
                raise StiffnessError(f"Step-size underflow at t={solver.t:g}; use a smaller cutoff or larger tolerances")
            steps += 1
            if times[pending] <= solver.t:
                interpolant = solver.dense_output()
                while pending < times.size and times[pending] <= solver.t:
                    y = solver.y if times[pending] == solver.t else interpolant(times[pending])
                    record(pending, y.reshape(cutoff, cutoff))
                    pending += 1
            current = solver.y.reshape(cutoff, cutoff)
            repaired = _repair(current)
            repair_total += float(np.max(np.abs(repaired - current)))
            if repair_total > REPAIR_BUDGET:
                logger.error(f"Hermiticity/trace repairs reached {repair_total:.2e} at t={solver.t:g}")
                raise StiffnessError(f"Cumulative state repair {repair_total:.2e} exceeds {REPAIR_BUDGET:.0e}")
            solver.y = repaired.ravel()
            solver.f = rhs(solver.t, solver.y)
        rejected = max(0, (solver.nfev - 2) // STAGE_EVALUATIONS - steps)
    else:
        rejected = 0

    logger.info(f"Evolution done: {steps} steps, ~{rejected} rejected, repairs {repair_total:.2e}")
    return EvolutionResult(
        times=times,
        photon_number=photon_number,
        parity=parity,
        fidelity=fidelities,
        states=states,
        steps=steps,
        rejected_steps=rejected,
        repair_total=repair_total,
    )
