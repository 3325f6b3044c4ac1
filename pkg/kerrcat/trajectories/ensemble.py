from dataclasses import dataclass
from functools import reduce
from multiprocessing import Pool

import numpy as np
from loguru import logger

from kerrcat.config import settings
from kerrcat.exceptions import InvalidArgumentError
from kerrcat.fock.models import StateVector
from kerrcat.fock.schemas import SystemParams
from kerrcat.trajectories.jumps import JumpScheme, TrajectoryRecord, run_trajectory

CHUNK_SIZE = 8


def trajectory_seed(master_seed: int, index: int) -> int:
    """Seed of trajectory ``index``; depends only on (master_seed, index)."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class EnsembleSummary:
    count: int
    times: np.ndarray
    mean_photon_number: np.ndarray
    stderr_photon_number: np.ndarray
    mean_parity: np.ndarray
    stderr_parity: np.ndarray


@dataclass(frozen=True, eq=False)
class EnsembleAccumulator:
    """Running count, sums and sums of squares; ``merge`` is associative."""

    times: np.ndarray
    count: int
    sum_n: np.ndarray
    sum_n2: np.ndarray
    sum_p: np.ndarray
    sum_p2: np.ndarray

    @classmethod
    def empty(cls, times: np.ndarray) -> "EnsembleAccumulator":
        zeros = np.zeros(times.size)
        return cls(times, 0, zeros, zeros, zeros, zeros)

    @classmethod
    def from_record(cls, record: TrajectoryRecord) -> "EnsembleAccumulator":
        n, p = record.photon_number, record.parity
        return cls(record.times, 1, n.copy(), n ** 2, p.copy(), p ** 2)

    def merge(self, other: "EnsembleAccumulator") -> "EnsembleAccumulator":
        if self.times.shape != other.times.shape or not np.allclose(self.times, other.times):
            raise InvalidArgumentError("Cannot merge ensembles recorded on different time grids")
        return EnsembleAccumulator(self.times, self.count + other.count, self.sum_n + other.sum_n,
                                   self.sum_n2 + other.sum_n2, self.sum_p + other.sum_p,
                                   self.sum_p2 + other.sum_p2)

    def summary(self) -> EnsembleSummary:
        if self.count == 0:
            raise InvalidArgumentError("Empty ensemble")
        mean_n, std_n = self._moments(self.sum_n, self.sum_n2)
        mean_p, std_p = self._moments(self.sum_p, self.sum_p2)
        return EnsembleSummary(self.count, self.times, mean_n, std_n, mean_p, std_p)

    def _moments(self, total: np.ndarray, squares: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        mean = total / self.count
        if self.count == 1:
            return mean, np.zeros_like(mean)
        variance = np.clip((squares - self.count * mean ** 2) / (self.count - 1), 0.0, None)
        return mean, np.sqrt(variance / self.count)


def _run_chunk(task) -> EnsembleAccumulator:
    params, amplitudes, horizon, dt, output_dt, master_seed, scheme, indices = task
    psi0 = StateVector(amplitudes)
    records = (run_trajectory(params, psi0, horizon, dt, trajectory_seed(master_seed, i), output_dt, scheme=scheme)
               for i in indices)
    return reduce(EnsembleAccumulator.merge, map(EnsembleAccumulator.from_record, records))


def ensemble(params: SystemParams, psi0: StateVector, horizon: float, dt: float, count: int,
             master_seed: int, workers: int | None = None, output_dt: float | None = None,
             scheme: JumpScheme | str = JumpScheme.waiting_time) -> EnsembleSummary:
    """Average ``count`` trajectories, split into fixed chunks merged in index order.

    The chunking does not depend on ``workers``, so the summary is identical
    for any worker count.
    """
    if count < 1:
        raise InvalidArgumentError(f"Trajectory count must be >= 1, got {count}")
    if workers is None:
        workers = settings.WORKERS
    if workers < 1:
        raise InvalidArgumentError(f"Worker count must be >= 1, got {workers}")
    scheme = JumpScheme(scheme)
    amplitudes = np.array(psi0.normalized().amplitudes)
    tasks = [(params, amplitudes, horizon, dt, output_dt, master_seed, scheme,
              range(start, min(start + CHUNK_SIZE, count))) for start in range(0, count, CHUNK_SIZE)]
    logger.info(f"Running {count} trajectories in {len(tasks)} chunks on {workers} worker(s), master seed {master_seed}")
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            partials = pool.map(_run_chunk, tasks)
    else:
        partials = [_run_chunk(task) for task in tasks]
    summary = reduce(EnsembleAccumulator.merge, partials).summary()
    logger.info(f"Ensemble of {summary.count} trajectories done")
    return summary
