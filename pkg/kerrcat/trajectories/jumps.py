from collections.abc import Iterator
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger
from scipy.linalg import expm
from scipy.optimize import brentq

from kerrcat.dynamics.channels import ChannelLabel, JumpChannel, jump_channels
from kerrcat.exceptions import InvalidArgumentError, StepTooLargeError
from kerrcat.fock.models import OperatorMatrix, StateVector
from kerrcat.fock.operators import hamiltonian, parity_diagonal
from kerrcat.fock.schemas import SystemParams
from kerrcat.fock.utils import check_cutoff

MAX_JUMP_PROBABILITY = 0.1
NORM_TOL = 1e-10
DRAW_BLOCK = 4096


class JumpScheme(Enum):
    waiting_time = 'waiting-time'
    first_order = 'first-order'


@dataclass(frozen=True, eq=False)
class EffectiveHamiltonian:
    matrix: OperatorMatrix
    rates: dict[ChannelLabel, float]

    @property
    def cutoff(self) -> int:
        return self.matrix.cutoff

    def anti_hermitian_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of (H_eff - H_eff+)/2i; never positive."""
        matrix = self.matrix.matrix
        return np.linalg.eigvalsh((matrix - matrix.conj().T) / 2j)


def _effective_matrix(params: SystemParams, channels: list[JumpChannel], cutoff: int) -> np.ndarray:
    matrix = np.array(hamiltonian(params, cutoff).matrix)
    for channel in channels:
        matrix -= 0.5j * channel.rate * channel.loss_operator
    return matrix


def effective_hamiltonian(params: SystemParams, cutoff: int) -> EffectiveHamiltonian:
    """H - (i/2) sum_k rate_k L_k+ L_k."""
    cutoff = check_cutoff(cutoff)
    channels = jump_channels(params, cutoff)
    return EffectiveHamiltonian(
        matrix=OperatorMatrix(_effective_matrix(params, channels, cutoff)),
        rates={channel.label: channel.rate for channel in channels},
    )


@dataclass(frozen=True)
class JumpEvent:
    time: float
    label: ChannelLabel
    parity_before: float
    parity_after: float

    def to_dict(self) -> dict:
        return {
            'time': self.time,
            'channel': self.label.value,
            'parity_before': self.parity_before,
            'parity_after': self.parity_after,
        }


class JumpStepper:
    """Photon-counting moves on a fixed grid of ``dt`` with a precomputed no-jump propagator.

    ``advance`` is the first-order step: draw ``u_jump`` decides jump against
    no-jump, draw ``u_channel`` picks the channel from the cumulative channel
    probabilities. ``propagate``, ``norm_crossing`` and ``jump`` are the pieces
    of the waiting-time scheme, which keeps the state unnormalized and jumps
    when its squared norm falls to a uniform threshold.
    """

    def __init__(self, params: SystemParams, cutoff: int, dt: float):
        if not dt > 0:
            raise InvalidArgumentError(f"Time step must be positive, got {dt}")
        self.params = params
        self.cutoff = check_cutoff(cutoff)
        self.dt = float(dt)
        self.channels = jump_channels(params, self.cutoff)
        self.generator = -1j * _effective_matrix(params, self.channels, self.cutoff)
        self.propagator = expm(self.dt * self.generator)
        # every L+L here is diagonal in the Fock basis
        self.weights = np.array([channel.rate * channel.loss_operator.diagonal().real
                                 for channel in self.channels]).reshape(len(self.channels), self.cutoff)
        self.decay = self.weights.sum(axis=0)
        self.operators = [np.asarray(channel.operator.matrix) for channel in self.channels]

    def jump_probabilities(self, psi: np.ndarray) -> np.ndarray:
        return self.dt * (self.weights @ (np.abs(psi) ** 2))

    def check_step(self, psi: np.ndarray) -> None:
        """Raise when the jump probability of one step from ``psi`` exceeds the limit."""
        weights = np.abs(psi) ** 2
        total = self.dt * float(self.decay @ weights) / float(weights.sum())
        if total > MAX_JUMP_PROBABILITY:
            suggested = 0.5 * self.dt * MAX_JUMP_PROBABILITY / total
            logger.error(f"Jump probability {total:.3g} per step exceeds {MAX_JUMP_PROBABILITY}")
            raise StepTooLargeError(f"Jump probability {total:.3g} exceeds {MAX_JUMP_PROBABILITY}; "
                                    f"use dt <= {suggested:.3g}", suggested_dt=suggested)

    def jump(self, psi: np.ndarray, u_channel: float) -> tuple[np.ndarray, ChannelLabel]:
        probabilities = self.weights @ (np.abs(psi) ** 2)
        cumulative = np.cumsum(probabilities) / probabilities.sum()
        index = min(int(np.searchsorted(cumulative, u_channel, side='right')), len(self.channels) - 1)
        jumped = self.operators[index] @ psi
        return jumped / np.linalg.norm(jumped), self.channels[index].label

    def advance(self, psi: np.ndarray, u_jump: float, u_channel: float) -> tuple[np.ndarray, ChannelLabel | None]:
        self.check_step(psi)
        total = float(self.jump_probabilities(psi).sum())
        if total > 0 and u_jump < total:
            return self.jump(psi, u_channel)
        evolved = self.propagator @ psi
        return evolved / np.linalg.norm(evolved), None

    def propagate(self, phi: np.ndarray, tau: float) -> np.ndarray:
        """exp(-i H_eff tau) phi without renormalization."""
        if tau == self.dt:
            return self.propagator @ phi
        return expm(tau * self.generator) @ phi

    def norm_crossing(self, start: np.ndarray, end: np.ndarray, span: float, threshold: float) -> float:
        """Time in (0, span] at which the squared norm reaches ``threshold``.

        Cubic Hermite interpolation of ||phi||^2 between the two ends, using
        d||phi||^2/dt = -sum_k rate_k <L_k+ L_k>.
        """
        q0, q1 = float(np.vdot(start, start).real), float(np.vdot(end, end).real)
        d0 = -span * float(self.decay @ (np.abs(start) ** 2))
        d1 = -span * float(self.decay @ (np.abs(end) ** 2))

        def excess(s: float) -> float:
            s2, s3 = s * s, s * s * s
            return ((2 * s3 - 3 * s2 + 1) * q0 + (s3 - 2 * s2 + s) * d0
                    + (3 * s2 - 2 * s3) * q1 + (s3 - s2) * d1 - threshold)

        if excess(1.0) >= 0:
            return span
        return span * brentq(excess, 0.0, 1.0, xtol=1e-14)

    def step(self, state: StateVector, draws: tuple[float, float]) -> tuple[StateVector, ChannelLabel | None]:
        if state.cutoff != self.cutoff:
            raise InvalidArgumentError(f"Cutoff mismatch: {state.cutoff} != {self.cutoff}")
        if abs(state.norm - 1) > NORM_TOL:
            raise InvalidArgumentError(f"State must be normalized, norm is {state.norm:.12g}")
        psi, label = self.advance(np.asarray(state.amplitudes), *draws)
        return StateVector(psi), label


def step(state: StateVector, params: SystemParams, dt: float,
         draws: tuple[float, float]) -> tuple[StateVector, ChannelLabel | None]:
    return JumpStepper(params, state.cutoff, dt).step(state, draws)


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    seed: int
    dt: float
    times: np.ndarray
    photon_number: np.ndarray
    parity: np.ndarray
    jumps: list[JumpEvent] = field(default_factory=list)
    snapshots: dict[float, StateVector] = field(default_factory=dict)

    def jump_times(self, label: ChannelLabel | None = None) -> np.ndarray:
        return np.array([jump.time for jump in self.jumps if label is None or jump.label == label])

    def mean_jump_spacing(self, label: ChannelLabel | None = None) -> float | None:
        times = self.jump_times(label)
        if times.size < 2:
            return None
        return float(np.mean(np.diff(times)))


def _output_stride(dt: float, output_dt: float | None) -> int:
    if output_dt is None:
        return 1
    stride = int(round(output_dt / dt))
    if stride < 1 or not np.isclose(stride * dt, output_dt, rtol=1e-9, atol=0):
        raise InvalidArgumentError(f"Output interval {output_dt} is not a multiple of dt={dt}")
    return stride


Move = tuple[np.ndarray, list[tuple[float, ChannelLabel, np.ndarray, np.ndarray]]]


def _first_order_moves(stepper: JumpStepper, psi: np.ndarray, steps: int,
                       rng: np.random.Generator) -> Iterator[Move]:
    """Yield the normalized state and its jumps after each step of the first-order scheme."""
    done = 0
    while done < steps:
        for u_jump, u_channel in rng.random((min(DRAW_BLOCK, steps - done), 2)):
            before = psi
            psi, label = stepper.advance(psi, u_jump, u_channel)
            done += 1
            yield psi, [] if label is None else [(done * stepper.dt, label, before, psi)]


def _waiting_time_moves(stepper: JumpStepper, psi: np.ndarray, steps: int,
                        rng: np.random.Generator) -> Iterator[Move]:
    """Yield the normalized state and its jumps after each grid step of the waiting-time scheme.

    The unnormalized state decays under H_eff until its squared norm meets the
    drawn threshold; the jump happens at that instant inside the step, and the
    rest of the step is propagated from the jumped state.
    """
    phi = psi
    threshold, u_channel = rng.random(2)
    for done in range(steps):
        stepper.check_step(phi)
        start, remaining, events = phi, stepper.dt, []
        while True:
            end = stepper.propagate(start, remaining)
            if float(np.vdot(end, end).real) > threshold:
                break
            tau = stepper.norm_crossing(start, end, remaining, threshold)
            before = stepper.propagate(start, tau)
            before = before / np.linalg.norm(before)
            after, label = stepper.jump(before, u_channel)
            remaining -= tau
            events.append((done * stepper.dt + stepper.dt - remaining, label, before, after))
            start = after
            threshold, u_channel = rng.random(2)
        phi = end
        yield phi / np.linalg.norm(phi), events


def run_trajectory(params: SystemParams, psi0: StateVector, horizon: float, dt: float = 1e-3,
                   seed: int = 0, output_dt: float | None = None, snapshot_times=(),
                   scheme: JumpScheme | str = JumpScheme.waiting_time) -> TrajectoryRecord:
    """Single photon-counting trajectory recorded on a fixed grid of ``dt`` steps.

    The default waiting-time scheme places each jump at the instant the
    decaying norm meets its threshold, so averages carry no step-size bias
    beyond the norm interpolation. ``first_order`` decides jump or no-jump once
    per step from the start-of-step probabilities.

    Identical (seed, dt, cutoff, params, scheme) reproduce the same jump log bit for bit.
    Snapshots are taken at the step closest to each requested time.
    """
    scheme = JumpScheme(scheme)
    steps = int(round(horizon / dt))
    if horizon <= 0 or steps < 1:
        raise InvalidArgumentError(f"Horizon {horizon} must cover at least one step of {dt}")
    stride = _output_stride(dt, output_dt)
    stepper = JumpStepper(params, psi0.cutoff, dt)
    psi = np.array(psi0.normalized().amplitudes)
    n = np.arange(stepper.cutoff, dtype=float)
    signs = parity_diagonal(stepper.cutoff)
    snapshot_steps = {int(round(t / dt)): float(t) for t in snapshot_times}
    if any(index < 0 or index > steps for index in snapshot_steps):
        raise InvalidArgumentError(f"Snapshot times must lie in [0, {horizon}]")

    record_count = steps // stride + 1
    times = np.arange(record_count) * stride * dt
    photon_number = np.empty(record_count)
    parity = np.empty(record_count)
    jumps: list[JumpEvent] = []
    snapshots: dict[float, StateVector] = {}

    def observe(index: int, weights: np.ndarray):
        photon_number[index] = n @ weights
        parity[index] = signs @ weights

    rng = np.random.default_rng(seed)
    logger.debug(f"Trajectory seed={seed}: {steps} {scheme.value} steps of dt={dt:g}, cutoff {stepper.cutoff}")
    observe(0, np.abs(psi) ** 2)
    if 0 in snapshot_steps:
        snapshots[snapshot_steps[0]] = StateVector(psi)

    moves = _waiting_time_moves if scheme is JumpScheme.waiting_time else _first_order_moves
    for done, (psi, events) in enumerate(moves(stepper, psi, steps, rng), start=1):
        for time, label, before, after in events:
            jumps.append(JumpEvent(time, label, float(signs @ (np.abs(before) ** 2)),
                                   float(signs @ (np.abs(after) ** 2))))
        if done % stride == 0:
            observe(done // stride, np.abs(psi) ** 2)
        if done in snapshot_steps:
            snapshots[snapshot_steps[done]] = StateVector(psi)

    logger.debug(f"Trajectory seed={seed} finished with {len(jumps)} jumps")
    return TrajectoryRecord(seed=seed, dt=dt, times=times, photon_number=photon_number, parity=parity,
                            jumps=jumps, snapshots=snapshots)
