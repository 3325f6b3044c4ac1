"""Closed-form steady state of the two-photon driven Kerr resonator.

Matrix elements, correlation functions and the Wigner function are series in
F(g, c, l); every series is accumulated in log space and stopped once five
consecutive terms fall below ``series_tol`` relative to the running sum.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from loguru import logger

from kerrcat.analysis.wigner import GridSpec, WignerGrid
from kerrcat.config import settings
from kerrcat.exceptions import (
    CutoffTooSmallError, InvalidArgumentError, SeriesConvergenceError, UnsupportedParameterError,
)
from kerrcat.fock.models import DensityMatrix
from kerrcat.fock.schemas import SystemParams
from kerrcat.fock.utils import check_cutoff, log_factorials, suggest_cutoff
from kerrcat.steady.hypergeometric import FCoefficientTable, ReducedParams, f_coefficients

TAIL_MASS_TOL = 1e-10
CONSECUTIVE_SMALL_TERMS = 5
MAX_SERIES_TERMS = 1 << 15
AUTO_CUTOFF_STEP = 10
AUTO_CUTOFF_RETRIES = 4


@dataclass(frozen=True, eq=False)
class SteadyStateResult:
    density_matrix: DensityMatrix
    log_normalization: float
    reduced: ReducedParams
    cutoff: int
    series_terms: int
    tail_mass: float

    @property
    def normalization(self) -> float:
        return float(np.exp(self.log_normalization))

    def diagnostics(self) -> dict:
        return {
            'cutoff': self.cutoff,
            'series_terms': self.series_terms,
            'tail_mass': self.tail_mass,
            'log_normalization': self.log_normalization,
            'c': [self.reduced.c.real, self.reduced.c.imag],
            'g': [self.reduced.g.real, self.reduced.g.imag],
        }


def reduced_params(params: SystemParams) -> ReducedParams:
    denominator = params.interaction
    if denominator == 0:
        raise InvalidArgumentError("U - i*eta vanishes; reduced parameters undefined")
    return ReducedParams(
        c=complex(params.detuning, 0.5 * params.gamma) / denominator,
        g=params.pump / denominator,
    )


def _check_analytic(params: SystemParams):
    if not params.is_dissipative:
        raise UnsupportedParameterError("Steady state needs gamma > 0 or eta > 0")
    if params.gamma_f != 0:
        raise UnsupportedParameterError("Analytic steady state excludes parity feedback (gamma_f must be 0)")
    if params.one_photon_drive != 0:
        raise UnsupportedParameterError("Analytic steady state excludes a one-photon drive")


def _stop_length(log_terms: np.ndarray, log_tol: float) -> int | None:
    """Number of terms kept: up to the end of the first run of small terms."""
    running = np.logaddexp.accumulate(log_terms)
    # exact zeros count as small even before the sum has a nonzero term
    small = np.isneginf(log_terms) | (log_terms < running + log_tol)
    if small.size < CONSECUTIVE_SMALL_TERMS:
        return None
    window = np.convolve(small.astype(int), np.ones(CONSECUTIVE_SMALL_TERMS, dtype=int), 'valid')
    hits = np.nonzero(window == CONSECUTIVE_SMALL_TERMS)[0]
    if not hits.size:
        return None
    return int(hits[0]) + CONSECUTIVE_SMALL_TERMS


class FSeries:
    """A growing F table plus the stopping rule; reusable for fixed (g, c)."""

    def __init__(self, rp: ReducedParams, series_tol: float | None = None):
        self.reduced = rp
        self.series_tol = settings.SERIES_TOL if series_tol is None else series_tol
        if not 0 < self.series_tol < 1:
            raise InvalidArgumentError(f"series_tol must lie in (0, 1), got {self.series_tol}")
        self.log_tol = float(np.log(self.series_tol))
        self.table: FCoefficientTable = f_coefficients(rp, 64)
        self._log_norm: tuple[float, int] | None = None

    def ensure(self, max_index: int) -> FCoefficientTable:
        if self.table.max_index < max_index:
            self.table = f_coefficients(self.reduced, max(max_index, 2 * self.table.max_index))
        return self.table

    def converged_length(self, log_terms: Callable[[int], np.ndarray], margin: int = 0) -> int:
        length = 64
        while length <= MAX_SERIES_TERMS:
            self.ensure(length + margin)
            stop = _stop_length(log_terms(length), self.log_tol)
            if stop is not None:
                return stop
            length *= 2
        logger.error(f"Series for c={self.reduced.c}, g={self.reduced.g} not converged in {MAX_SERIES_TERMS} terms")
        raise SeriesConvergenceError()

    def log_f(self, start: int, length: int) -> np.ndarray:
        return self.ensure(start + length).log_magnitude[start:start + length]

    def phase(self, start: int, length: int) -> np.ndarray:
        return self.ensure(start + length).phase[start:start + length]

    def trace_terms(self, length: int) -> np.ndarray:
        ell = np.arange(length)
        return ell * np.log(2.0) + 2 * self.log_f(0, length) - log_factorials(length)

    def log_normalization(self) -> tuple[float, int]:
        """log N = log sum_k 2^k |F_k|^2 / k! and the number of terms used."""
        if self._log_norm is None:
            length = self.converged_length(self.trace_terms)
            self._log_norm = float(np.logaddexp.reduce(self.trace_terms(length))), length
        return self._log_norm


def _assemble(series: FSeries, cutoff: int, terms: int) -> tuple[np.ndarray, float]:
    """Unnormalized rho_nm / exp(2 shift) as B B^dagger, and the shift."""
    n = np.arange(cutoff)
    ell = np.arange(terms)
    table = series.ensure(cutoff + terms)
    index = n[:, None] + ell[None, :]
    lf = log_factorials(cutoff + terms)
    log_b = table.log_magnitude[index] - 0.5 * lf[n][:, None] - 0.5 * lf[ell][None, :]
    shift = float(np.max(log_b))
    b = np.exp(log_b - shift) * np.exp(1j * table.phase[index])
    return b @ b.conj().T, shift


def _steady_at_cutoff(series: FSeries, cutoff: int) -> SteadyStateResult:
    _, terms = series.log_normalization()
    unnormalized, shift = _assemble(series, cutoff, terms)
    unnormalized = 0.5 * (unnormalized + unnormalized.conj().T)
    trace = float(np.trace(unnormalized).real)
    rho = unnormalized / trace
    populations = rho.diagonal().real
    tail_mass = float(populations[-2:].sum())
    return SteadyStateResult(
        density_matrix=DensityMatrix(rho),
        log_normalization=float(np.log(trace) + 2 * shift),
        reduced=series.reduced,
        cutoff=cutoff,
        series_terms=terms,
        tail_mass=tail_mass,
    )


def steady_density_matrix(params: SystemParams, cutoff: int | None = None,
                          series_tol: float | None = None) -> SteadyStateResult:
    """Fock-basis steady state from the closed-form series.

    ``cutoff=None`` picks the heuristic size and grows it while the population
    of the last two Fock levels exceeds 1e-10; an explicit cutoff fails instead.
    """
    _check_analytic(params)
    rp = reduced_params(params)
    series = FSeries(rp, series_tol)
    auto = cutoff is None
    size = suggest_cutoff(params.pump, params.kerr, params.eta) if auto else check_cutoff(cutoff)
    logger.info(f"Exact steady state: c={rp.c:.6g}, g={rp.g:.6g}, cutoff={size}{' (auto)' if auto else ''}")

    for attempt in range(AUTO_CUTOFF_RETRIES + 1):
        result = _steady_at_cutoff(series, size)
        if result.tail_mass <= TAIL_MASS_TOL:
            logger.info(f"Steady state ready: {result.series_terms} series terms, tail mass {result.tail_mass:.2e}")
            return result
        if not auto or attempt == AUTO_CUTOFF_RETRIES:
            break
        logger.info(f"Tail mass {result.tail_mass:.2e} at cutoff {size}; growing cutoff")
        size += AUTO_CUTOFF_STEP

    logger.error(f"Cutoff {size} too small: tail mass {result.tail_mass:.2e}")
    raise CutoffTooSmallError(
        f"Tail mass {result.tail_mass:.2e} exceeds {TAIL_MASS_TOL:.0e} at cutoff {size}",
        required_cutoff=size + AUTO_CUTOFF_STEP,
        tail_mass=result.tail_mass,
    )


def steady_moment(params: SystemParams, n: int, m: int, series_tol: float | None = None,
                  series: FSeries | None = None) -> complex:
    """<a+^n a^m> = (1/N) sum_l (2^l / l!) F(l+m) F*(l+n)."""
    if n < 0 or m < 0:
        raise InvalidArgumentError(f"Moment orders must be nonnegative, got ({n}, {m})")
    _check_analytic(params)
    series = series or FSeries(reduced_params(params), series_tol)
    log_norm, _ = series.log_normalization()
    if (n + m) % 2:
        return 0j

    def log_terms(length: int) -> np.ndarray:
        ell = np.arange(length)
        return (ell * np.log(2.0) - log_factorials(length)
                + series.log_f(m, length) + series.log_f(n, length))

    length = series.converged_length(log_terms, margin=max(n, m))
    logs = log_terms(length) - log_norm
    phases = series.phase(m, length) - series.phase(n, length)
    return complex(np.sum(np.exp(logs) * np.exp(1j * phases)))


def _wigner_values(series: FSeries, betas: np.ndarray) -> np.ndarray:
    betas = np.asarray(betas, dtype=complex).ravel()
    log_norm, _ = series.log_normalization()
    radius = np.abs(2 * betas)
    angle = np.angle(betas)

    def log_terms_for(length: int, r: np.ndarray) -> np.ndarray:
        ell = np.arange(length)
        with np.errstate(divide='ignore', invalid='ignore'):
            powers = np.where(ell[None, :] == 0, 0.0, ell[None, :] * np.log(r)[:, None])
        return powers + series.log_f(0, length)[None, :] - log_factorials(length)[None, :]

    widest = np.array([radius.max()]) if radius.size else np.array([0.0])
    length = series.converged_length(lambda size: log_terms_for(size, widest)[0])
    logs = log_terms_for(length, radius)
    phases = series.phase(0, length)[None, :] - np.arange(length)[None, :] * angle[:, None]
    shift = np.max(logs, axis=1)
    partial = np.sum(np.exp(logs - shift[:, None]) * np.exp(1j * phases), axis=1)
    with np.errstate(divide='ignore'):
        log_w = (np.log(2 / np.pi) - 2 * np.abs(betas) ** 2 + 2 * shift
                 + 2 * np.log(np.abs(partial)) - log_norm)
    return np.exp(log_w)


def steady_wigner(params: SystemParams, beta: complex, series_tol: float | None = None) -> float:
    """(2/(pi N)) exp(-2|beta|^2) |sum_l (2 beta*)^l / l! F(l)|^2, never negative."""
    _check_analytic(params)
    series = FSeries(reduced_params(params), series_tol)
    return float(_wigner_values(series, np.array([beta]))[0])


def steady_wigner_grid(params: SystemParams, spec: GridSpec | None = None,
                       series_tol: float | None = None) -> WignerGrid:
    _check_analytic(params)
    spec = spec or GridSpec()
    series = FSeries(reduced_params(params), series_tol)
    betas = spec.points()
    logger.info(f"Analytic Wigner on {betas.size} grid points")
    values = _wigner_values(series, betas).reshape(betas.shape)
    return WignerGrid.from_values(spec, values)
