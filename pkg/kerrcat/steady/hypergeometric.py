from dataclasses import dataclass

import numpy as np
from loguru import logger

from kerrcat.exceptions import DegenerateParameterError, InvalidArgumentError

POLE_TOL = 1e-12


@dataclass(frozen=True)
class ReducedParams:
    """c = (Delta + i gamma/2)/(U - i eta) and g = G/(U - i eta)."""

    c: complex
    g: complex

    def __post_init__(self):
        if not (np.isfinite(self.c) and np.isfinite(self.g)):
            raise InvalidArgumentError(f"Reduced parameters must be finite, got c={self.c}, g={self.g}")


@dataclass(frozen=True, eq=False)
class FCoefficientTable:
    """F(g, c, l) for l = 0..max_index, stored as log-magnitude and phase.

    Odd entries are exact zeros (log-magnitude -inf).
    """

    reduced: ReducedParams
    log_magnitude: np.ndarray
    phase: np.ndarray

    def __post_init__(self):
        self.log_magnitude.setflags(write=False)
        self.phase.setflags(write=False)

    @property
    def max_index(self) -> int:
        return self.log_magnitude.shape[0] - 1

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_magnitude) * np.exp(1j * self.phase)

    def __getitem__(self, index: int) -> complex:
        return complex(np.exp(self.log_magnitude[index]) * np.exp(1j * self.phase[index]))


def _pole_index(c: complex, count: int) -> int | None:
    ks = np.arange(count)
    hits = np.nonzero(np.abs(ks - 2 * c) < POLE_TOL)[0]
    return int(hits[0]) if hits.size else None


def hyp2f1_neg_int(ell: int, c: complex) -> complex:
    """Terminating 2F1(-ell, -c; -2c; 2) summed term by term.

    Exact for small ell; the alternating terms cancel badly past ell ~ 30, where
    ``f_coefficients`` should be used instead.
    """
    if ell < 0 or int(ell) != ell:
        raise InvalidArgumentError(f"Series index must be a nonnegative integer, got {ell}")
    c = complex(c)
    pole = _pole_index(c, ell)
    if pole is not None:
        raise DegenerateParameterError(f"(-2c)_k vanishes at k={pole} for c={c}", k=pole)
    term = 1.0 + 0j
    total = term
    for k in range(ell):
        term *= (k - ell) * (k - c) / ((k - 2 * c) * (k + 1)) * 2
        total += term
    return total


def f_coefficients(rp: ReducedParams, max_index: int) -> FCoefficientTable:
    """Table of F(g, c, l) = (i sqrt(g))^l 2F1(-l, -c; -2c; 2), l = 0..max_index.

    Uses the contiguous relation (l - 2c) 2F1(-l-1) = l 2F1(-l+1) of the z = 2
    series, so even entries are products of ratios and odd entries vanish.
    """
    if max_index < 0:
        raise InvalidArgumentError(f"max_index must be >= 0, got {max_index}")
    c, g = complex(rp.c), complex(rp.g)
    pole = _pole_index(c, max_index)
    if pole is not None:
        logger.error(f"Pole guard tripped at k={pole} for c={c}")
        raise DegenerateParameterError(f"(-2c)_k vanishes at k={pole} for c={c}", k=pole)

    size = max_index + 1
    ell = np.arange(size)
    log_f = np.full(size, -np.inf)
    arg_f = np.zeros(size)
    log_f[0] = 0.0
    odd = np.arange(1, size - 1, 2)
    if odd.size:
        ratios = odd / (odd - 2 * c)
        log_f[2::2] = np.cumsum(np.log(np.abs(ratios)))
        arg_f[2::2] = np.cumsum(np.angle(ratios))

    even = ell % 2 == 0
    log_magnitude = np.full(size, -np.inf)
    phase = np.zeros(size)
    if g == 0:
        log_magnitude[0] = 0.0
    else:
        half_log_g = 0.5 * np.log(abs(g))
        log_magnitude[even] = ell[even] * half_log_g + log_f[even]
        # (i sqrt g)^l with l even is (-g)^(l/2): i^l = (-1)^(l/2).
        phase[even] = np.mod(
            0.5 * ell[even] * np.angle(g) + np.pi * ((ell[even] // 2) % 2) + arg_f[even],
            2 * np.pi,
        )
    return FCoefficientTable(reduced=rp, log_magnitude=log_magnitude, phase=phase)
