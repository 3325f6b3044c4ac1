from dataclasses import dataclass

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from kerrcat.exceptions import AmbiguousParityError
from kerrcat.fock.models import StateVector
from kerrcat.fock.operators import parity_diagonal
from kerrcat.fock.schemas import Parity
from kerrcat.fock.utils import log_factorials

GRID_POINTS = 41
PARITY_TOL = 1e-6
REFINE_TOL = 1e-9
MAX_SWEEPS = 60


@dataclass(frozen=True)
class CatFit:
    alpha: complex
    parity: Parity
    overlap: float

    def to_dict(self) -> dict:
        return {
            'alpha_re': self.alpha.real,
            'alpha_im': self.alpha.imag,
            'alpha_abs': abs(self.alpha),
            'parity': self.parity.sign,
            'overlap': self.overlap,
        }


def cat_overlaps(amplitudes: np.ndarray, parity: Parity, alphas: np.ndarray) -> np.ndarray:
    """|<C_alpha|psi>| for many alpha at once, cats normalized on the truncated space."""
    alphas = np.atleast_1d(np.asarray(alphas, dtype=complex))
    cutoff = amplitudes.shape[0]
    n = np.arange(cutoff)
    radius = np.abs(alphas)
    with np.errstate(divide='ignore', invalid='ignore'):
        log_r = np.where(n[None, :] == 0, 0.0, n[None, :] * np.log(radius)[:, None])
    log_magnitude = log_r - 0.5 * log_factorials(cutoff)[None, :]
    mask = (parity_diagonal(cutoff) == parity.sign)[None, :]
    log_magnitude = np.where(mask, log_magnitude, -np.inf)
    peak = np.max(log_magnitude, axis=1, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    cats = np.exp(log_magnitude - peak) * np.exp(1j * np.angle(alphas)[:, None] * n[None, :])
    norms = np.linalg.norm(cats, axis=1)
    projections = np.abs(cats.conj() @ amplitudes)
    with np.errstate(divide='ignore', invalid='ignore'):
        result = np.where(norms > 0, projections / norms, 0.0)
    return np.minimum(result, 1.0)


def fit_cat(state: StateVector) -> CatFit:
    """Cat state |C_alpha^+-> closest to ``state``; parity from the sign of <P>.

    Coarse 41 x 41 grid over |alpha| in [0, sqrt(2<n>) + 2] and phase in [0, pi),
    then alternating one-dimensional bounded refinements of |alpha| and phase.
    """
    psi = state.normalized().amplitudes
    weights = np.abs(psi) ** 2
    signs = parity_diagonal(state.cutoff)
    mean_parity = float(signs @ weights)
    if abs(mean_parity) < PARITY_TOL:
        raise AmbiguousParityError(f"<P> = {mean_parity:.2e} is too close to zero to pick a cat parity")
    parity = Parity.even if mean_parity > 0 else Parity.odd
    mean_n = float(np.arange(state.cutoff) @ weights)

    radii = np.linspace(0.0, np.sqrt(2 * mean_n) + 2, GRID_POINTS)
    angles = np.linspace(0.0, np.pi, GRID_POINTS, endpoint=False)
    grid = radii[:, None] * np.exp(1j * angles[None, :])
    coarse = cat_overlaps(psi, parity, grid.ravel()).reshape(grid.shape)
    i, j = np.unravel_index(np.argmax(coarse), coarse.shape)
    radius, angle, best = radii[i], angles[j], coarse[i, j]
    d_radius, d_angle = radii[1] - radii[0], angles[1] - angles[0]

    def loss(r: float, phi: float) -> float:
        return -float(cat_overlaps(psi, parity, np.array([r * np.exp(1j * phi)]))[0])

    for _ in range(MAX_SWEEPS):
        previous = (radius, angle)
        step = minimize_scalar(lambda r: loss(r, angle), bounds=(max(0.0, radius - d_radius), radius + d_radius),
                               method='bounded', options={'xatol': REFINE_TOL})
        if -step.fun > best:
            radius, best = float(step.x), -float(step.fun)
        step = minimize_scalar(lambda phi: loss(radius, phi), bounds=(angle - d_angle, angle + d_angle),
                               method='bounded', options={'xatol': REFINE_TOL})
        if -step.fun > best:
            angle, best = float(step.x), -float(step.fun)
        if abs(radius - previous[0]) < REFINE_TOL and abs(angle - previous[1]) < REFINE_TOL:
            break

    # alpha and -alpha give the same cat
    angle = float(np.mod(angle, np.pi))
    if np.isclose(angle, np.pi, rtol=0, atol=1e-6):
        angle = 0.0
    alpha = complex(radius * np.exp(1j * angle)) if radius > 0 else 0j
    logger.debug(f"Cat fit: alpha={alpha:.6g}, parity={parity.value}, overlap={best:.12f}")
    return CatFit(alpha=alpha, parity=parity, overlap=float(best))
