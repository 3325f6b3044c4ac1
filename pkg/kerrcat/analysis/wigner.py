from dataclasses import dataclass

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from kerrcat.fock.models import DensityMatrix, StateVector
from kerrcat.fock.operators import quadrature_eigensystem, parity_diagonal

CHUNK_POINTS = 512
CACHE_BYTES_LIMIT = 256 * 1024 ** 2


class GridSpec(BaseModel):
    re_min: float = Field(default=-5.0, description="Lower bound of Re(beta)")
    re_max: float = Field(default=5.0, description="Upper bound of Re(beta)")
    im_min: float = Field(default=-5.0, description="Lower bound of Im(beta)")
    im_max: float = Field(default=5.0, description="Upper bound of Im(beta)")
    step: float = Field(default=0.05, gt=0, description="Grid spacing in both directions")

    model_config = ConfigDict(frozen=True, extra='forbid')

    @model_validator(mode='after')
    def check_ranges(self):
        if self.re_max < self.re_min or self.im_max < self.im_min:
            raise ValueError("Grid upper bounds must not be below lower bounds")
        return self

    @classmethod
    def square(cls, half_width: float, step: float) -> "GridSpec":
        return cls(re_min=-half_width, re_max=half_width, im_min=-half_width, im_max=half_width, step=step)

    def axis(self, low: float, high: float) -> np.ndarray:
        count = int(round((high - low) / self.step)) + 1
        return low + self.step * np.arange(count)

    @property
    def re_axis(self) -> np.ndarray:
        return self.axis(self.re_min, self.re_max)

    @property
    def im_axis(self) -> np.ndarray:
        return self.axis(self.im_min, self.im_max)

    def points(self) -> np.ndarray:
        """Complex beta values, rows along Im(beta) and columns along Re(beta)."""
        re, im = np.meshgrid(self.re_axis, self.im_axis)
        return re + 1j * im


@dataclass(frozen=True, eq=False)
class WignerGrid:
    spec: GridSpec
    values: np.ndarray
    truncation_flags: np.ndarray

    @classmethod
    def from_values(cls, spec: GridSpec, values: np.ndarray, flags: np.ndarray | None = None) -> "WignerGrid":
        values = np.asarray(values, dtype=float)
        flags = np.zeros(values.shape, dtype=bool) if flags is None else np.asarray(flags, dtype=bool)
        return cls(spec=spec, values=values, truncation_flags=flags)

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    @property
    def min_location(self) -> complex:
        row, col = np.unravel_index(np.argmin(self.values), self.values.shape)
        return complex(self.spec.re_axis[col], self.spec.im_axis[row])

    @property
    def integral(self) -> float:
        return float(self.values.sum() * self.spec.step ** 2)

    @property
    def any_truncated(self) -> bool:
        return bool(self.truncation_flags.any())

    def rows(self) -> np.ndarray:
        """(Re beta, Im beta, W) triples, row-major over the grid."""
        points = self.spec.points()
        return np.column_stack([points.real.ravel(), points.imag.ravel(), self.values.ravel()])


def _displacement_stack(betas: np.ndarray, cutoff: int) -> np.ndarray:
    values, vectors = quadrature_eigensystem(cutoff)
    radius, theta = np.abs(betas), np.angle(betas)
    rotation = np.exp(1j * theta[:, None] * np.arange(cutoff)[None, :])
    phases = np.exp(1j * radius[:, None] * values[None, :])
    core = (vectors[None, :, :] * phases[:, None, :]) @ vectors.conj().T
    return rotation[:, :, None] * core * rotation.conj()[:, None, :]


class DisplacementCache:
    """Displacement operators for every point of a grid, built once per cutoff.

    Chunks are kept only while the total stays under ``limit_bytes``; larger
    grids rebuild them on each pass.
    """

    def __init__(self, spec: GridSpec, cutoff: int, limit_bytes: int = CACHE_BYTES_LIMIT):
        self.spec = spec
        self.cutoff = cutoff
        self.betas = spec.points().ravel()
        self.keep = self.betas.size * cutoff ** 2 * 16 <= limit_bytes
        self._chunks: dict[int, np.ndarray] = {}

    def chunks(self):
        for start in range(0, self.betas.size, CHUNK_POINTS):
            stack = self._chunks.get(start)
            if stack is None:
                stack = _displacement_stack(self.betas[start:start + CHUNK_POINTS], self.cutoff)
                if self.keep:
                    self._chunks[start] = stack
            yield start, stack


def wigner_numeric(state: DensityMatrix | StateVector, spec: GridSpec | None = None,
                   cache: DisplacementCache | None = None) -> WignerGrid:
    """W(beta) = (2/pi) Tr[rho D P D+] on a grid.

    Points with |beta|^2 > cutoff/4 are flagged as outside the truncation-safe region.
    """
    spec = spec or GridSpec()
    cutoff = state.cutoff
    if cache is None or cache.cutoff != cutoff or cache.spec != spec:
        cache = DisplacementCache(spec, cutoff)
    signs = parity_diagonal(cutoff)
    values = np.empty(cache.betas.size)
    logger.info(f"Numeric Wigner: {cache.betas.size} points, cutoff {cutoff}")

    for start, stack in cache.chunks():
        stop = start + stack.shape[0]
        if isinstance(state, StateVector):
            # D+ psi for every point
            shifted = np.einsum('bji,j->bi', stack.conj(), state.amplitudes)
            values[start:stop] = (2 / np.pi) * (np.abs(shifted) ** 2 @ signs)
        else:
            product = state.matrix @ stack
            values[start:stop] = (2 / np.pi) * np.einsum('bin,bin,n->b', stack.conj(), product, signs).real

    flags = (np.abs(cache.betas) ** 2 > cutoff / 4).reshape(spec.points().shape)
    if flags.any():
        logger.warning(f"{int(flags.sum())} Wigner points lie outside |beta|^2 <= {cutoff / 4}")
    return WignerGrid.from_values(spec, values.reshape(flags.shape), flags)
