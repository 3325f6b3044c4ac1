import math

import numpy as np
from scipy.special import gammaln

from kerrcat.exceptions import InvalidArgumentError

MIN_AUTO_CUTOFF = 30


def check_cutoff(cutoff: int, minimum: int = 2) -> int:
    if int(cutoff) != cutoff or cutoff < minimum:
        raise InvalidArgumentError(f"Cutoff must be an integer >= {minimum}, got {cutoff}")
    return int(cutoff)


def log_factorials(size: int) -> np.ndarray:
    """log(n!) for n = 0..size-1, finite well beyond n = 170."""
    return gammaln(np.arange(size) + 1.0)


def suggest_cutoff(pump: complex, kerr: float, eta: float) -> int:
    """max(30, ceil(4|g| + 10)) with |g| = |G| / |U - i eta|, rounded up to even."""
    denominator = abs(complex(kerr, -eta))
    if denominator == 0:
        raise InvalidArgumentError("U - i*eta must be nonzero to size the cutoff")
    size = max(MIN_AUTO_CUTOFF, math.ceil(4 * abs(pump) / denominator + 10))
    return size + size % 2


def estimate_memory_bytes(cutoff: int) -> int:
    # The assembled Liouvillian (N^2 x N^2 complex) dominates.
    return 16 * cutoff ** 4
