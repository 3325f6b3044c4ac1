EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CUTOFF = 4


class KerrCatError(Exception):
    detail: str = 'Numerical failure'
    exit_code: int = EXIT_NUMERICAL

    def __init__(self, detail: str | None = None):
        self.detail = detail or self.detail
        super().__init__(self.detail)


class InvalidArgumentError(KerrCatError, ValueError):
    detail = 'Invalid argument'


class CutoffTooSmallError(KerrCatError):
    detail = 'Fock cutoff too small'
    exit_code = EXIT_CUTOFF

    def __init__(self, detail: str | None = None, required_cutoff: int | None = None,
                 tail_mass: float | None = None):
        self.required_cutoff = required_cutoff
        self.tail_mass = tail_mass
        super().__init__(detail)


class DegenerateCatError(InvalidArgumentError):
    detail = 'Odd cat state with zero amplitude is the zero vector'


class DegenerateParameterError(KerrCatError):
    detail = 'Hypergeometric series hits a pole'

    def __init__(self, detail: str | None = None, k: int | None = None):
        self.k = k
        super().__init__(detail)


class UnsupportedParameterError(KerrCatError):
    detail = 'Parameter not supported by this routine'


class InvalidStateError(KerrCatError):
    detail = 'Not a valid density matrix'


class StiffnessError(KerrCatError):
    detail = 'Integrator step size underflow; use a smaller cutoff or larger tolerances'


class StepTooLargeError(KerrCatError):
    detail = 'Jump probability per step exceeds 0.1'

    def __init__(self, detail: str | None = None, suggested_dt: float | None = None):
        self.suggested_dt = suggested_dt
        super().__init__(detail)


class AmbiguousParityError(KerrCatError):
    detail = 'State has no definite parity to fit a cat state'


class SeriesConvergenceError(KerrCatError):
    detail = 'Series did not converge within the term cap'


class ConfigError(KerrCatError):
    detail = 'Invalid experiment config'
    exit_code = EXIT_CONFIG
