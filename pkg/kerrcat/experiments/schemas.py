from dataclasses import dataclass
from enum import Enum
from typing import Annotated, Any, Literal

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, model_validator

from kerrcat.exceptions import InvalidArgumentError
from kerrcat.fock.models import StateVector
from kerrcat.fock.schemas import Parity, SystemParams, parse_complex
from kerrcat.fock.states import cat_state, coherent_state, fock_state, vacuum
from kerrcat.analysis.wigner import GridSpec
from kerrcat.trajectories.jumps import JumpScheme


class Scenario(Enum):
    steady = 'steady'
    evolve = 'evolve'
    trajectory = 'trajectory'
    ensemble = 'ensemble'
    feedback = 'feedback'
    wigner = 'wigner'
    sweep = 'sweep'


@dataclass(frozen=True)
class InitialStateSpec:
    """Parsed form of ``vacuum``, ``fock:n``, ``coherent:re,im`` or ``cat:+|-:re,im``.

    ``coherent:fit`` and ``cat:+:fit`` take alpha from the cat fit of the
    leading steady-state eigenstate; ``fit:scale,phase`` rescales and rotates it.
    """

    kind: Literal['vacuum', 'fock', 'coherent', 'cat']
    n: int = 0
    alpha: complex = 0j
    parity: Parity = Parity.even
    from_fit: bool = False
    scale: float = 1.0
    phase: float = 0.0

    def resolve_alpha(self, fitted: complex | None) -> complex:
        if not self.from_fit:
            return self.alpha
        if fitted is None:
            raise InvalidArgumentError(f"Initial state '{self}' needs a fitted cat amplitude")
        return fitted * self.scale * np.exp(1j * self.phase)

    def build(self, cutoff: int, fitted: complex | None = None) -> StateVector:
        if self.kind == 'vacuum':
            return vacuum(cutoff)
        if self.kind == 'fock':
            return fock_state(self.n, cutoff)
        alpha = self.resolve_alpha(fitted)
        if self.kind == 'coherent':
            return coherent_state(alpha, cutoff)
        return cat_state(alpha, self.parity, cutoff)

    def __str__(self) -> str:
        if self.kind == 'vacuum':
            return 'vacuum'
        if self.kind == 'fock':
            return f'fock:{self.n}'
        if self.from_fit:
            amplitude = 'fit' if (self.scale, self.phase) == (1.0, 0.0) else f'fit:{self.scale:g},{self.phase:g}'
        else:
            amplitude = f'{self.alpha.real:g},{self.alpha.imag:g}'
        prefix = 'coherent' if self.kind == 'coherent' else f'cat:{self.parity.value}'
        return f'{prefix}:{amplitude}'


def _parse_amplitude(text: str) -> dict[str, Any]:
    if text == 'fit':
        return {'from_fit': True}
    if text.startswith('fit:'):
        scale, phase = (float(part) for part in text[4:].split(','))
        return {'from_fit': True, 'scale': scale, 'phase': phase}
    return {'alpha': parse_complex(text)}


def parse_initial_state(value: Any) -> InitialStateSpec:
    if isinstance(value, InitialStateSpec):
        return value
    if not isinstance(value, str):
        raise ValueError(f"Initial state must be a string, got {value!r}")
    text = value.strip().replace(' ', '')
    kind, _, rest = text.partition(':')
    try:
        if kind == 'vacuum' and not rest:
            return InitialStateSpec('vacuum')
        if kind == 'fock':
            n = int(rest)
            if n < 0:
                raise ValueError
            return InitialStateSpec('fock', n=n)
        if kind == 'coherent' and rest:
            return InitialStateSpec('coherent', **_parse_amplitude(rest))
        if kind == 'cat':
            sign, _, amplitude = rest.partition(':')
            return InitialStateSpec('cat', parity=Parity.from_sign(sign), **_parse_amplitude(amplitude))
    except (TypeError, ValueError):
        pass
    raise ValueError(f"Unrecognized initial state '{value}'; expected vacuum, fock:n, "
                     f"coherent:re,im or cat:+|-:re,im")


InitialState = Annotated[InitialStateSpec, BeforeValidator(parse_initial_state), PlainSerializer(str)]


class TimeGrid(BaseModel):
    stop: float = Field(gt=0, description="Final time in units of 1/eta")
    step: float = Field(gt=0, description="Output spacing")

    model_config = ConfigDict(frozen=True, extra='forbid')

    @model_validator(mode='after')
    def check_step(self):
        if self.step > self.stop:
            raise ValueError("Output step exceeds the final time")
        return self

    def points(self) -> np.ndarray:
        count = int(round(self.stop / self.step))
        return self.step * np.arange(count + 1)


class SweepSpec(BaseModel):
    """Parameter lists whose cross product is scanned; omitted axes keep the base value."""

    detuning: list[float] | None = None
    kerr: list[float] | None = None
    pump: list[Annotated[complex, BeforeValidator(parse_complex)]] | None = None
    gamma: list[Annotated[float, Field(ge=0)]] | None = None
    eta: list[Annotated[float, Field(ge=0)]] | None = None
    gamma_f: list[Annotated[float, Field(ge=0)]] | None = None

    model_config = ConfigDict(frozen=True, extra='forbid')

    def axes(self, base: SystemParams) -> dict[str, list]:
        axes = {}
        for name in type(self).model_fields:
            values = getattr(self, name)
            if values is None:
                values = [getattr(base, name)]
            key = (lambda v: (v.real, v.imag)) if name == 'pump' else None
            axes[name] = sorted(set(values), key=key)
        return axes


class ExperimentConfig(BaseModel):
    scenario: Scenario
    name: str | None = Field(default=None, pattern=r'^[A-Za-z0-9_.-]+$')
    params: SystemParams
    cutoff: Annotated[int, Field(ge=2)] | Literal['auto'] = 'auto'
    initial_states: list[InitialState] = Field(default_factory=lambda: [parse_initial_state('vacuum')])
    time: TimeGrid | None = None
    dt: float = Field(default=1e-3, gt=0, description="Trajectory time step")
    jump_scheme: JumpScheme = JumpScheme.waiting_time
    count: int = Field(default=1, ge=1, description="Trajectories in an ensemble")
    seed: int = Field(default=0, ge=0, description="Master seed")
    series_tol: float | None = Field(default=None, gt=0)
    rtol: float | None = Field(default=None, gt=0)
    atol: float | None = Field(default=None, gt=0)
    wigner: GridSpec | None = None
    wigner_times: list[Annotated[float, Field(ge=0)]] = Field(default_factory=list)
    wigner_method: Literal['analytic', 'numeric'] = 'analytic'
    wigner_state: Literal['steady', 'initial'] = 'steady'
    gamma_f: list[Annotated[float, Field(ge=0)]] | None = None
    sweep: SweepSpec | None = None
    reference: bool = Field(default=False, description="Add the master-equation curves to ensemble output")
    output_dir: str | None = None

    model_config = ConfigDict(frozen=True, extra='forbid')

    @model_validator(mode='after')
    def check_scenario(self):
        scenario = self.scenario
        if scenario in (Scenario.evolve, Scenario.trajectory, Scenario.ensemble) and self.time is None:
            raise ValueError(f"Scenario '{scenario.value}' needs a 'time' grid")
        if scenario == Scenario.feedback and not self.gamma_f:
            raise ValueError("Scenario 'feedback' needs a non-empty 'gamma_f' list")
        if scenario == Scenario.sweep and self.sweep is None:
            raise ValueError("Scenario 'sweep' needs a 'sweep' block")
        if self.time is not None and any(t > self.time.stop for t in self.wigner_times):
            raise ValueError("wigner_times must not exceed time.stop")
        return self

    @property
    def run_name(self) -> str:
        return self.name or self.scenario.value

    @property
    def wigner_grid(self) -> GridSpec:
        return self.wigner or GridSpec()

    def echo(self) -> dict:
        data = self.model_dump(mode='json', exclude_none=True)
        data['params'] = self.params.to_dict()
        if self.sweep is not None and self.sweep.pump is not None:
            data['sweep']['pump'] = [[value.real, value.imag] for value in self.sweep.pump]
        return data
