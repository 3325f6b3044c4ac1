from enum import Enum
from typing import Annotated, Any

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field


class Parity(Enum):
    even = '+'
    odd = '-'

    @property
    def sign(self) -> int:
        return 1 if self is Parity.even else -1

    @classmethod
    def from_sign(cls, value: Any) -> "Parity":
        if isinstance(value, Parity):
            return value
        if value in ('+', 1, 'even', 'plus'):
            return cls.even
        if value in ('-', -1, 'odd', 'minus'):
            return cls.odd
        raise ValueError(f"Unknown parity {value!r}")

    def flipped(self) -> "Parity":
        return Parity.odd if self is Parity.even else Parity.even


def parse_complex(value: Any) -> complex:
    """Accept a number, ``"re,im"``, ``[re, im]`` or a complex literal like ``"1+2j"``."""
    if isinstance(value, complex):
        return value
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError("Complex value as a list needs exactly [re, im]")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        text = value.strip().replace(' ', '')
        if ',' in text:
            re_part, im_part = text.split(',', maxsplit=1)
            return complex(float(re_part), float(im_part))
        return complex(text)
    raise ValueError(f"Cannot read {value!r} as a complex number")


ComplexValue = Annotated[complex, BeforeValidator(parse_complex)]
Rate = Annotated[float, Field(ge=0)]
ParityValue = Annotated[Parity, BeforeValidator(Parity.from_sign)]


class SystemParams(BaseModel):
    """Physical parameters with hbar = 1; energies and rates in units of eta."""

    detuning: float = Field(default=0.0, description="Pump-cavity detuning Delta")
    kerr: float = Field(default=0.0, description="Photon-photon interaction U")
    pump: ComplexValue = Field(default=0j, description="Two-photon pump amplitude G")
    gamma: Rate = Field(default=0.0, description="One-photon loss rate")
    eta: Rate = Field(default=0.0, description="Two-photon loss rate")
    gamma_f: Rate = Field(default=0.0, description="Parity feedback loss rate")
    stabilized_parity: ParityValue = Field(default=Parity.even, description="Cat parity protected by feedback")
    one_photon_drive: ComplexValue = Field(default=0j, description="Coherent one-photon drive F")

    model_config = ConfigDict(frozen=True, extra='forbid')

    @property
    def is_dissipative(self) -> bool:
        return self.gamma > 0 or self.eta > 0

    @property
    def interaction(self) -> complex:
        return complex(self.kerr, -self.eta)

    def to_dict(self) -> dict[str, Any]:
        data = self.model_dump()
        data['pump'] = [self.pump.real, self.pump.imag]
        data['one_photon_drive'] = [self.one_photon_drive.real, self.one_photon_drive.imag]
        data['stabilized_parity'] = self.stabilized_parity.value
        return data
