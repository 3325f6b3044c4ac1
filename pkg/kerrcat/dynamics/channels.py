from dataclasses import dataclass
from enum import Enum

import numpy as np

from kerrcat.exceptions import InvalidArgumentError
from kerrcat.fock.models import OperatorMatrix
from kerrcat.fock.operators import annihilation, parity_projector
from kerrcat.fock.schemas import Parity, SystemParams


class ChannelLabel(Enum):
    one_photon = 'one-photon'
    two_photon = 'two-photon'
    feedback = 'feedback'


@dataclass(frozen=True, eq=False)
class JumpChannel:
    operator: OperatorMatrix
    rate: float
    label: ChannelLabel

    def __post_init__(self):
        if self.rate < 0:
            raise InvalidArgumentError(f"Channel rate must be >= 0, got {self.rate}")

    @property
    def loss_operator(self) -> np.ndarray:
        """L+ L."""
        matrix = self.operator.matrix
        return matrix.conj().T @ matrix

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(label={self.label.value}, rate={self.rate}, cutoff={self.operator.cutoff})"


def feedback_channel(suppressed: Parity | str | int, gamma_f: float, cutoff: int) -> JumpChannel:
    """a_f = a (1 + s P)/2 for suppressed parity s: the projector acts first, then a lowers."""
    suppressed = Parity.from_sign(suppressed)
    if gamma_f < 0:
        raise InvalidArgumentError(f"Feedback rate must be >= 0, got {gamma_f}")
    projector = parity_projector(suppressed.sign, cutoff)
    return JumpChannel(annihilation(cutoff) @ projector, gamma_f, ChannelLabel.feedback)


def jump_channels(params: SystemParams, cutoff: int) -> list[JumpChannel]:
    """Channels with a nonzero rate, in the order one-photon, two-photon, feedback."""
    a = annihilation(cutoff)
    channels = []
    if params.gamma > 0:
        channels.append(JumpChannel(a, params.gamma, ChannelLabel.one_photon))
    if params.eta > 0:
        channels.append(JumpChannel(a @ a, params.eta, ChannelLabel.two_photon))
    if params.gamma_f > 0:
        channels.append(feedback_channel(params.stabilized_parity.flipped(), params.gamma_f, cutoff))
    return channels
