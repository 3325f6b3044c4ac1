from kerrcat.dynamics.channels import ChannelLabel, JumpChannel, feedback_channel, jump_channels
from kerrcat.dynamics.evolution import EvolutionResult, evolve, validate_density_matrix
from kerrcat.dynamics.fidelity import fidelity
from kerrcat.dynamics.liouvillian import Liouvillian, liouvillian_apply, liouvillian_matrix, steady_state_numeric

__all__ = [
    'ChannelLabel', 'JumpChannel', 'feedback_channel', 'jump_channels', 'EvolutionResult', 'evolve',
    'validate_density_matrix', 'fidelity', 'Liouvillian', 'liouvillian_apply', 'liouvillian_matrix',
    'steady_state_numeric',
]
