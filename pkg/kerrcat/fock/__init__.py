from kerrcat.fock.models import DensityMatrix, OperatorMatrix, StateVector
from kerrcat.fock.operators import (
    annihilation, creation, displacement, expectation, hamiltonian, identity, number, parity,
    parity_projector,
)
from kerrcat.fock.schemas import Parity, SystemParams
from kerrcat.fock.states import cat_state, coherent_state, fock_mixture, fock_state, vacuum
from kerrcat.fock.utils import suggest_cutoff

__all__ = [
    'DensityMatrix', 'OperatorMatrix', 'StateVector', 'Parity', 'SystemParams',
    'annihilation', 'creation', 'displacement', 'expectation', 'hamiltonian', 'identity',
    'number', 'parity', 'parity_projector', 'cat_state', 'coherent_state', 'fock_mixture',
    'fock_state', 'vacuum', 'suggest_cutoff',
]
