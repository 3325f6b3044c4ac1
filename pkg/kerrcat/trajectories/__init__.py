from kerrcat.trajectories.ensemble import EnsembleAccumulator, EnsembleSummary, ensemble, trajectory_seed
from kerrcat.trajectories.jumps import (
    EffectiveHamiltonian, JumpEvent, JumpScheme, JumpStepper, TrajectoryRecord, effective_hamiltonian,
    run_trajectory, step,
)

__all__ = [
    'EnsembleAccumulator', 'EnsembleSummary', 'ensemble', 'trajectory_seed', 'EffectiveHamiltonian',
    'JumpEvent', 'JumpScheme', 'JumpStepper', 'TrajectoryRecord', 'effective_hamiltonian', 'run_trajectory', 'step',
]
