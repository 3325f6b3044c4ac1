from kerrcat.experiments.router import ROUTES, run
from kerrcat.experiments.schemas import ExperimentConfig, InitialStateSpec, Scenario, TimeGrid, parse_initial_state
from kerrcat.experiments.session_maker import RunSessionManager
from kerrcat.experiments.store import ResultStore, ResultTable

__all__ = [
    'ROUTES', 'run', 'ExperimentConfig', 'InitialStateSpec', 'Scenario', 'TimeGrid', 'parse_initial_state',
    'RunSessionManager', 'ResultStore', 'ResultTable',
]
