import os
from typing import Callable

from loguru import logger

from kerrcat import __version__
from kerrcat.config import settings
from kerrcat.exceptions import InvalidArgumentError
from kerrcat.experiments import scenarios
from kerrcat.experiments.schemas import ExperimentConfig, Scenario
from kerrcat.experiments.session_maker import RunSessionManager
from kerrcat.experiments.store import ResultStore

Runner = Callable[[ExperimentConfig, ResultStore, int], dict]

ROUTES: dict[Scenario, Runner] = {
    Scenario.steady: scenarios.run_steady,
    Scenario.evolve: scenarios.run_evolve,
    Scenario.trajectory: scenarios.run_trajectory_scenario,
    Scenario.ensemble: scenarios.run_ensemble,
    Scenario.feedback: scenarios.run_feedback,
    Scenario.wigner: scenarios.run_wigner,
    Scenario.sweep: scenarios.run_sweep,
}


def run(config: ExperimentConfig, output_dir: str | None = None, workers: int | None = None) -> str:
    """Run one experiment and return the committed run directory."""
    root = output_dir or config.output_dir or settings.OUTPUT_DIR
    if workers is None:
        workers = settings.WORKERS
    if workers < 1:
        raise InvalidArgumentError(f"Worker count must be >= 1, got {workers}")
    runner = ROUTES[config.scenario]
    logger.info(f"Running scenario '{config.scenario.value}' as '{config.run_name}' into {root}")
    manager = RunSessionManager(root)
    with manager.transaction(config.run_name) as store:
        summary = runner(config, store, workers)
        store.add_json('run', {
            'scenario': config.scenario.value,
            'version': __version__,
            'config': config.echo(),
            'tables': sorted(store.written),
            'summary': summary,
        })
    return os.path.join(root, config.run_name)
