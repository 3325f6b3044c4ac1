import itertools
from multiprocessing import Pool

import numpy as np
from loguru import logger

from kerrcat import __version__
from kerrcat.analysis import fit_cat, observable_split, spectral_decompose, wigner_numeric
from kerrcat.analysis.catfit import CatFit
from kerrcat.analysis.wigner import GridSpec, WignerGrid
from kerrcat.dynamics import ChannelLabel, evolve, fidelity, steady_state_numeric
from kerrcat.exceptions import AmbiguousParityError, DegenerateCatError
from kerrcat.experiments.schemas import ExperimentConfig
from kerrcat.experiments.store import ResultStore, ResultTable
from kerrcat.fock import DensityMatrix, SystemParams, cat_state, number, parity, suggest_cutoff
from kerrcat.fock.operators import parity_diagonal
from kerrcat.fock.states import required_cutoff
from kerrcat.steady import FSeries, reduced_params, steady_density_matrix, steady_moment, steady_wigner_grid
from kerrcat.trajectories import ensemble, run_trajectory, trajectory_seed

CHANNEL_CODES = {ChannelLabel.one_photon: 1, ChannelLabel.two_photon: 2, ChannelLabel.feedback: 3}
SPECTRUM_ROWS = 10
NAN_FIT = {'alpha_re': np.nan, 'alpha_im': np.nan, 'alpha_abs': np.nan, 'parity': np.nan, 'overlap': np.nan}


def analytic_supported(params: SystemParams) -> bool:
    return params.is_dissipative and params.gamma_f == 0 and params.one_photon_drive == 0


def resolve_cutoff(config: ExperimentConfig) -> int:
    """Explicit cutoff, or the heuristic enlarged to hold every explicit initial amplitude."""
    if config.cutoff != 'auto':
        return config.cutoff
    size = suggest_cutoff(config.params.pump, config.params.kerr, config.params.eta)
    for spec in config.initial_states:
        if spec.kind in ('coherent', 'cat') and not spec.from_fit:
            size = max(size, required_cutoff(spec.alpha))
    return size + size % 2


def steady_state(params: SystemParams, cutoff: int | None, series_tol: float | None = None) -> tuple[DensityMatrix, dict]:
    """Closed-form steady state where it applies, Liouvillian null vector otherwise.

    ``cutoff=None`` lets the closed form grow its own cutoff; the numeric route
    then uses the heuristic size.
    """
    if analytic_supported(params):
        result = steady_density_matrix(params, cutoff, series_tol)
        return result.density_matrix, {'method': 'analytic', **result.diagnostics()}
    size = cutoff or suggest_cutoff(params.pump, params.kerr, params.eta)
    return steady_state_numeric(params, size), {'method': 'numeric', 'cutoff': size}


def _metadata(config: ExperimentConfig, cutoff: int | None, **extra) -> dict:
    return {'config': config.echo(), 'version': __version__, 'cutoff': cutoff, 'seed': config.seed, **extra}


def _safe_fit(state) -> CatFit | None:
    try:
        return fit_cat(state)
    except AmbiguousParityError as e:
        logger.warning(f"Cat fit skipped: {e}")
        return None


def _fit_values(fit: CatFit | None) -> dict:
    return fit.to_dict() if fit is not None else NAN_FIT


def _fitted_alpha(config: ExperimentConfig, target: DensityMatrix) -> complex | None:
    if not any(spec.from_fit for spec in config.initial_states):
        return None
    fit = fit_cat(spectral_decompose(target).eigenstates[0])
    logger.info(f"Initial states use fitted alpha = {fit.alpha:.6g}")
    return fit.alpha


def _wigner_table(name: str, grid: WignerGrid, metadata: dict) -> ResultTable:
    rows = grid.rows()
    return ResultTable.from_columns(name, {
        're_beta': ('1', rows[:, 0]),
        'im_beta': ('1', rows[:, 1]),
        'wigner': ('1', rows[:, 2]),
        'truncated': ('flag', grid.truncation_flags.ravel().astype(float)),
    }, {**metadata, 'grid': grid.spec.model_dump(), 'min_value': grid.min_value})


def _parallel_map(func, tasks: list, workers: int) -> list:
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            return pool.map(func, tasks)
    return [func(task) for task in tasks]


def run_steady(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    params = config.params
    result = steady_density_matrix(params, None if config.cutoff == 'auto' else config.cutoff, config.series_tol)
    cutoff = result.cutoff
    rho = result.density_matrix
    report = spectral_decompose(rho)
    series = FSeries(reduced_params(params), config.series_tol)
    mean_n = steady_moment(params, 1, 1, series=series).real
    order = steady_moment(params, 0, 2, series=series)
    n_split = observable_split(report, number(cutoff))
    p_split = observable_split(report, parity(cutoff))
    first, second = _fit_values(_safe_fit(report.eigenstates[0])), _fit_values(_safe_fit(report.eigenstates[1]))
    metadata = _metadata(config, cutoff, diagnostics=result.diagnostics())

    shown = min(SPECTRUM_ROWS, cutoff)
    summary = {
        'mean_photon_number': ('photons', mean_n),
        'a2_re': ('1', order.real),
        'a2_im': ('1', order.imag),
        'p1': ('1', report.probabilities[0]),
        'p2': ('1', report.probabilities[1]),
        'residual': ('1', report.residual),
        'n_first': ('photons', n_split.first.real),
        'n_second': ('photons', n_split.second.real),
        'n_bound': ('photons', n_split.bound),
        'parity_total': ('1', p_split.total.real),
        'parity_first': ('1', p_split.first.real),
        'parity_second': ('1', p_split.second.real),
        'parity_bound': ('1', p_split.bound),
        **{f'{key}_1': ('1', value) for key, value in first.items()},
        **{f'{key}_2': ('1', value) for key, value in second.items()},
        'series_terms': ('count', result.series_terms),
        'tail_mass': ('1', result.tail_mass),
    }
    store.add_many([
        ResultTable.from_columns('summary', summary, metadata),
        ResultTable.from_columns('populations', {
            'n': ('photons', np.arange(cutoff)),
            'probability': ('1', rho.populations),
        }, metadata),
        ResultTable.from_columns('spectrum', {
            'k': ('index', np.arange(1, shown + 1)),
            'probability': ('1', report.probabilities[:shown]),
            'photon_number': ('photons', report.photon_numbers[:shown]),
            'parity': ('1', report.parities[:shown]),
        }, metadata),
    ])
    return {'cutoff': cutoff, 'mean_photon_number': mean_n, 'residual': report.residual,
            'overlap_1': first['overlap'], 'overlap_2': second['overlap']}


def run_evolve(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    params = config.params
    cutoff = resolve_cutoff(config)
    target, diagnostics = steady_state(params, cutoff, config.series_tol)
    fitted = _fitted_alpha(config, target)
    times = config.time.points()
    metadata = _metadata(config, cutoff, steady=diagnostics,
                         initial_states=[str(spec) for spec in config.initial_states])

    curves, relaxation, wigner_tables = [], [], []
    for index, spec in enumerate(config.initial_states):
        psi0 = spec.build(cutoff, fitted)
        result = evolve(params, psi0.to_density(), times, config.rtol, config.atol, target=target,
                        store_states=bool(config.wigner_times))
        curves.append(np.column_stack([np.full(times.size, index), times, result.photon_number,
                                       result.parity, result.fidelity]))
        reached = result.first_time_at_least(0.999)
        alpha = spec.resolve_alpha(fitted) if spec.kind in ('coherent', 'cat') else 0j
        relaxation.append([index, alpha.real, alpha.imag, np.nan if reached is None else reached,
                           result.steps, result.rejected_steps, result.repair_total])
        for t in config.wigner_times:
            slot = int(np.argmin(np.abs(times - t)))
            grid = wigner_numeric(result.states[slot], config.wigner_grid)
            wigner_tables.append(_wigner_table(f'wigner_state{index}_t{times[slot]:g}', grid,
                                               {**metadata, 'state': index, 'time': times[slot]}))

    store.add(ResultTable('evolution', ['state', 't', 'photon_number', 'parity', 'fidelity'],
                          ['index', '1/eta', 'photons', '1', '1'], np.vstack(curves), metadata))
    store.add(ResultTable('relaxation', ['state', 'alpha_re', 'alpha_im', 't_fidelity_0999', 'steps',
                                         'rejected_steps', 'repair_total'],
                          ['index', '1', '1', '1/eta', 'count', 'count', '1'], np.array(relaxation), metadata))
    store.add_many(wigner_tables)
    return {'cutoff': cutoff, 'states': len(config.initial_states),
            'relaxation_times': [row[3] for row in relaxation]}


def _initial_state(config: ExperimentConfig, cutoff: int):
    spec = config.initial_states[0]
    fitted = None
    if spec.from_fit:
        fitted = _fitted_alpha(config, steady_state(config.params, cutoff, config.series_tol)[0])
    return spec.build(cutoff, fitted)


def run_trajectory_scenario(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    cutoff = resolve_cutoff(config)
    psi0 = _initial_state(config, cutoff)
    seed = trajectory_seed(config.seed, 0)
    record = run_trajectory(config.params, psi0, config.time.stop, config.dt, seed,
                            output_dt=config.time.step, snapshot_times=config.wigner_times,
                            scheme=config.jump_scheme)
    metadata = _metadata(config, cutoff, trajectory_seed=seed,
                         channel_codes={label.value: code for label, code in CHANNEL_CODES.items()})
    jumps = np.array([[jump.time, CHANNEL_CODES[jump.label], jump.parity_before, jump.parity_after]
                      for jump in record.jumps]).reshape(-1, 4)
    store.add(ResultTable.from_columns('trajectory', {
        't': ('1/eta', record.times),
        'photon_number': ('photons', record.photon_number),
        'parity': ('1', record.parity),
    }, metadata))
    store.add(ResultTable('jumps', ['t', 'channel', 'parity_before', 'parity_after'],
                          ['1/eta', 'code', '1', '1'], jumps, metadata))
    for t, state in sorted(record.snapshots.items()):
        grid = wigner_numeric(state, config.wigner_grid)
        store.add(_wigner_table(f'wigner_t{t:g}', grid, {**metadata, 'time': t}))
    return {'cutoff': cutoff, 'jumps': len(record.jumps), 'seed': seed}


def run_ensemble(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    params = config.params
    cutoff = resolve_cutoff(config)
    psi0 = _initial_state(config, cutoff)
    summary = ensemble(params, psi0, config.time.stop, config.dt, config.count, config.seed, workers,
                       output_dt=config.time.step, scheme=config.jump_scheme)
    columns = {
        't': ('1/eta', summary.times),
        'mean_photon_number': ('photons', summary.mean_photon_number),
        'stderr_photon_number': ('photons', summary.stderr_photon_number),
        'mean_parity': ('1', summary.mean_parity),
        'stderr_parity': ('1', summary.stderr_parity),
    }
    if config.reference:
        reference = evolve(params, psi0.to_density(), summary.times, config.rtol, config.atol, store_states=False)
        columns['master_photon_number'] = ('photons', reference.photon_number)
        columns['master_parity'] = ('1', reference.parity)
    store.add(ResultTable.from_columns('ensemble', columns, _metadata(config, cutoff, count=summary.count)))
    return {'cutoff': cutoff, 'count': summary.count}


def _feedback_point(task) -> tuple[list[float], WignerGrid, np.ndarray | None]:
    params, cutoff, series_tol, grid, rho0, times, tolerances = task
    rho, _ = steady_state(params, cutoff, series_tol)
    curve = None
    if times is not None:
        result = evolve(params, rho0, times, *tolerances, store_states=False)
        curve = np.column_stack([np.full(times.size, params.gamma_f), times, result.photon_number, result.parity])
    populations = rho.populations
    fit = _safe_fit(spectral_decompose(rho).eigenstates[0])
    cat_fidelity = np.nan
    if fit is not None:
        try:
            cat = cat_state(fit.alpha, params.stabilized_parity, cutoff)
            cat_fidelity = fidelity(cat.to_density(), rho)
        except DegenerateCatError as e:
            logger.warning(f"No cat reference at gamma_f={params.gamma_f}: {e}")
    wigner = wigner_numeric(rho, grid)
    row = [params.gamma_f, float(parity_diagonal(cutoff) @ populations), float(np.arange(cutoff) @ populations),
           wigner.min_value, cat_fidelity, np.nan if fit is None else abs(fit.alpha)]
    return row, wigner, curve


def run_feedback(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    """Steady parity, Wigner minimum and cat fidelity per gamma_f; with a time grid
    also the relaxation of <n> and <P> from the first initial state."""
    cutoff = resolve_cutoff(config)
    rates = sorted(set(config.gamma_f))
    times = config.time.points() if config.time is not None else None
    rho0 = _initial_state(config, cutoff).to_density() if times is not None else None
    tasks = [(config.params.model_copy(update={'gamma_f': rate}), cutoff, config.series_tol, config.wigner_grid,
              rho0, times, (config.rtol, config.atol)) for rate in rates]
    logger.info(f"Feedback scan over gamma_f = {rates} at cutoff {cutoff}")
    results = _parallel_map(_feedback_point, tasks, workers)
    metadata = _metadata(config, cutoff)
    store.add(ResultTable('feedback', ['gamma_f', 'parity', 'photon_number', 'wigner_min', 'cat_fidelity',
                                       'alpha_abs'],
                          ['eta', '1', 'photons', '1', '1', '1'], np.array([row for row, _, _ in results]), metadata))
    if times is not None:
        store.add(ResultTable('feedback_evolution', ['gamma_f', 't', 'photon_number', 'parity'],
                              ['eta', '1/eta', 'photons', '1'], np.vstack([curve for _, _, curve in results]),
                              metadata))
    for index, (row, grid, _) in enumerate(results):
        store.add(_wigner_table(f'wigner_gf{index}', grid, {**metadata, 'gamma_f': row[0]}))
    return {'cutoff': cutoff, 'parity': [row[1] for row, _, _ in results]}


def run_wigner(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    params = config.params
    grid_spec: GridSpec = config.wigner_grid
    if config.wigner_state == 'initial':
        cutoff = resolve_cutoff(config)
        grid = wigner_numeric(_initial_state(config, cutoff), grid_spec)
    elif config.wigner_method == 'analytic':
        cutoff = None
        grid = steady_wigner_grid(params, grid_spec, config.series_tol)
    else:
        cutoff = resolve_cutoff(config)
        grid = wigner_numeric(steady_state(params, cutoff, config.series_tol)[0], grid_spec)
    store.add(_wigner_table('wigner', grid, _metadata(config, cutoff, method=config.wigner_method)))
    return {'points': int(grid.values.size), 'min_value': grid.min_value, 'truncated': grid.any_truncated}


def _sweep_point(task) -> list[float]:
    params, cutoff, series_tol = task
    rho, _ = steady_state(params, cutoff, series_tol)
    cutoff = rho.cutoff
    report = spectral_decompose(rho)
    first, second = _fit_values(_safe_fit(report.eigenstates[0])), _fit_values(_safe_fit(report.eigenstates[1]))
    populations = rho.populations
    n_split = observable_split(report, number(cutoff))
    p_split = observable_split(report, parity(cutoff))
    return [params.detuning, params.kerr, params.pump.real, params.pump.imag, params.gamma, params.eta,
            params.gamma_f, cutoff, float(np.arange(cutoff) @ populations),
            float(parity_diagonal(cutoff) @ populations), n_split.first.real, n_split.second.real,
            p_split.first.real, p_split.second.real, report.probabilities[0], report.probabilities[1],
            report.residual, first['alpha_abs'], first['overlap'], second['overlap']]


SWEEP_COLUMNS = {
    'detuning': 'eta', 'kerr': 'eta', 'pump_re': 'eta', 'pump_im': 'eta', 'gamma': 'eta', 'eta': 'eta',
    'gamma_f': 'eta', 'cutoff': 'count', 'photon_number': 'photons', 'parity': '1',
    'n_first': 'photons', 'n_second': 'photons', 'parity_first': '1', 'parity_second': '1', 'p1': '1', 'p2': '1',
    'residual': '1', 'alpha_abs': '1', 'overlap_1': '1', 'overlap_2': '1',
}


def run_sweep(config: ExperimentConfig, store: ResultStore, workers: int) -> dict:
    axes = config.sweep.axes(config.params)
    names = list(axes)
    tasks = []
    for values in itertools.product(*axes.values()):
        params = config.params.model_copy(update=dict(zip(names, values)))
        tasks.append((params, None if config.cutoff == 'auto' else config.cutoff, config.series_tol))
    logger.info(f"Sweep over {len(tasks)} parameter points with {workers} worker(s)")
    rows = _parallel_map(_sweep_point, tasks, workers)
    store.add(ResultTable('sweep', list(SWEEP_COLUMNS), list(SWEEP_COLUMNS.values()), np.array(rows),
                          _metadata(config, None, axes={name: [str(v) for v in axes[name]] for name in names})))
    residuals = np.array(rows)[:, list(SWEEP_COLUMNS).index('residual')]
    return {'points': len(rows), 'max_residual': float(np.max(residuals))}
