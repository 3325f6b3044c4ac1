"""End-to-end physics checks at the cat, metastable and feedback operating points."""
import itertools

import numpy as np
import pytest

from kerrcat.analysis import GridSpec, fit_cat, observable_split, spectral_decompose, wigner_numeric
from kerrcat.dynamics import evolve, fidelity, steady_state_numeric
from kerrcat.fock import SystemParams, cat_state, coherent_state, parity, vacuum
from kerrcat.steady import steady_density_matrix, steady_moment, steady_wigner_grid
from kerrcat.trajectories import ensemble

pytestmark = pytest.mark.slow

GRID = list(itertools.product([-0.2, -0.1, 0.0, 0.1, 0.2], [0.0, 3.75, 7.5, 11.25, 15.0],
                              [0.1, 1.0, 5.0], [1.0, 5.0, 10.0]))


def random_points(count: int, seed: int) -> list[SystemParams]:
    rng = np.random.default_rng(seed)
    return [SystemParams(detuning=rng.uniform(-0.2, 0.2), kerr=rng.uniform(1, 10),
                         pump=rng.uniform(0, 15) * np.exp(1j * rng.uniform(0, 2 * np.pi)),
                         gamma=rng.uniform(0.05, 5), eta=1.0) for _ in range(count)]


def test_closed_form_matches_liouvillian_null_vector(cat_params):
    exact = steady_density_matrix(cat_params, 50).density_matrix
    assert fidelity(exact, steady_state_numeric(cat_params, 50)) >= 1 - 1e-8


def test_two_eigenstates_carry_the_state_and_are_cats():
    for detuning, pump, gamma, kerr in GRID:
        params = SystemParams(detuning=detuning, kerr=kerr, pump=pump, gamma=gamma, eta=1.0)
        report = spectral_decompose(steady_density_matrix(params).density_matrix)
        assert report.residual < 1e-2, params
        assert fit_cat(report.eigenstates[0]).overlap >= 0.98, params
        if report.probabilities[1] > 1e-10:
            assert fit_cat(report.eigenstates[1]).overlap >= 0.98, params


def test_cat_operating_point(cat_params):
    report = spectral_decompose(steady_density_matrix(cat_params).density_matrix)
    fit = fit_cat(report.eigenstates[0])
    assert 1 - fit.overlap <= 1e-5
    assert abs(fit.alpha) == pytest.approx(2.7, rel=0.05)
    split = observable_split(report, parity(report.cutoff))
    assert split.first.real == pytest.approx(1.0, abs=1e-6)
    assert split.second.real == pytest.approx(-1.0, abs=1e-6)
    assert np.allclose(report.reconstruct().matrix, steady_density_matrix(cat_params).density_matrix.matrix,
                       atol=1e-8)


def test_checkerboard_and_moments_at_random_points():
    for params in random_points(10, seed=17):
        base = steady_density_matrix(params)
        rho = np.asarray(steady_density_matrix(params, base.cutoff + 30).density_matrix.matrix)
        n = np.arange(rho.shape[0])
        odd = (n[:, None] + n[None, :]) % 2 == 1
        assert np.max(np.abs(rho[odd])) < 1e-12
        populations = rho.diagonal().real
        assert steady_moment(params, 1, 1).real == pytest.approx(n @ populations, rel=1e-10)
        assert steady_moment(params, 2, 2).real == pytest.approx((n * (n - 1)) @ populations, rel=1e-10)


def test_wigner_positivity_and_interference(cat_params):
    assert steady_wigner_grid(cat_params).min_value >= 0
    spec = GridSpec.square(3.0, 0.25)
    rho = steady_density_matrix(cat_params, 80).density_matrix
    np.testing.assert_allclose(wigner_numeric(rho, spec).values, steady_wigner_grid(cat_params, spec).values,
                               atol=1e-6)
    leading = spectral_decompose(rho).eigenstates[0]
    assert wigner_numeric(leading, spec).min_value < 0


def test_relaxation_is_unique(cat_params):
    target = steady_density_matrix(cat_params, 40).density_matrix
    alpha = fit_cat(spectral_decompose(target).eigenstates[0]).alpha
    times = np.linspace(0.0, 40.0, 9)
    for psi0 in (vacuum(40), cat_state(alpha, '+', 40), cat_state(alpha, '-', 40)):
        result = evolve(cat_params, psi0.to_density(), times, target=target, store_states=False)
        assert result.fidelity[-1] >= 1 - 1e-6


def test_ensemble_reproduces_master_equation(cat_params):
    psi0 = vacuum(40)
    summary = ensemble(cat_params, psi0, 3.0, 2e-4, 100, master_seed=2024, output_dt=0.1)
    master = evolve(cat_params, psi0.to_density(), summary.times, store_states=False)
    assert np.all(np.abs(summary.mean_photon_number - master.photon_number) <= 3 * summary.stderr_photon_number)
    # each trajectory has parity exactly +1 or -1, so its standard error follows from the mean
    parity_stderr = np.sqrt(np.clip(1 - master.parity ** 2, 0, None) / summary.count)
    sums = summary.mean_parity * summary.count
    np.testing.assert_allclose(sums, np.round(sums), atol=1e-6)
    assert np.all(np.abs(summary.mean_parity - master.parity) <= 3 * parity_stderr)


def test_metastable_coherent_state(metastable_params):
    cutoff, horizon = 40, 100.0
    target = steady_density_matrix(metastable_params, cutoff).density_matrix
    alpha = fit_cat(spectral_decompose(target).eigenstates[0]).alpha
    times = np.linspace(0.0, horizon, 1001)
    from_vacuum = evolve(metastable_params, vacuum(cutoff).to_density(), times, target=target,
                         store_states=False).first_time_at_least(0.999)
    from_coherent = evolve(metastable_params, coherent_state(alpha, cutoff).to_density(), times, target=target,
                           store_states=False).first_time_at_least(0.999)
    assert from_vacuum is not None
    assert (from_coherent if from_coherent is not None else horizon) >= 10 * from_vacuum


def test_feedback_protects_even_cat(cat_params):
    cutoff = 40
    spec = GridSpec.square(3.5, 0.1)
    parities, minima, states = [], [], []
    for rate in (0.1, 1.0, 10.0):
        rho = steady_state_numeric(cat_params.model_copy(update={'gamma_f': rate}), cutoff)
        parities.append(float(np.real(np.trace(np.asarray(rho.matrix) @ parity(cutoff).matrix))))
        minima.append(wigner_numeric(rho, spec).min_value)
        states.append(rho)
    assert parities[0] < parities[1] < parities[2]
    assert max(minima) < 0
    alpha = fit_cat(spectral_decompose(states[-1]).eigenstates[0]).alpha
    assert fidelity(cat_state(alpha, '+', cutoff).to_density(), states[-1]) > 0.9
