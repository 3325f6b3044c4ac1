import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.special import factorial

from kerrcat.exceptions import CutoffTooSmallError, InvalidArgumentError, UnsupportedParameterError
from kerrcat.fock import SystemParams, number
from kerrcat.fock.operators import expectation
from kerrcat.steady import (
    FSeries, hyp2f1_neg_int, reduced_params, steady_density_matrix, steady_moment, steady_wigner,
)


def test_zero_pump_gives_vacuum(vacuum_params):
    result = steady_density_matrix(vacuum_params, 30)
    expected = np.zeros((30, 30))
    expected[0, 0] = 1.0
    assert_allclose(result.density_matrix.matrix, expected, atol=1e-15)
    assert steady_moment(vacuum_params, 1, 1) == 0
    assert steady_wigner(vacuum_params, 0) == pytest.approx(2 / np.pi)


@pytest.mark.parametrize('update', [{'gamma_f': 0.5}, {'one_photon_drive': 0.2}, {'gamma': 0.0, 'eta': 0.0}])
def test_unsupported_parameters(cat_params, update):
    params = cat_params.model_copy(update=update)
    with pytest.raises(UnsupportedParameterError):
        steady_density_matrix(params, 40)
    with pytest.raises(UnsupportedParameterError):
        steady_moment(params, 1, 1)
    with pytest.raises(UnsupportedParameterError):
        steady_wigner(params, 0.5)


def test_explicit_cutoff_fails_fast(cat_params):
    with pytest.raises(CutoffTooSmallError) as error:
        steady_density_matrix(cat_params, 12)
    assert error.value.required_cutoff > 12
    assert error.value.tail_mass > 1e-10


def test_auto_cutoff(cat_params):
    result = steady_density_matrix(cat_params)
    assert result.cutoff >= 40
    assert result.tail_mass <= 1e-10
    assert result.series_terms > 0
    assert result.diagnostics()['cutoff'] == result.cutoff


def test_density_matrix_is_valid_state(cat_params):
    rho = steady_density_matrix(cat_params).density_matrix
    assert rho.hermiticity_error() < 1e-14
    assert rho.trace.real == pytest.approx(1.0, abs=1e-12)
    assert rho.eigenvalues().min() > -1e-12


@pytest.mark.parametrize('update', [{}, {'detuning': 0.15, 'pump': 6 - 2j}, {'kerr': 5.0, 'gamma': 2.0}])
def test_no_even_odd_coherences(cat_params, update):
    rho = steady_density_matrix(cat_params.model_copy(update=update)).density_matrix.matrix
    n = np.arange(rho.shape[0])
    odd = (n[:, None] + n[None, :]) % 2 == 1
    assert np.max(np.abs(rho[odd])) < 1e-12


def test_moments_match_density_matrix(cat_params):
    result = steady_density_matrix(cat_params, 80)
    rho = result.density_matrix
    series = FSeries(reduced_params(cat_params))
    assert steady_moment(cat_params, 0, 0, series=series) == pytest.approx(1.0, rel=1e-12)
    mean_n = expectation(rho, number(80))
    assert steady_moment(cat_params, 1, 1, series=series) == pytest.approx(mean_n, rel=1e-10)
    n = np.arange(80)
    second = np.sum(n * (n - 1) * rho.populations)
    assert steady_moment(cat_params, 2, 2, series=series).real == pytest.approx(second, rel=1e-10)
    assert steady_moment(cat_params, 1, 2, series=series) == 0


def test_order_parameter_matches_trace(cat_params):
    rho = steady_density_matrix(cat_params, 80).density_matrix.matrix
    a = np.diag(np.sqrt(np.arange(1, 80)), 1)
    assert steady_moment(cat_params, 0, 2) == pytest.approx(np.trace(rho @ a @ a), rel=1e-9)


def test_photon_number_grows_with_pump(cat_params):
    values = [steady_moment(cat_params.model_copy(update={'pump': g}), 1, 1).real for g in (2.0, 6.0, 10.0)]
    assert values[0] < values[1] < values[2]


def test_wigner_never_negative(cat_params):
    for beta in (0, 1.5 - 2j, -2.7j, 4.5 + 0.5j):
        assert steady_wigner(cat_params, beta) >= 0


def test_series_tolerance_validated(cat_params):
    with pytest.raises(ValueError):
        FSeries(reduced_params(cat_params), series_tol=2.0)


def test_complex_pump_rotates_state():
    base = SystemParams(kerr=1.0, pump=4.0, gamma=0.2, eta=1.0)
    rotated = base.model_copy(update={'pump': 4.0j})
    a2_base = steady_moment(base, 0, 2)
    a2_rotated = steady_moment(rotated, 0, 2)
    assert abs(a2_rotated) == pytest.approx(abs(a2_base), rel=1e-10)
    assert a2_rotated == pytest.approx(1j * a2_base, rel=1e-10)


def density_from_root(params: SystemParams, root: complex, cutoff: int, terms: int) -> np.ndarray:
    """rho from B_nl = F(n + l)/sqrt(n! l!) with F(l) = (i root)^l 2F1(-l, -c; -2c; 2) summed directly."""
    c = reduced_params(params).c
    f = np.array([(1j * root) ** ell * hyp2f1_neg_int(ell, c) for ell in range(cutoff + terms)])
    n, ell = np.arange(cutoff), np.arange(terms)
    b = f[n[:, None] + ell[None, :]] / np.sqrt(factorial(n)[:, None] * factorial(ell)[None, :])
    rho = b @ b.conj().T
    return rho / np.trace(rho).real


def test_density_matrix_does_not_depend_on_root_of_g():
    # small |g| keeps the direct 2F1 sums accurate over all orders used
    params = SystemParams(detuning=0.1, kerr=1.0, pump=0.2 + 0.1j, gamma=0.5, eta=1.0)
    root = np.sqrt(complex(reduced_params(params).g))
    plus = density_from_root(params, root, 16, 24)
    minus = density_from_root(params, -root, 16, 24)
    assert_allclose(minus, plus, atol=1e-12)
    assert_allclose(minus, steady_density_matrix(params, 16).density_matrix.matrix, atol=1e-12)


def test_explicit_zero_series_tolerance_is_rejected(cat_params):
    with pytest.raises(InvalidArgumentError):
        FSeries(reduced_params(cat_params), series_tol=0.0)
