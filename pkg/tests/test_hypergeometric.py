import numpy as np
import pytest
from numpy.testing import assert_allclose

from kerrcat.exceptions import DegenerateParameterError, InvalidArgumentError
from kerrcat.fock import SystemParams
from kerrcat.steady import ReducedParams, f_coefficients, hyp2f1_neg_int, reduced_params

C_CAT = -0.025 + 0.025j


def test_reduced_params_examples(cat_params):
    rp = reduced_params(cat_params)
    assert rp.c == pytest.approx(C_CAT)
    assert rp.g == pytest.approx(5 + 5j)
    assert reduced_params(cat_params.model_copy(update={'pump': 0j})).g == 0


def test_reduced_params_zero_denominator():
    with pytest.raises(InvalidArgumentError):
        reduced_params(SystemParams(gamma=1.0))


@pytest.mark.parametrize('c', [C_CAT, 0.3 - 1.1j, -2.4 + 0.01j])
def test_hyp2f1_low_orders(c):
    assert hyp2f1_neg_int(0, c) == 1
    assert abs(hyp2f1_neg_int(1, c)) < 1e-14
    assert hyp2f1_neg_int(2, c) == pytest.approx(1 / (1 - 2 * c), rel=1e-12)


def test_hyp2f1_pole_guard_names_index():
    with pytest.raises(DegenerateParameterError) as error:
        hyp2f1_neg_int(5, 1.5)
    assert error.value.k == 3


def test_hyp2f1_rejects_negative_order():
    with pytest.raises(InvalidArgumentError):
        hyp2f1_neg_int(-1, C_CAT)


@pytest.mark.parametrize('c, g', [(C_CAT, 5 + 5j), (0.2 + 0.4j, -1.5 + 0.3j), (-0.1 + 2.0j, 0.7j)])
def test_table_matches_direct_sum(c, g):
    table = f_coefficients(ReducedParams(c=c, g=g), 12)
    expected = [(1j * np.sqrt(g)) ** ell * hyp2f1_neg_int(ell, c) for ell in range(13)]
    assert_allclose(table.values, expected, rtol=1e-9, atol=1e-9 * np.max(np.abs(expected)))


def test_table_structure():
    table = f_coefficients(ReducedParams(c=C_CAT, g=5 + 5j), 9)
    assert table.max_index == 9
    assert table[0] == 1
    assert np.all(table.values[1::2] == 0)
    with pytest.raises(ValueError):
        table.log_magnitude[0] = 1.0


def test_zero_pump_table():
    table = f_coefficients(ReducedParams(c=C_CAT, g=0j), 10)
    assert table[0] == 1
    assert np.all(table.values[1:] == 0)


def test_table_stays_finite_at_high_order():
    table = f_coefficients(ReducedParams(c=C_CAT, g=5 + 5j), 600)
    assert np.all(np.isfinite(table.log_magnitude[::2]))
    assert np.all(np.isneginf(table.log_magnitude[1::2]))


def test_table_pole_guard():
    with pytest.raises(DegenerateParameterError) as error:
        f_coefficients(ReducedParams(c=2.5, g=1.0), 20)
    assert error.value.k == 5


def test_reduced_params_must_be_finite():
    with pytest.raises(InvalidArgumentError):
        ReducedParams(c=complex(np.inf, 0), g=0j)
