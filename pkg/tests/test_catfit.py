import numpy as np
import pytest

from kerrcat.analysis import fit_cat
from kerrcat.analysis.catfit import cat_overlaps
from kerrcat.exceptions import AmbiguousParityError
from kerrcat.fock import Parity, StateVector, cat_state, vacuum


@pytest.mark.parametrize('alpha,sign', [(1.5 + 0.5j, '-'), (2.0, '+'), (0.8j, '+')])
def test_recovers_cat(alpha, sign):
    fit = fit_cat(cat_state(alpha, sign, 40))
    assert fit.parity is Parity.from_sign(sign)
    assert fit.overlap == pytest.approx(1.0, abs=1e-9)
    assert fit.alpha == pytest.approx(alpha, abs=1e-4)
    assert 0 <= np.angle(fit.alpha) < np.pi


def test_alpha_sign_is_folded():
    fit = fit_cat(cat_state(-2.0 - 0.5j, '+', 40))
    assert fit.alpha == pytest.approx(2.0 + 0.5j, abs=1e-4)


def test_vacuum_fits_zero_amplitude():
    fit = fit_cat(vacuum(10))
    assert fit.alpha == 0
    assert fit.overlap == pytest.approx(1.0)
    assert fit.to_dict()['parity'] == 1


def test_equal_parity_mix_is_ambiguous():
    with pytest.raises(AmbiguousParityError):
        fit_cat(StateVector(np.array([1.0, 1.0, 0.0]) / np.sqrt(2)))


def test_overlaps_match_direct_inner_products():
    psi = cat_state(1.0 - 1.0j, '-', 30)
    alphas = np.array([0.5, 1.0 - 1.0j, 2.0j])
    expected = [abs(cat_state(a, '-', 30).overlap(psi)) for a in alphas]
    assert cat_overlaps(np.asarray(psi.amplitudes), Parity.odd, alphas) == pytest.approx(expected, abs=1e-12)
