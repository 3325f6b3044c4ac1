import numpy as np
import pytest
from numpy.testing import assert_allclose

from kerrcat.analysis import observable_split, spectral_decompose
from kerrcat.exceptions import InvalidStateError
from kerrcat.fock import DensityMatrix, cat_state, fock_mixture, number, parity


def test_mixture_is_sorted_by_probability():
    report = spectral_decompose(fock_mixture([0.25, 0.75], 4))
    assert_allclose(report.probabilities[:2], [0.75, 0.25])
    assert abs(report.eigenstates[0].amplitudes[1]) == pytest.approx(1.0)
    assert_allclose(report.parities[:2], [-1.0, 1.0])
    assert_allclose(report.photon_numbers[:2], [1.0, 0.0], atol=1e-12)
    assert report.residual == pytest.approx(0.0, abs=1e-12)


def test_ties_put_even_parity_first():
    report = spectral_decompose(fock_mixture([0.5, 0.5], 3))
    assert report.parities[0] == pytest.approx(1.0)
    assert abs(report.eigenstates[0].amplitudes[0]) == pytest.approx(1.0)


def test_eigenvector_phase_is_fixed():
    state = cat_state(1.0 + 1.0j, '+', 20)
    report = spectral_decompose(state.to_density())
    leading = report.eigenstates[0].amplitudes
    pivot = leading[np.argmax(np.abs(leading))]
    assert pivot.imag == pytest.approx(0.0, abs=1e-12)
    assert pivot.real > 0
    assert abs(state.overlap(report.eigenstates[0])) == pytest.approx(1.0)


def test_reconstruct():
    rho = 0.6 * cat_state(1.2, '+', 15).to_density().matrix + 0.4 * cat_state(1.2, '-', 15).to_density().matrix
    report = spectral_decompose(DensityMatrix(rho))
    assert_allclose(report.reconstruct().matrix, rho, atol=1e-12)
    assert report.summary()['parity'] == pytest.approx([1.0, -1.0])


def test_observable_split():
    report = spectral_decompose(fock_mixture([0.25, 0.75], 4))
    split = observable_split(report, number(4))
    assert split.total == pytest.approx(0.75)
    assert split.first == pytest.approx(1.0)
    assert split.second == pytest.approx(0.0, abs=1e-12)
    assert split.bound == pytest.approx(0.0, abs=1e-11)
    assert observable_split(report, parity(4)).total == pytest.approx(-0.5)


def test_rejects_non_hermitian():
    with pytest.raises(InvalidStateError):
        spectral_decompose(DensityMatrix([[0.5, 0.1], [0.0, 0.5]]))
