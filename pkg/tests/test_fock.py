import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from kerrcat.exceptions import CutoffTooSmallError, DegenerateCatError, InvalidArgumentError
from kerrcat.fock import (
    DensityMatrix, Parity, StateVector, SystemParams, annihilation, cat_state, coherent_state, creation,
    displacement, expectation, fock_mixture, fock_state, hamiltonian, identity, number, parity, parity_projector,
    suggest_cutoff, vacuum,
)
from kerrcat.fock.states import required_cutoff
from kerrcat.fock.utils import estimate_memory_bytes, log_factorials


def test_annihilation_small_cutoffs():
    assert_allclose(annihilation(2).matrix, [[0, 1], [0, 0]])
    assert annihilation(3).matrix[1, 2] == pytest.approx(np.sqrt(2))


def test_number_is_creation_times_annihilation():
    product = creation(7) @ annihilation(7)
    assert_allclose(product.matrix, np.diag(np.arange(7)), atol=1e-14)
    assert_allclose(number(7).matrix, product.matrix, atol=1e-14)


@pytest.mark.parametrize('cutoff', [0, 1, 2.5])
def test_invalid_cutoff(cutoff):
    with pytest.raises(InvalidArgumentError):
        annihilation(cutoff)


def test_operator_matrices_are_read_only():
    op = annihilation(4)
    with pytest.raises(ValueError):
        op.matrix[0, 1] = 5


def test_parity_and_projectors():
    assert_allclose(parity(4).matrix.diagonal(), [1, -1, 1, -1])
    even, odd = parity_projector(1, 6), parity_projector(-1, 6)
    assert_allclose((even.matrix + odd.matrix), identity(6).matrix)
    assert_allclose(even.matrix @ odd.matrix, np.zeros((6, 6)))


def test_coherent_state_zero_is_vacuum():
    assert_allclose(coherent_state(0, 10).amplitudes, vacuum(10).amplitudes)


@pytest.mark.parametrize('alpha, cutoff, expected', [
    (2.0, 40, 4.0),
    (2.7 * np.exp(2.0j), 60, 7.29),
])
def test_coherent_photon_number(alpha, cutoff, expected):
    state = coherent_state(alpha, cutoff)
    assert expectation(state, number(cutoff)).real == pytest.approx(expected, abs=1e-8)
    assert state.norm == pytest.approx(1.0, abs=1e-14)


def test_coherent_state_needs_room():
    with pytest.raises(CutoffTooSmallError) as error:
        coherent_state(5.0, 20)
    assert error.value.required_cutoff > 20
    assert error.value.exit_code == 4
    assert str(error.value.required_cutoff) in error.value.detail


def test_required_cutoff_grows_with_amplitude():
    assert required_cutoff(0) == 1
    assert required_cutoff(1.0) < required_cutoff(3.0)
    coherent_state(3.0, required_cutoff(3.0))


def test_cat_state_limits():
    assert_allclose(cat_state(0, '+', 10).amplitudes, vacuum(10).amplitudes)
    with pytest.raises(DegenerateCatError):
        cat_state(0, '-', 10)


@pytest.mark.parametrize('alpha', [0.05, 1.3, 2.0 - 1.0j])
def test_odd_cat_has_only_odd_components(alpha):
    state = cat_state(alpha, Parity.odd, 40)
    assert np.all(state.amplitudes[::2] == 0)
    assert expectation(state, number(40)).real >= 1.0 - 1e-12
    assert expectation(state, parity(40)).real == pytest.approx(-1.0, abs=1e-12)


def test_even_cat_parity():
    state = cat_state(2.0, '+', 40)
    assert expectation(state, parity(40)).real == pytest.approx(1.0, abs=1e-12)


def test_hamiltonian_pump_element():
    params = SystemParams(pump=10.0, kerr=1.0, eta=1.0)
    h = hamiltonian(params, 10)
    assert h.matrix[2, 0] == pytest.approx(5 * np.sqrt(2))
    assert h.hermiticity_error() == 0.0


def test_hamiltonian_diagonal():
    params = SystemParams(detuning=0.3, kerr=2.0)
    n = np.arange(6)
    assert_allclose(hamiltonian(params, 6).matrix.diagonal().real, -0.3 * n + n * (n - 1))


def test_hamiltonian_one_photon_drive():
    params = SystemParams(one_photon_drive=0.5 + 0.5j)
    h = hamiltonian(params, 5).matrix
    assert h[1, 0] == pytest.approx(0.5 + 0.5j)
    assert h[0, 1] == pytest.approx(0.5 - 0.5j)


def test_displacement_identity_and_unitarity():
    assert_allclose(displacement(0, 12).matrix, np.eye(12), atol=1e-12)
    d = displacement(0.8 + 0.3j, 40)
    assert_allclose(d.matrix @ d.matrix.conj().T, np.eye(40), atol=1e-8)
    assert not d.truncation_warning


def test_displacement_of_vacuum_is_coherent():
    beta = 0.8 + 0.3j
    shifted = displacement(beta, 40) @ vacuum(40)
    assert_allclose(shifted.amplitudes, coherent_state(beta, 40).amplitudes, atol=1e-8)


def test_displacement_truncation_flag():
    assert displacement(3.0, 20).truncation_warning


def test_expectation_of_mixture_and_mismatch():
    rho = fock_mixture([0.5, 0.5], 6)
    assert expectation(rho, parity(6)) == pytest.approx(0.0)
    assert expectation(vacuum(6), number(6)) == 0
    assert expectation(cat_state(1.5, '-', 30), parity(30)).real == pytest.approx(-1.0)
    with pytest.raises(InvalidArgumentError):
        expectation(vacuum(5), number(6))


def test_state_containers():
    state = StateVector([3, 4j])
    assert state.norm == pytest.approx(5.0)
    assert state.normalized().overlap(state.normalized()) == pytest.approx(1.0)
    rho = fock_state(1, 3).to_density()
    assert isinstance(rho, DensityMatrix)
    assert rho.trace == pytest.approx(1.0)
    assert_allclose(rho.populations, [0, 1, 0])
    with pytest.raises(InvalidArgumentError):
        StateVector(np.zeros(3)).normalized()
    with pytest.raises(InvalidArgumentError):
        DensityMatrix(np.zeros((2, 3)))


def test_system_params_parsing():
    params = SystemParams(pump='3,4', one_photon_drive=[1, 2], stabilized_parity='odd')
    assert params.pump == 3 + 4j
    assert params.one_photon_drive == 1 + 2j
    assert params.stabilized_parity is Parity.odd
    assert SystemParams(pump='1+2j').pump == 1 + 2j
    assert params.to_dict()['pump'] == [3.0, 4.0]


@pytest.mark.parametrize('bad', [{'gamma': -0.1}, {'eta': -1}, {'gamma_f': -2}, {'unknown': 1}])
def test_system_params_rejects(bad):
    with pytest.raises(ValidationError):
        SystemParams(**bad)


def test_parity_helpers():
    assert Parity.from_sign(-1) is Parity.odd
    assert Parity.from_sign('plus') is Parity.even
    assert Parity.even.flipped() is Parity.odd
    with pytest.raises(ValueError):
        Parity.from_sign('sideways')


def test_cutoff_heuristic():
    assert suggest_cutoff(10.0, 1.0, 1.0) >= 40
    assert suggest_cutoff(10.0, 1.0, 1.0) % 2 == 0
    assert suggest_cutoff(0.0, 1.0, 1.0) == 30
    with pytest.raises(InvalidArgumentError):
        suggest_cutoff(1.0, 0.0, 0.0)
    assert estimate_memory_bytes(10) == 160000


def test_log_factorials_past_overflow():
    values = log_factorials(300)
    assert values[0] == 0.0
    assert values[5] == pytest.approx(np.log(120))
    assert np.all(np.isfinite(values))
