import pytest

from kerrcat.fock import SystemParams


@pytest.fixture
def cat_params() -> SystemParams:
    """Delta = 0, U = eta, G = 10 eta, gamma = 0.1 eta: a well-resolved cat pair."""
    return SystemParams(detuning=0.0, kerr=1.0, pump=10.0, gamma=0.1, eta=1.0)


@pytest.fixture
def metastable_params() -> SystemParams:
    return SystemParams(detuning=0.0, kerr=1.0, pump=10.0, gamma=1.0, eta=1.0)


@pytest.fixture
def small_params() -> SystemParams:
    """Moderate pump where cutoff 30 is ample and integrations are quick."""
    return SystemParams(detuning=0.1, kerr=1.0, pump=2.0, gamma=0.5, eta=1.0)


@pytest.fixture
def vacuum_params() -> SystemParams:
    return SystemParams(kerr=1.0, pump=0.0, gamma=1.0, eta=1.0)


def pytest_addoption(parser):
    parser.addoption('--regen-golden', action='store_true', default=False,
                     help="Rewrite the golden tables in tests/data/golden from fresh runs")


@pytest.fixture
def regen_golden(request) -> bool:
    return request.config.getoption('--regen-golden')
