import pytest

from DiagCountSDK.DiagCountRing import Modulus


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: brute-force runs over the larger groups (deselect with -m 'not slow')")


@pytest.fixture
def z4():
    return Modulus.prime_power(2, 2)


@pytest.fixture
def z6():
    return Modulus.general(6)


@pytest.fixture
def z27():
    return Modulus.prime_power(3, 3)
