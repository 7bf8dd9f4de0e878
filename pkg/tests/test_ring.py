import pytest
from hypothesis import given
from hypothesis.strategies import integers, sampled_from

from DiagCountSDK.DiagCountErrors import (
    InvalidModulusError,
    NegativeCountError,
    NotInvertibleError,
    UnsupportedOperationError,
)
from DiagCountSDK.DiagCountRing import INFINITY, Modulus, inv, phi_i, phi_pow, units, val_int, val_p


def test_prime_power_constructor():
    modulus = Modulus.prime_power(2, 3)
    assert (modulus.m, modulus.p, modulus.k) == (8, 2, 3)
    assert modulus.is_prime_power


@pytest.mark.parametrize("m, p, k", [(27, 3, 3), (7, 7, 1), (8, 2, 3), (9, 3, 2), (1024, 2, 10)])
def test_parse_detects_prime_powers(m, p, k):
    modulus = Modulus.parse(m)
    assert (modulus.p, modulus.k) == (p, k)


@pytest.mark.parametrize("m", [4, 7, 27, 1024])
def test_parsed_modulus_feeds_prime_power(m):
    modulus = Modulus.parse(m)
    assert type(modulus.p) is int and type(modulus.k) is int and type(modulus.m) is int
    assert Modulus.prime_power(modulus.p, modulus.k) == modulus


@pytest.mark.parametrize("m", [6, 12, 36, 100])
def test_parse_keeps_composites_general(m):
    modulus = Modulus.parse(m)
    assert not modulus.is_prime_power
    assert modulus.p is None


@pytest.mark.parametrize("p, k", [(4, 1), (6, 2), (1, 1), (2, 0)])
def test_invalid_prime_power(p, k):
    with pytest.raises(InvalidModulusError):
        Modulus.prime_power(p, k)


def test_invalid_modulus_is_a_value_error():
    with pytest.raises(ValueError):
        Modulus.parse(1)


@pytest.mark.parametrize("x, m, expected", [(18, 27, 2), (4, 8, 2), (1, 8, 0), (9, 27, 2)])
def test_val_p(x, m, expected):
    assert val_p(Modulus.parse(m)(x)) == expected


def test_val_p_of_zero_is_infinity():
    weight = val_p(Modulus.parse(8)(0))
    assert weight is INFINITY
    assert weight > 10 ** 9
    assert weight != 3


def test_val_p_rejects_composite(z6):
    with pytest.raises(UnsupportedOperationError):
        val_p(z6(2))


@pytest.mark.parametrize("x, m, expected", [(3, 8, 3), (1, 8, 1), (1, 6, 1), (5, 27, 11)])
def test_inv(x, m, expected):
    assert inv(Modulus.parse(m)(x)).value == expected


def test_inv_of_non_unit_carries_valuation(z27):
    with pytest.raises(NotInvertibleError) as info:
        inv(z27(9))
    assert info.value.valuation == 2


@given(sampled_from([2, 3, 5, 7]), integers(min_value=1, max_value=4), integers())
def test_inverse_round_trip(p, k, x):
    modulus = Modulus.prime_power(p, k)
    residue = modulus(x)
    if residue.value % p:
        assert (residue * inv(residue)).value == 1
    else:
        with pytest.raises(NotInvertibleError):
            inv(residue)


@given(sampled_from([2, 3, 5]), integers(min_value=1, max_value=5), integers(min_value=1, max_value=10 ** 6))
def test_val_int_divides_exactly(p, k, x):
    v = val_int(x, p)
    assert x % p ** v == 0
    assert x % p ** (v + 1) != 0


@pytest.mark.parametrize("p, l, expected", [(2, 3, 4), (3, 2, 6), (5, 0, 1), (3, 3, 18)])
def test_phi_pow(p, l, expected):
    assert phi_pow(p, l) == expected


@pytest.mark.parametrize("p, j, i, expected", [(3, 3, 2, 9), (2, 2, 2, 0), (3, 3, 1, 18), (5, 1, 5, 0)])
def test_phi_i(p, j, i, expected):
    assert phi_i(p, j, i) == expected


def test_phi_i_beyond_p_is_an_error():
    with pytest.raises(NegativeCountError):
        phi_i(2, 3, 3)


def test_units(z4):
    assert units(z4) == [1, 3]
    assert units(Modulus.general(6)) == [1, 5]
