import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers, lists, sampled_from

from DiagCountSDK.DiagCountErrors import BudgetExceededError, DimensionMismatchError, NotInvertibleError
from DiagCountSDK.DiagCountMatrix import (
    DiagonalSpec,
    RingMatrix,
    adjugate,
    all_diagonal_specs,
    all_matrices_array,
    batch_conjugate,
    batch_det,
    batch_inverse,
    conjugate,
    decode_keys,
    det,
    encode_keys,
    enumerate_gl,
    from_array,
    gl_array,
    gl_generators,
    inverse,
    is_invertible,
    jordan_block,
    mat_mul,
    to_array,
)
from DiagCountSDK.DiagCountRing import Modulus


def rows(modulus, data):
    return RingMatrix.from_rows(modulus, data)


# ----------------------- scalar operations -----------------------

def test_identity_is_neutral(z4):
    a = rows(z4, [[1, 2], [3, 0]])
    assert mat_mul(RingMatrix.identity(2, z4), a) == a
    assert a @ RingMatrix.identity(2, z4) == a


def test_mat_mul_over_z6(z6):
    product = mat_mul(rows(z6, [[1, 3], [2, 1]]), RingMatrix.diagonal(z6, [2, 3]))
    assert product == rows(z6, [[2, 3], [4, 3]])
    assert mat_mul(rows(z6, [[2, 3], [4, 3]]), RingMatrix.identity(2, z6)) == rows(z6, [[2, 3], [4, 3]])


def test_mat_mul_rejects_mismatch(z4, z6):
    with pytest.raises(DimensionMismatchError):
        mat_mul(RingMatrix.identity(2, z4), RingMatrix.identity(3, z4))
    with pytest.raises(DimensionMismatchError):
        mat_mul(RingMatrix.identity(2, z4), RingMatrix.identity(2, z6))


@pytest.mark.parametrize("data, m, expected", [
    ([[1, 0], [0, 1]], 4, 1),
    ([[2, 1], [0, 2]], 4, 0),
    ([[1, 3], [2, 1]], 6, 1),
    ([[1, 2, 3], [0, 1, 4], [5, 6, 0]], 7, 1),
])
def test_det(data, m, expected):
    assert det(rows(Modulus.parse(m), data)).value == expected


@pytest.mark.parametrize("data, expected", [([[1, 1], [1, 1]], False), ([[1, 0], [2, 1]], True), ([[2, 1], [1, 1]], True)])
def test_is_invertible(z4, data, expected):
    assert is_invertible(rows(z4, data)) is expected


def test_inverse_examples(z4, z6):
    assert inverse(rows(z4, [[1, 0], [2, 1]])) == rows(z4, [[1, 0], [2, 1]])
    assert inverse(rows(z6, [[1, 3], [2, 1]])) == rows(z6, [[1, 3], [4, 1]])
    assert inverse(RingMatrix.identity(3, z4)) == RingMatrix.identity(3, z4)


def test_inverse_of_singular_matrix(z4):
    with pytest.raises(NotInvertibleError):
        inverse(rows(z4, [[2, 0], [0, 1]]))


def test_adjugate_times_matrix_is_det(z4):
    a = rows(z4, [[2, 1], [3, 3]])
    d = det(a).value
    assert mat_mul(adjugate(a), a) == RingMatrix.diagonal(z4, [d, d])


def test_conjugate_examples(z4):
    p = rows(z4, [[1, 0], [2, 1]])
    a = rows(z4, [[3, 1], [2, 0]])
    assert conjugate(RingMatrix.identity(2, z4), a) == a
    assert conjugate(p, RingMatrix.diagonal(z4, [2, 1])) == rows(z4, [[2, 0], [2, 1]])
    assert conjugate(p, jordan_block(2, z4)) == rows(z4, [[0, 1], [0, 0]])


@settings(max_examples=50)
@given(sampled_from([4, 6, 8, 9]), lists(integers(min_value=0, max_value=100), min_size=9, max_size=9))
def test_inverse_is_two_sided(m, values):
    modulus = Modulus.parse(m)
    a = RingMatrix(3, modulus, tuple(x % m for x in values))
    if is_invertible(a):
        assert mat_mul(a, inverse(a)) == RingMatrix.identity(3, modulus)
        assert mat_mul(inverse(a), a) == RingMatrix.identity(3, modulus)
    else:
        with pytest.raises(NotInvertibleError):
            inverse(a)


def test_key_and_bytes(z4):
    a = rows(z4, [[1, 2], [3, 0]])
    assert a.key() == ((1 * 4 + 2) * 4 + 3) * 4 + 0
    assert a.to_bytes() != rows(z4, [[1, 2], [3, 1]]).to_bytes()
    assert a.to_bytes()[:8] == b"\x00\x00\x00\x02\x00\x00\x00\x04"


def test_diagonal_spec_requires_sorted_entries(z4):
    with pytest.raises(ValueError):
        DiagonalSpec(z4, (2, 1))
    assert DiagonalSpec.of(z4, [3, 1, 5]).entries == (1, 1, 3)


def test_all_diagonal_specs_counts(z4):
    assert len(list(all_diagonal_specs(2, z4))) == 10
    assert len(list(all_diagonal_specs(3, z4))) == 20


# ----------------------- GL enumeration -----------------------

@pytest.mark.parametrize("n, m, expected", [(1, 4, 2), (2, 2, 6), (2, 3, 48), (2, 4, 96), (3, 2, 168)])
def test_enumerate_gl_sizes(n, m, expected):
    assert sum(1 for _ in enumerate_gl(n, Modulus.parse(m))) == expected


def test_enumerate_gl_units(z4):
    assert [a.entries for a in enumerate_gl(1, z4)] == [(1,), (3,)]


def test_enumerate_gl_is_column_major_sorted(z4):
    listed = [tuple(a.columns()) for a in enumerate_gl(2, z4)]
    assert listed == sorted(listed)
    assert len(set(listed)) == len(listed)


def test_enumerate_gl_over_composite_modulus(z6):
    assert sum(1 for _ in enumerate_gl(2, z6)) == 288


def test_enumerate_gl_budget(z4):
    with pytest.raises(BudgetExceededError) as info:
        list(enumerate_gl(3, z4, budget=1000))
    assert info.value.required == 4 ** 9


def test_gl_array_matches_stream(z4):
    batch = gl_array(2, z4)
    assert [a.entries for a in from_array(batch, z4)] == [a.entries for a in enumerate_gl(2, z4)]
    assert not batch.flags.writeable


def test_gl_generators_are_invertible(z4):
    generators = gl_generators(3, z4)
    assert len(generators) == 6 + 1
    assert all(is_invertible(g) for g in generators)


# ----------------------- numpy kernels -----------------------

def test_keys_round_trip(z4):
    batch = all_matrices_array(2, z4, 0, 256)
    keys = encode_keys(batch, 4)
    assert sorted(keys.tolist()) == list(range(256))
    assert np.array_equal(decode_keys(keys, 2, 4), batch)


def test_batch_det_matches_scalar():
    modulus = Modulus.parse(9)
    batch = all_matrices_array(2, modulus, 0, 2000)
    dets = batch_det(batch, 9)
    for matrix, value in zip(from_array(batch[:200], modulus), dets[:200]):
        assert det(matrix).value == value


def test_batch_inverse_and_conjugate(z4):
    group = gl_array(2, z4)
    inverses = batch_inverse(group, 4)
    products = np.matmul(group, inverses) % 4
    assert np.array_equal(products, np.broadcast_to(np.eye(2, dtype=np.int64), products.shape))
    d = to_array([RingMatrix.diagonal(z4, [1, 1])])[0]
    assert np.array_equal(batch_conjugate(group, inverses, d, 4), np.broadcast_to(d, group.shape))
