import itertools
import logging
import struct
from dataclasses import dataclass
from math import gcd
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached

from DiagCountSDK.DiagCountErrors import (
    BudgetExceededError,
    DimensionMismatchError,
    NotInvertibleError,
)
from DiagCountSDK.DiagCountRing import Modulus, Residue, inv, units

logger = logging.getLogger('DiagCountMatrix')

DEFAULT_BUDGET = 2 ** 28
CHUNK_SIZE = 1 << 20


# ----------------------- RingMatrix -----------------------

@dataclass(frozen=True)
class RingMatrix:
    """An n x n matrix over Z_m, entries stored row-major and reduced."""

    n: int
    modulus: Modulus
    entries: Tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"Dimension must be at least 1, got {self.n}")
        if len(self.entries) != self.n * self.n:
            raise ValueError(f"Expected {self.n * self.n} entries, got {len(self.entries)}")
        m = self.modulus.m
        if any(not 0 <= x < m for x in self.entries):
            raise ValueError(f"Entries must lie in [0, {m}): {self.entries}")

    @classmethod
    def from_rows(cls, modulus: Modulus, rows: Sequence[Sequence[int]]) -> "RingMatrix":
        n = len(rows)
        for row in rows:
            if len(row) != n:
                raise ValueError("RingMatrix must be square")
        return cls(n, modulus, tuple(x % modulus.m for row in rows for x in row))

    @classmethod
    def from_columns(cls, modulus: Modulus, columns: Sequence[Sequence[int]]) -> "RingMatrix":
        n = len(columns)
        return cls(n, modulus, tuple(columns[j][i] % modulus.m for i in range(n) for j in range(n)))

    @classmethod
    def identity(cls, n: int, modulus: Modulus) -> "RingMatrix":
        return cls(n, modulus, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def diagonal(cls, modulus: Modulus, diag: Sequence[int]) -> "RingMatrix":
        n = len(diag)
        return cls(n, modulus, tuple(diag[i] % modulus.m if i == j else 0 for i in range(n) for j in range(n)))

    def __getitem__(self, index: Tuple[int, int]) -> int:
        i, j = index
        return self.entries[i * self.n + j]

    def rows(self) -> List[List[int]]:
        n = self.n
        return [list(self.entries[i * n:(i + 1) * n]) for i in range(n)]

    def columns(self) -> List[Tuple[int, ...]]:
        n = self.n
        return [tuple(self.entries[i * n + j] for i in range(n)) for j in range(n)]

    def is_diagonal(self) -> bool:
        return all(self[i, j] == 0 for i in range(self.n) for j in range(self.n) if i != j)

    def diagonal_entries(self) -> Tuple[int, ...]:
        return tuple(self[i, i] for i in range(self.n))

    def key(self) -> int:
        """Row-major base-m integer; agrees with encode_keys."""
        value = 0
        for x in self.entries:
            value = value * self.modulus.m + x
        return value

    def to_bytes(self) -> bytes:
        """Canonical encoding: dimension, modulus, row-major entries."""
        return struct.pack(f'>II{len(self.entries)}I', self.n, self.modulus.m, *self.entries)

    def __matmul__(self, other: "RingMatrix") -> "RingMatrix":
        return mat_mul(self, other)

    def __str__(self):
        return "[" + ", ".join(str(row) for row in self.rows()) + f"] mod {self.modulus.m}"


@dataclass(frozen=True)
class DiagonalSpec:
    """Sorted diagonal entries: the canonical representative of a diagonal similarity class."""

    modulus: Modulus
    entries: Tuple[int, ...]

    def __post_init__(self):
        if list(self.entries) != sorted(self.entries):
            raise ValueError(f"DiagonalSpec entries must be sorted, got {self.entries}")
        if any(not 0 <= x < self.modulus.m for x in self.entries):
            raise ValueError(f"Entries must lie in [0, {self.modulus.m})")

    @classmethod
    def of(cls, modulus: Modulus, entries: Sequence[int]) -> "DiagonalSpec":
        return cls(modulus, tuple(sorted(x % modulus.m for x in entries)))

    @property
    def n(self) -> int:
        return len(self.entries)

    def as_matrix(self) -> RingMatrix:
        return RingMatrix.diagonal(self.modulus, self.entries)


def all_diagonal_specs(n: int, modulus: Modulus) -> Iterator[DiagonalSpec]:
    """Every sorted n-multiset of Z_m, lexicographically."""
    for combo in itertools.combinations_with_replacement(range(modulus.m), n):
        yield DiagonalSpec(modulus, combo)


# ----------------------- Scalar operations -----------------------

def _check_compatible(a: RingMatrix, b: RingMatrix) -> None:
    if a.n != b.n or a.modulus != b.modulus:
        raise DimensionMismatchError((a.n, a.modulus.m), (b.n, b.modulus.m))


def mat_mul(a: RingMatrix, b: RingMatrix) -> RingMatrix:
    _check_compatible(a, b)
    n, m = a.n, a.modulus.m
    A, B = a.entries, b.entries
    out = []
    for i in range(n):
        for j in range(n):
            out.append(sum(A[i * n + t] * B[t * n + j] for t in range(n)) % m)
    return RingMatrix(n, a.modulus, tuple(out))


def _int_det(rows: List[List[int]]) -> int:
    """Cofactor expansion over the integers; no division, so zero divisors are harmless."""
    size = len(rows)
    if size == 1:
        return rows[0][0]
    if size == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j, pivot in enumerate(rows[0]):
        if pivot == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        total += (-1) ** j * pivot * _int_det(minor)
    return total


def det(a: RingMatrix) -> Residue:
    return a.modulus(_int_det(a.rows()))


def is_invertible(a: RingMatrix) -> bool:
    return gcd(det(a).value, a.modulus.m) == 1


def adjugate(a: RingMatrix) -> RingMatrix:
    n = a.n
    if n == 1:
        return RingMatrix(1, a.modulus, (1,))
    rows = a.rows()
    cofactors = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for r, row in enumerate(rows) if r != i]
            cofactors[i][j] = (-1) ** (i + j) * _int_det(minor)
    # adjugate is the transposed cofactor matrix
    return RingMatrix.from_rows(a.modulus, [[cofactors[j][i] for j in range(n)] for i in range(n)])


def inverse(a: RingMatrix) -> RingMatrix:
    d = det(a)
    if gcd(d.value, a.modulus.m) != 1:
        raise NotInvertibleError(f"matrix with determinant {d.value}", a.modulus.m)
    scale = inv(d).value
    adj = adjugate(a)
    return RingMatrix(a.n, a.modulus, tuple(scale * x % a.modulus.m for x in adj.entries))


def conjugate(p: RingMatrix, a: RingMatrix) -> RingMatrix:
    """P * A * P^-1."""
    _check_compatible(p, a)
    return mat_mul(mat_mul(p, a), inverse(p))


def jordan_block(lam: int, modulus: Modulus, size: int = 2) -> RingMatrix:
    rows = [[lam if i == j else (1 if j == i + 1 else 0) for j in range(size)] for i in range(size)]
    return RingMatrix.from_rows(modulus, rows)


# ----------------------- GL enumeration -----------------------

def check_budget(what: str, required: int, budget: Optional[int]) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    if required > budget:
        raise BudgetExceededError(what, required, budget)


def _reduce_mod_p(vector: Tuple[int, ...], basis: List[Tuple[int, List[int]]], p: int) -> Optional[Tuple[int, List[int]]]:
    """Reduce against an echelon basis over F_p; None when dependent."""
    v = [x % p for x in vector]
    for pivot, b in basis:
        if v[pivot]:
            factor = v[pivot]
            v = [(x - factor * y) % p for x, y in zip(v, b)]
    for index, x in enumerate(v):
        if x:
            scale = pow(x, -1, p)
            return index, [(y * scale) % p for y in v]
    return None


def enumerate_gl(n: int, modulus: Modulus, budget: Optional[int] = None) -> Iterator[RingMatrix]:
    """
    Yield every invertible n x n matrix over Z_m exactly once, in column-major
    lexicographic order. For prime powers each column is rejected early when it
    is dependent mod p on the columns already chosen.
    """
    check_budget(f"GL_{n}(Z_{modulus.m}) enumeration", modulus.m ** (n * n), budget)
    all_columns = list(itertools.product(range(modulus.m), repeat=n))

    if not modulus.is_prime_power:
        for columns in itertools.product(all_columns, repeat=n):
            candidate = RingMatrix.from_columns(modulus, columns)
            if is_invertible(candidate):
                yield candidate
        return

    p = modulus.p

    def extend(chosen: List[Tuple[int, ...]], basis: List[Tuple[int, List[int]]]):
        if len(chosen) == n:
            yield RingMatrix.from_columns(modulus, chosen)
            return
        for column in all_columns:
            reduced = _reduce_mod_p(column, basis, p)
            if reduced is None:
                continue
            # keep the basis in echelon form for the next level
            pivot, vector = reduced
            new_basis = []
            for q, b in basis:
                if b[pivot]:
                    factor = b[pivot]
                    b = [(x - factor * y) % p for x, y in zip(b, vector)]
                new_basis.append((q, b))
            new_basis.append(reduced)
            yield from extend(chosen + [column], new_basis)

    yield from extend([], [])


def gl_generators(n: int, modulus: Modulus) -> List[RingMatrix]:
    """Transvections I + E_ij and diag(u, 1, ..., 1) for every unit u."""
    generators = []
    for i in range(n):
        for j in range(n):
            if i != j:
                rows = [[1 if r == c else 0 for c in range(n)] for r in range(n)]
                rows[i][j] = 1
                generators.append(RingMatrix.from_rows(modulus, rows))
    for u in units(modulus):
        if u != 1:
            generators.append(RingMatrix.diagonal(modulus, [u] + [1] * (n - 1)))
    return generators


# ----------------------- numpy batch kernels -----------------------

def _place_values(n: int, m: int) -> np.ndarray:
    return np.array([m ** (n * n - 1 - t) for t in range(n * n)], dtype=np.int64)


def encode_keys(batch: np.ndarray, m: int) -> np.ndarray:
    """Row-major base-m keys for a (B, n, n) batch."""
    count, n, _ = batch.shape
    if m ** (n * n) >= 2 ** 62:
        raise BudgetExceededError("int64 matrix keys", m ** (n * n), 2 ** 62)
    return batch.reshape(count, n * n).astype(np.int64) @ _place_values(n, m)


def decode_keys(keys: np.ndarray, n: int, m: int) -> np.ndarray:
    digits = np.empty((len(keys), n * n), dtype=np.int64)
    rest = keys.astype(np.int64).copy()
    for t in range(n * n - 1, -1, -1):
        digits[:, t] = rest % m
        rest //= m
    return digits.reshape(len(keys), n, n)


def _column_major_batch(indices: np.ndarray, n: int, m: int) -> np.ndarray:
    """Decode candidate indices whose digits run down each column in turn."""
    digits = decode_keys(indices, n, m)
    # digits were laid out row-major; reinterpret them as column-major
    return np.ascontiguousarray(digits.transpose(0, 2, 1))


def all_matrices_array(n: int, modulus: Modulus, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
    total = modulus.m ** (n * n)
    stop = total if stop is None else min(stop, total)
    return _column_major_batch(np.arange(start, stop, dtype=np.int64), n, modulus.m)


def batch_det(batch: np.ndarray, m: int) -> np.ndarray:
    """Leibniz expansion over a (B, n, n) batch, reduced mod m."""
    count, n, _ = batch.shape
    total = np.zeros(count, dtype=np.int64)
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
        term = np.ones(count, dtype=np.int64)
        for row, col in enumerate(perm):
            term = (term * batch[:, row, col]) % m
        total = (total - term) if inversions % 2 else (total + term)
    return total % m


def batch_adjugate(batch: np.ndarray, m: int) -> np.ndarray:
    count, n, _ = batch.shape
    if n == 1:
        return np.ones((count, 1, 1), dtype=np.int64)
    adj = np.empty((count, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(batch, i, axis=1), j, axis=2)
            sign = -1 if (i + j) % 2 else 1
            adj[:, j, i] = (sign * batch_det(minor, m)) % m
    return adj


def unit_inverse_table(m: int) -> np.ndarray:
    """table[x] = x^-1 mod m for units, 0 for non-units."""
    table = np.zeros(m, dtype=np.int64)
    for u in range(1, m):
        if gcd(u, m) == 1:
            table[u] = pow(u, -1, m)
    return table


def batch_inverse(batch: np.ndarray, m: int) -> np.ndarray:
    dets = batch_det(batch, m)
    table = unit_inverse_table(m)
    if np.any(table[dets] == 0):
        raise NotInvertibleError("batch member", m)
    return (table[dets][:, None, None] * batch_adjugate(batch, m)) % m


def batch_conjugate(p: np.ndarray, p_inv: np.ndarray, a: np.ndarray, m: int) -> np.ndarray:
    """P A P^-1, broadcasting over the leading axis."""
    return np.matmul(np.matmul(p, a) % m, p_inv) % m


@cached(cache=LRUCache(maxsize=32))
def gl_array(n: int, modulus: Modulus, budget: Optional[int] = None) -> np.ndarray:
    """
    Every element of GL_n(Z_m) as a (|GL|, n, n) int64 array, in the same
    column-major lexicographic order as enumerate_gl.
    """
    total = modulus.m ** (n * n)
    check_budget(f"GL_{n}(Z_{modulus.m}) array", total, budget)
    table = unit_inverse_table(modulus.m)
    pieces = []
    for start in range(0, total, CHUNK_SIZE):
        candidates = all_matrices_array(n, modulus, start, start + CHUNK_SIZE)
        keep = table[batch_det(candidates, modulus.m)] != 0
        pieces.append(candidates[keep])
    result = np.concatenate(pieces) if pieces else np.empty((0, n, n), dtype=np.int64)
    result.setflags(write=False)
    logger.info(f"Materialized GL_{n}(Z_{modulus.m}) with {len(result)} elements")
    return result


def to_array(matrices: Sequence[RingMatrix]) -> np.ndarray:
    if not matrices:
        raise ValueError("Cannot build an array from no matrices")
    n = matrices[0].n
    return np.array([m.entries for m in matrices], dtype=np.int64).reshape(len(matrices), n, n)


def from_array(batch: np.ndarray, modulus: Modulus) -> List[RingMatrix]:
    count, n, _ = batch.shape
    return [RingMatrix(n, modulus, tuple(int(x) for x in row)) for row in batch.reshape(count, n * n)]
