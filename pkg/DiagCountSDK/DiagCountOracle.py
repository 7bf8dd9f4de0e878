import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from cachetools import LRUCache, cached

from DiagCountSDK.DiagCountConfig import Config
from DiagCountSDK.DiagCountErrors import InvariantError
from DiagCountSDK.DiagCountGroups import gl_order
from DiagCountSDK.DiagCountMatrix import (
    CHUNK_SIZE,
    DiagonalSpec,
    RingMatrix,
    all_diagonal_specs,
    all_matrices_array,
    batch_conjugate,
    batch_inverse,
    check_budget,
    conjugate,
    decode_keys,
    encode_keys,
    gl_array,
    gl_generators,
    jordan_block,
    to_array,
)
from DiagCountSDK.DiagCountRing import Modulus

logger = logging.getLogger('DiagCountOracle')


@dataclass(frozen=True)
class OrbitRecord:
    """Conjugation orbit of a diagonal matrix; members are sorted row-major keys."""

    representative: DiagonalSpec
    orbit_size: int
    strategy: str
    members: Optional[np.ndarray] = field(default=None, compare=False, repr=False)


# ----------------------- Orbits -----------------------

@cached(cache=LRUCache(maxsize=32))
def _gl_with_inverses(n: int, modulus: Modulus, budget: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    group = gl_array(n, modulus, budget)
    inverses = batch_inverse(group, modulus.m)
    inverses.setflags(write=False)
    return group, inverses


def _group_size(n: int, modulus: Modulus) -> int:
    if modulus.is_prime_power:
        return gl_order(n, modulus.p, modulus.k)
    # upper bound is enough to pick a strategy
    return modulus.m ** (n * n)


def resolve_strategy(n: int, modulus: Modulus, config: Config) -> str:
    if config.oracle_strategy != "auto":
        return config.oracle_strategy
    return "full" if _group_size(n, modulus) <= config.full_gl_limit else "closure"


def _orbit_full(matrix: np.ndarray, modulus: Modulus, budget: int) -> np.ndarray:
    n = matrix.shape[0]
    group, inverses = _gl_with_inverses(n, modulus, budget)
    pieces = []
    for start in range(0, len(group), CHUNK_SIZE):
        stop = start + CHUNK_SIZE
        images = batch_conjugate(group[start:stop], inverses[start:stop], matrix, modulus.m)
        pieces.append(encode_keys(images, modulus.m))
    return np.unique(np.concatenate(pieces))


def _orbit_closure(matrix: np.ndarray, modulus: Modulus) -> np.ndarray:
    """Breadth-first closure of {matrix} under conjugation by a generating set of GL_n."""
    n, m = matrix.shape[0], modulus.m
    generators = to_array(gl_generators(n, modulus))
    inverses = batch_inverse(generators, m)
    frontier = matrix[None, :, :]
    seen = encode_keys(frontier, m)
    while len(frontier):
        images = [encode_keys(batch_conjugate(gen, gen_inv, frontier, m), m)
                  for gen, gen_inv in zip(generators, inverses)]
        fresh = np.setdiff1d(np.concatenate(images), seen)
        seen = np.union1d(seen, fresh)
        frontier = decode_keys(fresh, n, m)
    return seen


def orbit_of(spec: DiagonalSpec, strategy: str = "auto", config: Optional[Config] = None,
             keep_members: bool = True) -> OrbitRecord:
    config = config or Config()
    if strategy == "auto":
        strategy = resolve_strategy(spec.n, spec.modulus, config)
    matrix = to_array([spec.as_matrix()])[0]
    if strategy == "full":
        keys = _orbit_full(matrix, spec.modulus, config.enumeration_budget)
    elif strategy == "closure":
        # an orbit never outgrows the group
        check_budget(f"GL_{spec.n}(Z_{spec.modulus.m}) orbit closure", _group_size(spec.n, spec.modulus),
                     config.enumeration_budget)
        keys = _orbit_closure(matrix, spec.modulus)
    else:
        raise ValueError(f"Unsupported oracle strategy: {strategy}")
    keys.setflags(write=False)
    return OrbitRecord(spec, int(len(keys)), strategy, keys if keep_members else None)


def _orbit_keys(job: Tuple[DiagonalSpec, str, Config]) -> np.ndarray:
    spec, strategy, config = job
    return orbit_of(spec, strategy, config).members


def collect_orbits(specs: Sequence[DiagonalSpec], config: Optional[Config] = None) -> List[OrbitRecord]:
    """Orbits of many representatives, fanned out over config.workers processes."""
    config = config or Config()
    if not specs:
        return []
    strategy = resolve_strategy(specs[0].n, specs[0].modulus, config)
    logger.info(f"Computing {len(specs)} orbits over {specs[0].modulus} with strategy={strategy}, workers={config.workers}")
    if config.workers > 1:
        with Pool(config.workers) as pool:
            keys = pool.map(_orbit_keys, [(spec, strategy, config) for spec in specs])
        return [OrbitRecord(spec, int(len(k)), strategy, k) for spec, k in zip(specs, keys)]
    return [orbit_of(spec, strategy, config) for spec in specs]


def _union(orbits: Sequence[OrbitRecord]) -> Tuple[np.ndarray, int]:
    everything = np.concatenate([orbit.members for orbit in orbits])
    union = np.unique(everything)
    return union, len(everything) - len(union)


# ----------------------- Brute-force counts -----------------------

def centralizer_brute(spec: DiagonalSpec, config: Optional[Config] = None) -> int:
    """Invertible matrices commuting with the diagonal matrix, by scan over GL_n."""
    config = config or Config()
    group = gl_array(spec.n, spec.modulus, config.enumeration_budget)
    d = to_array([spec.as_matrix()])[0]
    m = spec.modulus.m
    commutes = np.all(np.matmul(group, d) % m == np.matmul(d, group) % m, axis=(1, 2))
    return int(np.count_nonzero(commutes))


def union_count(orbits: Sequence[OrbitRecord], modulus: Modulus) -> int:
    """Size of the union of the orbits; over Z_{p^k} they must be disjoint."""
    union, overlap = _union(orbits)
    if overlap:
        if modulus.is_prime_power:
            raise InvariantError(f"Orbits of distinct diagonal matrices overlap in {overlap} matrices over {modulus}")
        logger.warning(f"{overlap} matrices over {modulus} have more than one diagonal form")
    return int(len(union))


def diag_count_brute(n: int, modulus: Modulus, config: Optional[Config] = None) -> int:
    """Size of the union of conjugation orbits of all sorted diagonal matrices."""
    orbits = collect_orbits(list(all_diagonal_specs(n, modulus)), config)
    count = union_count(orbits, modulus)
    logger.info(f"Brute count n={n} over {modulus}: {count} from {len(orbits)} orbits")
    return count


def _diagonalizable_mask(batch: np.ndarray, group: np.ndarray, inverses: np.ndarray, m: int) -> np.ndarray:
    """For each A in the batch: is P^-1 A P diagonal for some P in the group."""
    n = batch.shape[1]
    off_diagonal = ~np.eye(n, dtype=bool)
    images = batch_conjugate(inverses[:, None], group[:, None], batch[None, :], m)
    diagonal = np.all(images[..., off_diagonal] == 0, axis=-1)
    return np.any(diagonal, axis=0)


def diag_count_scan(n: int, modulus: Modulus, config: Optional[Config] = None) -> int:
    """Test every matrix of M_n(Z_m) on its own for a diagonalizing P in GL_n."""
    config = config or Config()
    total = modulus.m ** (n * n)
    group, inverses = _gl_with_inverses(n, modulus, config.enumeration_budget)
    check_budget(f"M_{n}(Z_{modulus.m}) scan", total * len(group), config.enumeration_budget)
    rows = max(1, CHUNK_SIZE // (len(group) * n * n))
    count = 0
    for start in range(0, total, rows):
        batch = all_matrices_array(n, modulus, start, start + rows)
        count += int(np.count_nonzero(_diagonalizable_mask(batch, group, inverses, modulus.m)))
    logger.info(f"Per-matrix scan n={n} over {modulus}: {count} of {total} diagonalizable")
    return count


# ----------------------- Uniqueness of diagonal forms -----------------------

@dataclass
class UniquenessReport:
    n: int
    m: int
    representatives: int
    pairs_checked: int
    collisions: List[Tuple[Tuple[int, ...], Tuple[int, ...]]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.collisions

    def to_dict(self) -> Dict[str, object]:
        return {
            "n": self.n,
            "modulus": self.m,
            "representatives": self.representatives,
            "pairs_checked": self.pairs_checked,
            "collisions": [[list(a), list(b)] for a, b in self.collisions],
            "passed": self.passed,
        }


def diagonal_collisions(orbits: Sequence[OrbitRecord]) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    """Pairs of representatives whose orbits share a matrix."""
    keys = np.concatenate([orbit.members for orbit in orbits])
    owners = np.concatenate([np.full(len(orbit.members), index) for index, orbit in enumerate(orbits)])
    order = np.argsort(keys, kind="stable")
    keys, owners = keys[order], owners[order]
    shared = np.flatnonzero(keys[1:] == keys[:-1])
    pairs = set()
    for position in shared:
        a, b = int(owners[position]), int(owners[position + 1])
        pairs.add((min(a, b), max(a, b)))
    return [(orbits[a].representative.entries, orbits[b].representative.entries) for a, b in sorted(pairs)]


def collision_scan(n: int, modulus: Modulus, config: Optional[Config] = None,
                   orbits: Optional[Sequence[OrbitRecord]] = None) -> UniquenessReport:
    """Pairs of sorted diagonal matrices with a common conjugate; pass orbits to reuse them."""
    if orbits is None:
        orbits = collect_orbits(list(all_diagonal_specs(n, modulus)), config)
    count = len(orbits)
    return UniquenessReport(n, modulus.m, count, count * (count - 1) // 2, diagonal_collisions(orbits))


def verify_unique_diagonalization(n: int, modulus: Modulus, config: Optional[Config] = None,
                                   orbits: Optional[Sequence[OrbitRecord]] = None) -> UniquenessReport:
    modulus.require_prime_power("verify_unique_diagonalization")
    report = collision_scan(n, modulus, config, orbits)
    if report.passed:
        logger.info(f"{report.pairs_checked} orbit pairs over {modulus} are disjoint")
    else:
        logger.error(f"Diagonal forms over {modulus} are not unique: {report.collisions[:5]}")
    return report


# ----------------------- Worked counterexamples -----------------------

Z6_PAIRS = (
    ((2, 3), ((1, 3), (2, 1))),
    ((5, 0), ((1, 3), (5, 2))),
)
Z6_TARGET = ((2, 3), (4, 3))


def z6_counterexample_check() -> bool:
    """Over Z_6, diag(2,3) and diag(5,0) are conjugate to the same matrix."""
    z6 = Modulus.general(6)
    target = RingMatrix.from_rows(z6, Z6_TARGET)
    images = [conjugate(RingMatrix.from_rows(z6, p), RingMatrix.diagonal(z6, d)) for d, p in Z6_PAIRS]
    (first, _), (second, _) = Z6_PAIRS
    return all(image == target for image in images) and sorted(first) != sorted(second)


@dataclass
class JordanDemoReport:
    identity_holds: bool
    # lambda -> Jordan-form matrices found among the conjugates (expected empty)
    forms_found: Dict[int, List[Tuple[int, ...]]]
    conjugates_checked: int

    @property
    def passed(self) -> bool:
        return self.identity_holds and not any(self.forms_found.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "identity_holds": self.identity_holds,
            "forms_found": {str(lam): [list(f) for f in found] for lam, found in self.forms_found.items()},
            "conjugates_checked": self.conjugates_checked,
            "passed": self.passed,
        }


def _is_jordan_form(matrix: np.ndarray) -> bool:
    """Diagonal, or a single 2x2 Jordan block [[mu, 1], [0, mu]]."""
    if matrix[1, 0] != 0:
        return False
    if matrix[0, 1] == 0:
        return True
    return matrix[0, 1] == 1 and matrix[0, 0] == matrix[1, 1]


def jordan_demo_checks() -> JordanDemoReport:
    """
    Over Z_4: [[0,1],[0,0]] = P [[2,1],[0,2]] P^-1 with P = [[1,0],[2,1]], and
    [[lam,2],[0,lam]] is conjugate to no diagonal matrix and no Jordan block.
    """
    z4 = Modulus.prime_power(2, 2)
    change = RingMatrix.from_rows(z4, [[1, 0], [2, 1]])
    identity_holds = conjugate(change, jordan_block(2, z4)) == jordan_block(0, z4)

    group, inverses = _gl_with_inverses(2, z4, None)
    forms_found: Dict[int, List[Tuple[int, ...]]] = {}
    for lam in range(z4.m):
        matrix = to_array([RingMatrix.from_rows(z4, [[lam, 2], [0, lam]])])[0]
        images = np.unique(encode_keys(batch_conjugate(group, inverses, matrix, z4.m), z4.m))
        found = [tuple(int(x) for x in image.ravel()) for image in decode_keys(images, 2, z4.m) if _is_jordan_form(image)]
        forms_found[lam] = found
    return JordanDemoReport(identity_holds, forms_found, int(len(group)) * z4.m)
