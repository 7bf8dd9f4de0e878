import csv
import io
import itertools
import logging
from collections import Counter
from dataclasses import dataclass
from math import comb, factorial, gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import orjson

from DiagCountSDK.DiagCountErrors import ErratumReportError, exact_div
from DiagCountSDK.DiagCountGraph import (
    build_graph,
    count_classes,
    enumerate_graph_classes,
    hierarchy_aut,
    hierarchy_phi_product,
    node_factor,
)
from DiagCountSDK.DiagCountGroups import (
    MatrixType,
    centralizer_order,
    check_type,
    class_size,
    gl_order,
    type_degrees,
)
from DiagCountSDK.DiagCountMatrix import DiagonalSpec, all_diagonal_specs, check_budget
from DiagCountSDK.DiagCountRing import Modulus, phi_pow

logger = logging.getLogger('DiagCountTypes')

CSV_COLUMNS = ["partition", "weights", "t", "c", "s", "contribution"]


# ----------------------- Reports -----------------------

@dataclass(frozen=True)
class TypeReport:
    type: MatrixType
    t: int
    c: int
    s: int
    contribution: int
    graph_class: str = ""
    literal_t: Optional[int] = None

    def to_dict(self) -> Dict[str, object]:
        """Big integers as decimal strings."""
        return {
            "partition": self.type.partition_label(),
            "mults": list(self.type.mults),
            "weights": self.type.weights_label(),
            "class": self.graph_class,
            "t": str(self.t),
            "c": str(self.c),
            "s": str(self.s),
            "contribution": str(self.contribution),
            "literal_t": None if self.literal_t is None else str(self.literal_t),
        }


@dataclass(frozen=True)
class ExactRatio:
    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError(f"Denominator must be positive, got {self.denominator}")
        if gcd(self.numerator, self.denominator) != 1:
            raise ValueError(f"{self.numerator}/{self.denominator} is not reduced; use ExactRatio.of")

    @classmethod
    def of(cls, numerator: int, denominator: int) -> "ExactRatio":
        if denominator < 0:
            numerator, denominator = -numerator, -denominator
        common = gcd(numerator, denominator) or 1
        return cls(numerator // common, denominator // common)

    def __float__(self):
        return self.numerator / self.denominator

    def __str__(self):
        if self.denominator == 1:
            return str(self.numerator)
        return f"{self.numerator}/{self.denominator}"


# ----------------------- Classification -----------------------

def classify_diagonal(spec: DiagonalSpec) -> MatrixType:
    spec.modulus.require_prime_power("classify_diagonal")
    counts = Counter(spec.entries)
    values = sorted(counts)
    graph = build_graph(values, spec.modulus)
    return MatrixType.from_graph(graph, tuple(counts[v] for v in values))


def t_of_type(t: MatrixType, p: int, k: int, check: bool = False) -> int:
    """
    Similarity classes of diagonal matrices of exact type t:
    p^k * (product of phi_i factors) / |Aut| with multiplicity-aware automorphisms.
    :param check: cross-check against an exhaustive multiset scan.
    """
    check_type(t, k)
    h = t.hierarchy()
    value = exact_div(p ** k * hierarchy_phi_product(h, p, k), hierarchy_aut(h), f"t({t})")
    if check:
        scanned = multiset_scan_t(t, p, k)
        if scanned != value:
            raise ErratumReportError(t, value, scanned)
    return value


def literal_t(t: MatrixType, p: int, k: int) -> Optional[int]:
    """
    The block-arrangement rule g!/(n_1! ... n_g!) * t(T') where n_j counts the
    values of multiplicity j. None for types with distinct entries.
    """
    if t.is_distinct:
        return None
    blocks = Counter(t.mults)
    arrangements = factorial(t.g)
    for count in blocks.values():
        arrangements //= factorial(count)
    return arrangements * count_classes(t.distinct_type().graph(), p, k)


def multiset_scan_t(t: MatrixType, p: int, k: int, budget: Optional[int] = None) -> int:
    modulus = Modulus.prime_power(p, k)
    check_budget(f"multiset scan for n={t.n}", comb(modulus.m + t.n - 1, t.n), budget)
    return sum(1 for spec in all_diagonal_specs(t.n, modulus) if classify_diagonal(spec) == t)


def _compositions(n: int, parts: int) -> Iterator[Tuple[int, ...]]:
    for cuts in itertools.combinations(range(1, n), parts - 1):
        bounds = (0,) + cuts + (n,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


# ----------------------- Type enumeration -----------------------

def enumerate_types(n: int, p: int, k: int, check: bool = False) -> List[TypeReport]:
    """
    One report per diagonal type of size n over Z_{p^k}. Types whose class
    count vanishes are kept with zero contribution.
    """
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    Modulus.prime_power(p, k)
    total_gl = gl_order(n, p, k)
    reports: List[TypeReport] = []
    for g in range(1, n + 1):
        for graph_class in enumerate_graph_classes(g):
            seen = set()
            for weights in itertools.combinations(range(k), graph_class.r):
                for mults in _compositions(n, g):
                    matrix_type = MatrixType.from_hierarchy(graph_class.instantiate(weights, mults))
                    if matrix_type in seen:
                        continue
                    seen.add(matrix_type)
                    t = t_of_type(matrix_type, p, k, check)
                    c = centralizer_order(matrix_type, p, k)
                    s = exact_div(total_gl, c, f"class size of {matrix_type}")
                    report = TypeReport(
                        type=matrix_type,
                        t=t,
                        c=c,
                        s=s,
                        contribution=t * s,
                        graph_class=graph_class.encoding(),
                        literal_t=literal_t(matrix_type, p, k),
                    )
                    if report.literal_t is not None and report.literal_t != t:
                        logger.debug(f"{matrix_type}: t={t}, block-arrangement rule gives {report.literal_t}")
                    reports.append(report)
    logger.info(f"Enumerated {len(reports)} types for n={n} over Z_{p}^{k}")
    return reports


def type_census(n: int, p: int, k: int) -> Dict[Tuple[int, str], int]:
    census: Counter = Counter()
    for report in enumerate_types(n, p, k):
        census[(report.type.g, report.graph_class)] += 1
    return dict(sorted(census.items()))


# ----------------------- Counting -----------------------

def diag_count_engine(n: int, p: int, k: int, check: bool = False) -> int:
    """|Diag_n(Z_{p^k})| as the sum of t(T) |GL_n| / c(T) over all types."""
    return sum(report.contribution for report in enumerate_types(n, p, k, check))


def diag_count_semidirect(n: int, p: int, k: int, budget: Optional[int] = None) -> int:
    """Sum of class sizes over every sorted diagonal matrix."""
    modulus = Modulus.prime_power(p, k)
    check_budget(f"{n}-multisets of Z_{modulus.m}", comb(modulus.m + n - 1, n), budget)
    sizes: Dict[MatrixType, int] = {}
    total = 0
    for spec in all_diagonal_specs(n, modulus):
        matrix_type = classify_diagonal(spec)
        if matrix_type not in sizes:
            sizes[matrix_type] = class_size(matrix_type, p, k)
        total += sizes[matrix_type]
    logger.info(f"Semidirect sum over Z_{modulus.m}, n={n}: {len(sizes)} types, total {total}")
    return total


# ----------------------- Closed forms -----------------------

def diag2_closed(p: int, k: int) -> int:
    q = p ** k
    return q + exact_div(p ** (k + 1) * (p ** 2 - 1) * (p ** (3 * k) - 1), 2 * (p ** 3 - 1), "diag2_closed")


def diag3_closed(p: int, k: int) -> int:
    q = p ** k
    two_values = exact_div(p ** (k + 2) * (p ** 3 - 1) * (p ** (5 * k) - 1), p ** 5 - 1, "diag3_closed")
    equilateral = exact_div(
        p ** (k + 3) * (p ** 3 - 1) * (p - 2) * (p + 1) * (p ** (8 * k) - 1),
        6 * (p ** 8 - 1),
        "diag3_closed",
    )
    nested = (exact_div(p ** (8 * k) - p ** 8, p ** 8 - 1, "diag3_closed")
              - exact_div(p ** (5 * k) - p ** 5, p ** 5 - 1, "diag3_closed"))
    isosceles = exact_div(p ** (k + 3) * (p ** 2 - 1) * nested, 2, "diag3_closed")
    return q + two_values + equilateral + isosceles


def diag4_closed(p: int, k: int) -> int:
    """
    Sum of t * |GL_4| / c over the 4x4 type tables. The two triangle rows with
    one repeated value use per-vertex automorphisms: t = q phi phi / 2 when
    the repeated value is the apex, q phi phi otherwise.
    """
    q = p ** k
    gl1, gl2, gl3, gl4 = (gl_order(size, p, k) for size in (1, 2, 3, 4))

    def phi(weight: int) -> int:
        return phi_pow(p, k - weight)

    def chain(weight: int, length: int) -> int:
        # phi_1 ... phi_length at p^(k - weight)
        return node_factor(weight, length + 1, p, k)

    def term(t_numerator: int, t_denominator: int, c: int) -> int:
        t = exact_div(t_numerator, t_denominator, "diag4_closed t")
        return t * exact_div(gl4, c, "diag4_closed s")

    weights = range(k)
    total = term(q, 1, gl4)

    for i in weights:
        # at most two distinct values
        total += term(q * phi(i), 1, p ** (6 * i) * gl1 * gl3)
        total += term(q * phi(i), 2, p ** (8 * i) * gl2 ** 2)
        # three distinct values, one repeated
        total += term(q * chain(i, 2), 2, p ** (10 * i) * gl1 ** 2 * gl2)
        # four distinct values
        total += term(q * chain(i, 3), 24, p ** (12 * i) * gl1 ** 4)

    for i, j in itertools.combinations(weights, 2):
        total += term(q * phi(i) * phi(j), 1, p ** (6 * i + 4 * j) * gl1 ** 2 * gl2)
        total += term(q * phi(i) * phi(j), 2, p ** (8 * i + 2 * j) * gl1 ** 2 * gl2)
        total += term(q * phi(i) * chain(j, 2), 6, p ** (6 * i + 6 * j) * gl1 ** 4)
        total += term(q * phi(i) * phi(j) ** 2, 8, p ** (8 * i + 4 * j) * gl1 ** 4)
        total += term(q * chain(i, 2) * phi(j), 4, p ** (10 * i + 2 * j) * gl1 ** 4)

    for i, j, m in itertools.combinations(weights, 3):
        total += term(q * phi(i) * phi(j) * phi(m), 2, p ** (6 * i + 4 * j + 2 * m) * gl1 ** 4)
        total += term(q * phi(i) * phi(j) * phi(m), 4, p ** (8 * i + 2 * j + 2 * m) * gl1 ** 4)

    return total


CLOSED_FORMS = {2: diag2_closed, 3: diag3_closed, 4: diag4_closed}


# ----------------------- Proportion -----------------------

def proportion(n: int, p: int, k: int) -> ExactRatio:
    return ExactRatio.of(diag_count_engine(n, p, k), p ** (k * n * n))


def leading_coefficient(n: int, p: int, k: int) -> ExactRatio:
    """Share of M_n(Z_{p^k}) covered by types whose class count and centralizer have equal degree in p."""
    leading = 0
    for report in enumerate_types(n, p, k):
        deg_t, deg_c = type_degrees(report.type, k)
        if deg_t == deg_c:
            leading += report.contribution
    return ExactRatio.of(leading, p ** (k * n * n))


# ----------------------- Output -----------------------

def reports_to_csv(reports: Sequence[TypeReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for report in reports:
        row = report.to_dict()
        writer.writerow([row[column] for column in CSV_COLUMNS])
    writer.writerow(["total", "", str(sum(r.t for r in reports)), "", "", str(sum(r.contribution for r in reports))])
    return buffer.getvalue()


def reports_to_json(reports: Sequence[TypeReport]) -> bytes:
    payload = {
        "types": [report.to_dict() for report in reports],
        "total": str(sum(report.contribution for report in reports)),
    }
    return orjson.dumps(payload, option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2)
