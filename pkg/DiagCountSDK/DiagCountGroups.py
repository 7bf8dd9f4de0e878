import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

from cachetools import LRUCache, cached

from DiagCountSDK.DiagCountErrors import InvalidTypeError, exact_div
from DiagCountSDK.DiagCountGraph import (
    Hierarchy,
    Leaf,
    Node,
    ValuationGraph,
    canon,
    check_triangle,
    hierarchy_of,
    leaves,
    permissible_tree,
    weights_of,
)

logger = logging.getLogger('DiagCountGroups')


# ----------------------- Matrix types -----------------------

def _canonical(h: Hierarchy) -> Hierarchy:
    """Children sorted by encoding and leaves renumbered depth-first."""
    counter = iter(range(len(leaves(h))))

    def walk(x: Hierarchy) -> Hierarchy:
        if isinstance(x, Leaf):
            return Leaf(next(counter), x.mult)
        ordered = sorted(x.children, key=canon)
        return Node(x.weight, tuple(walk(child) for child in ordered))

    return walk(h)


@dataclass(frozen=True, eq=False)
class MatrixType:
    """
    The type of a diagonal matrix: multiplicities of its distinct entries and
    the valuations between them. Equality and hashing go through the
    isomorphism-invariant encoding, so vertex order never matters; instances
    built through from_hierarchy are also stored in canonical vertex order.
    """

    g: int
    mults: Tuple[int, ...]
    weights: Tuple[Tuple[Optional[int], ...], ...]
    _canon: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.mults) != self.g or any(m < 1 for m in self.mults):
            raise InvalidTypeError(f"Need {self.g} positive multiplicities, got {self.mults}", self)
        graph = self.graph()
        if not check_triangle(graph):
            raise InvalidTypeError("Weights violate the triangle inequality", self)
        if len(graph.distinct_weights) > max(self.g - 1, 0):
            raise InvalidTypeError(f"More than {self.g - 1} distinct weights", self)
        object.__setattr__(self, "_canon", canon(hierarchy_of(graph, self.mults)))

    def __eq__(self, other):
        if not isinstance(other, MatrixType):
            return NotImplemented
        return self._canon == other._canon

    def __hash__(self):
        return hash(self._canon)

    @classmethod
    def from_hierarchy(cls, h: Hierarchy) -> "MatrixType":
        h = _canonical(h)
        g = len(leaves(h))
        mults = tuple(leaf.mult for leaf in leaves(h))
        return cls(g, mults, weights_of(h, g).weights)

    @classmethod
    def from_graph(cls, graph: ValuationGraph, mults: Optional[Tuple[int, ...]] = None) -> "MatrixType":
        return cls.from_hierarchy(hierarchy_of(graph, mults))

    @classmethod
    def scalar(cls, n: int) -> "MatrixType":
        return cls(1, (n,), ((None,),))

    def graph(self) -> ValuationGraph:
        return ValuationGraph(self.g, self.weights)

    def hierarchy(self) -> Hierarchy:
        return hierarchy_of(self.graph(), self.mults)

    @property
    def canon(self) -> tuple:
        return self._canon

    @property
    def n(self) -> int:
        return sum(self.mults)

    @property
    def is_distinct(self) -> bool:
        return all(m == 1 for m in self.mults)

    @property
    def max_weight(self) -> int:
        return self.graph().max_weight

    def distinct_type(self) -> "MatrixType":
        """The same valuation graph with every multiplicity set to one."""
        return MatrixType(self.g, (1,) * self.g, self.weights)

    def partition_label(self) -> str:
        return "+".join(str(m) for m in sorted(self.mults, reverse=True))

    def weights_label(self) -> str:
        pairs = [str(self.weights[i][j]) for i in range(self.g) for j in range(i + 1, self.g)]
        return " ".join(pairs) if pairs else "-"

    def __str__(self):
        return f"MatrixType(mults={self.mults}, weights={self.weights_label()})"


def check_type(t: MatrixType, k: int) -> None:
    if t.max_weight > k - 1:
        raise InvalidTypeError(f"Weight {t.max_weight} does not fit below k={k}", t)


# ----------------------- Group orders -----------------------

@cached(cache=LRUCache(maxsize=256))
def gl_order(n: int, p: int, k: int) -> int:
    """|GL_n(Z_{p^k})| = p^(n^2 (k-1)) * prod_{l=1}^{n} (p^n - p^(l-1))."""
    if n < 1 or k < 1:
        raise ValueError(f"gl_order needs n >= 1 and k >= 1, got n={n}, k={k}")
    order = p ** (n * n * (k - 1))
    for l in range(1, n + 1):
        order *= p ** n - p ** (l - 1)
    return order


def centralizer_order(t: MatrixType, p: int, k: int) -> int:
    """Order of the centralizer in GL_n of any diagonal matrix of type t."""
    check_type(t, k)
    order = 1
    for m in t.mults:
        order *= gl_order(m, p, k)
    exponent = 0
    for i in range(t.g):
        for j in range(i + 1, t.g):
            exponent += 2 * t.mults[i] * t.mults[j] * t.weights[i][j]
    order *= p ** exponent
    # Lagrange
    exact_div(gl_order(t.n, p, k), order, f"centralizer of {t}")
    return order


def class_size(t: MatrixType, p: int, k: int) -> int:
    return exact_div(gl_order(t.n, p, k), centralizer_order(t, p, k), f"class size of {t}")


def type_degrees(t: MatrixType, k: int) -> Tuple[int, int]:
    """
    Degrees in p of t(T) and c(T).
    :return: (deg t, deg c); deg t <= deg c, with equality only for the
             all-distinct, all-weight-zero type.
    """
    check_type(t, k)
    deg_t = k + sum(k - w for _, _, w in permissible_tree(t.graph()).edges)
    deg_c = k * sum(m * m for m in t.mults)
    for i in range(t.g):
        for j in range(i + 1, t.g):
            deg_c += 2 * t.mults[i] * t.mults[j] * t.weights[i][j]
    return deg_t, deg_c
