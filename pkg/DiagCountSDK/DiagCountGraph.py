import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from math import factorial
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from cachetools import LRUCache, cached
from sympy.utilities.iterables import partitions

from DiagCountSDK.DiagCountErrors import (
    DuplicateEntriesError,
    InvalidTypeError,
    InvariantError,
    ReconstructionError,
    exact_div,
)
from DiagCountSDK.DiagCountRing import Modulus, phi_i, val_int

logger = logging.getLogger('DiagCountGraph')

MAX_CLASS_VERTICES = 8
MAX_TREE_SCAN_VERTICES = 6

Edge = Tuple[int, int, int]


# ----------------------- Valuation graph -----------------------

@dataclass(frozen=True)
class ValuationGraph:
    """
    Complete weighted graph on g vertices. weights[i][j] is l_ij for i != j
    and None on the diagonal. labels, when present, are the sorted residues
    the vertices stand for.
    """

    g: int
    weights: Tuple[Tuple[Optional[int], ...], ...]
    labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.g < 1 or len(self.weights) != self.g:
            raise ValueError(f"Weight matrix must be {self.g} x {self.g}")
        for i in range(self.g):
            if len(self.weights[i]) != self.g or self.weights[i][i] is not None:
                raise ValueError("Weight matrix must be square with an empty diagonal")
            for j in range(i + 1, self.g):
                w = self.weights[i][j]
                if not isinstance(w, int) or w < 0 or w != self.weights[j][i]:
                    raise ValueError(f"Weight ({i},{j}) must be a symmetric non-negative integer, got {w}")
        if self.labels is not None and len(self.labels) != self.g:
            raise ValueError("One label per vertex")

    @classmethod
    def from_matrix(cls, weights: Sequence[Sequence[Optional[int]]], labels: Optional[Sequence[int]] = None) -> "ValuationGraph":
        g = len(weights)
        rows = tuple(tuple(None if i == j else weights[i][j] for j in range(g)) for i in range(g))
        return cls(g, rows, tuple(labels) if labels is not None else None)

    @classmethod
    def from_edges(cls, g: int, edge_weights: Dict[Tuple[int, int], int]) -> "ValuationGraph":
        rows = [[None] * g for _ in range(g)]
        for (i, j), w in edge_weights.items():
            rows[i][j] = rows[j][i] = w
        return cls.from_matrix(rows)

    def weight(self, i: int, j: int) -> int:
        return self.weights[i][j]

    def edges(self) -> List[Edge]:
        return [(i, j, self.weights[i][j]) for i in range(self.g) for j in range(i + 1, self.g)]

    @property
    def distinct_weights(self) -> Tuple[int, ...]:
        return tuple(sorted({w for _, _, w in self.edges()}))

    @property
    def max_weight(self) -> int:
        return max(self.distinct_weights, default=-1)


def check_triangle(graph: ValuationGraph) -> bool:
    """Ultrametric test on every vertex triple, including the forced-equality clause."""
    w = graph.weights
    for a, b, c in itertools.permutations(range(graph.g), 3):
        low = min(w[a][b], w[a][c])
        if w[b][c] < low:
            return False
        if w[a][b] != w[a][c] and w[b][c] != low:
            return False
    return True


def build_graph(entries: Sequence[int], modulus: Modulus) -> ValuationGraph:
    modulus.require_prime_power("build_graph")
    reduced = [x % modulus.m for x in entries]
    if len(set(reduced)) != len(reduced):
        raise DuplicateEntriesError(entries)
    labels = sorted(reduced)
    g = len(labels)
    rows = [[None if i == j else val_int((labels[i] - labels[j]) % modulus.m, modulus.p) for j in range(g)]
            for i in range(g)]
    graph = ValuationGraph.from_matrix(rows, labels)
    if not check_triangle(graph):
        raise InvariantError(f"Valuation graph of {labels} violates the triangle inequality")
    if len(graph.distinct_weights) > max(g - 1, 0):
        raise InvariantError(f"Valuation graph of {labels} has more than {g - 1} weights")
    return graph


# ----------------------- Ranked laminar hierarchy -----------------------

@dataclass(frozen=True)
class Leaf:
    vertex: int
    mult: int = 1


@dataclass(frozen=True)
class Node:
    """Vertices below this node are pairwise separated by exactly `weight` across children."""

    weight: int
    children: Tuple[Union["Node", Leaf], ...]


Hierarchy = Union[Node, Leaf]


def canon(h: Hierarchy) -> tuple:
    """Isomorphism-invariant encoding: leaves by multiplicity, children sorted."""
    if isinstance(h, Leaf):
        return ('L', h.mult)
    return ('N', h.weight, tuple(sorted(canon(child) for child in h.children)))


def leaves(h: Hierarchy) -> List[Leaf]:
    if isinstance(h, Leaf):
        return [h]
    return [leaf for child in h.children for leaf in leaves(child)]


def internal_nodes(h: Hierarchy) -> Iterator[Node]:
    if isinstance(h, Node):
        yield h
        for child in h.children:
            yield from internal_nodes(child)


def hierarchy_of(graph: ValuationGraph, mults: Optional[Sequence[int]] = None) -> Hierarchy:
    """Nested partition of the vertices by weight threshold. Needs the triangle inequality."""
    mults = list(mults) if mults is not None else [1] * graph.g
    if len(mults) != graph.g:
        raise ValueError(f"Expected {graph.g} multiplicities, got {len(mults)}")
    w = graph.weights

    def split(vertices: List[int]) -> Hierarchy:
        if len(vertices) == 1:
            return Leaf(vertices[0], mults[vertices[0]])
        low = min(w[u][v] for u, v in itertools.combinations(vertices, 2))
        blocks: List[List[int]] = []
        for v in vertices:
            for block in blocks:
                if w[block[0]][v] > low:
                    block.append(v)
                    break
            else:
                blocks.append([v])
        if len(blocks) < 2:
            raise InvariantError(f"Vertices {vertices} do not split at weight {low}")
        return Node(low, tuple(split(block) for block in blocks))

    return split(list(range(graph.g)))


def weights_of(h: Hierarchy, g: Optional[int] = None) -> ValuationGraph:
    """The weight matrix a hierarchy describes; leaf vertex indices must be 0..g-1."""
    g = len(leaves(h)) if g is None else g
    rows: List[List[Optional[int]]] = [[None] * g for _ in range(g)]
    for node in internal_nodes(h):
        groups = [[leaf.vertex for leaf in leaves(child)] for child in node.children]
        for left, right in itertools.combinations(groups, 2):
            for u in left:
                for v in right:
                    rows[u][v] = rows[v][u] = node.weight
    return ValuationGraph.from_matrix(rows)


def hierarchy_aut(h: Hierarchy) -> int:
    """Symmetries of the hierarchy: at every node, identical children may be shuffled."""
    if isinstance(h, Leaf):
        return 1
    total = 1
    for child in h.children:
        total *= hierarchy_aut(child)
    for count in Counter(canon(child) for child in h.children).values():
        total *= factorial(count)
    return total


def node_factor(weight: int, branches: int, p: int, k: int) -> int:
    """prod_{i=1}^{branches-1} phi_i(p^(k-weight)); zero once a factor vanishes."""
    total = 1
    for i in range(1, branches):
        factor = phi_i(p, k - weight, i)
        if factor == 0:
            return 0
        total *= factor
    return total


def hierarchy_phi_product(h: Hierarchy, p: int, k: int) -> int:
    total = 1
    for node in internal_nodes(h):
        total *= node_factor(node.weight, len(node.children), p, k)
        if total == 0:
            return 0
    return total


# ----------------------- Permissible spanning trees -----------------------

class _DisjointSet:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


@dataclass(frozen=True)
class PermissibleTree:
    """
    Spanning tree edges (u, v, weight) with u < v, and the linked cells:
    (weight, edges) pairs, each a maximal set of equal-weight edges joined
    through tree edges of at least that weight.
    """

    g: int
    edges: Tuple[Edge, ...]
    cells: Tuple[Tuple[int, Tuple[Edge, ...]], ...] = field(default=())


def linked_cells(g: int, edges: Sequence[Edge]) -> Tuple[Tuple[int, Tuple[Edge, ...]], ...]:
    cells = []
    for a in sorted({w for _, _, w in edges}):
        forest = _DisjointSet(g)
        for u, v, w in edges:
            if w >= a:
                forest.union(u, v)
        grouped: Dict[int, List[Edge]] = {}
        for edge in edges:
            if edge[2] == a:
                grouped.setdefault(forest.find(edge[0]), []).append(edge)
        for members in grouped.values():
            cells.append((a, tuple(sorted(members))))
    return tuple(sorted(cells))


def permissible_tree(graph: ValuationGraph) -> PermissibleTree:
    """
    Nested spanning forests from the heaviest weight down: an edge is kept
    when it joins two components of what has been kept so far. Ties are
    broken lexicographically on (u, v).
    """
    forest = _DisjointSet(graph.g)
    chosen: List[Edge] = []
    for a in reversed(graph.distinct_weights):
        for u, v, w in graph.edges():
            if w == a and forest.union(u, v):
                chosen.append((u, v, w))
    edges = tuple(chosen)
    return PermissibleTree(graph.g, edges, linked_cells(graph.g, edges))


def _components_at_least(graph: ValuationGraph, a: int) -> int:
    forest = _DisjointSet(graph.g)
    for u, v, w in graph.edges():
        if w >= a:
            forest.union(u, v)
    return len({forest.find(v) for v in range(graph.g)})


def all_permissible_trees(graph: ValuationGraph) -> List[PermissibleTree]:
    """Every tree the nested-forest construction can produce, over all tie-breaks."""
    if graph.g > MAX_TREE_SCAN_VERTICES:
        raise ValueError(f"Tree scan limited to {MAX_TREE_SCAN_VERTICES} vertices")
    needed = {a: graph.g - _components_at_least(graph, a) for a in graph.distinct_weights}
    trees = []
    for subset in itertools.combinations(graph.edges(), graph.g - 1):
        forest = _DisjointSet(graph.g)
        if not all(forest.union(u, v) for u, v, _ in subset):
            continue
        if all(sum(1 for _, _, w in subset if w >= a) == count for a, count in needed.items()):
            trees.append(PermissibleTree(graph.g, subset, linked_cells(graph.g, subset)))
    return trees


def cell_multiset(tree: PermissibleTree) -> List[Tuple[int, int]]:
    return sorted((weight, len(members)) for weight, members in tree.cells)


def reconstruct(tree: PermissibleTree, g: int) -> ValuationGraph:
    """Each missing edge takes the smallest weight on the tree path between its ends."""
    if g != tree.g or len(tree.edges) != g - 1:
        raise ReconstructionError(f"A spanning tree on {g} vertices needs {g - 1} edges, got {len(tree.edges)}")
    adjacency: Dict[int, List[Tuple[int, int]]] = {v: [] for v in range(g)}
    forest = _DisjointSet(g)
    for u, v, w in tree.edges:
        if not (0 <= u < g and 0 <= v < g) or u == v:
            raise ReconstructionError(f"Edge ({u}, {v}) is not between distinct vertices of 0..{g - 1}")
        if not isinstance(w, int) or w < 0:
            raise ReconstructionError(f"Edge ({u}, {v}) has invalid weight {w}")
        if not forest.union(u, v):
            raise ReconstructionError(f"Edge ({u}, {v}) closes a cycle")
        adjacency[u].append((v, w))
        adjacency[v].append((u, w))

    rows: List[List[Optional[int]]] = [[None] * g for _ in range(g)]
    for source in range(g):
        stack = [(source, None)]
        seen = {source}
        while stack:
            vertex, bottleneck = stack.pop()
            for nxt, w in adjacency[vertex]:
                if nxt not in seen:
                    seen.add(nxt)
                    value = w if bottleneck is None else min(bottleneck, w)
                    rows[source][nxt] = value
                    stack.append((nxt, value))
    graph = ValuationGraph.from_matrix(rows)
    if tree.cells and cell_multiset(permissible_tree(graph)) != cell_multiset(tree):
        raise ReconstructionError("Linked cells do not match the completed graph")
    return graph


# ----------------------- Automorphisms and class counts -----------------------

def aut_order(graph: ValuationGraph, mults: Optional[Sequence[int]] = None) -> int:
    """Vertex permutations preserving every weight (and the multiplicities, when given)."""
    if mults is not None and len(mults) != graph.g:
        raise ValueError(f"Expected {graph.g} multiplicities, got {len(mults)}")
    w = graph.weights
    pairs = list(itertools.combinations(range(graph.g), 2))
    count = 0
    for perm in itertools.permutations(range(graph.g)):
        if mults is not None and any(mults[perm[i]] != mults[i] for i in range(graph.g)):
            continue
        if all(w[perm[i]][perm[j]] == w[i][j] for i, j in pairs):
            count += 1
    return count


def sigma(graph: ValuationGraph) -> int:
    """Index of Aut(G) in S_g: vertex permutations that change the graph."""
    return exact_div(factorial(graph.g), aut_order(graph), "sigma")


def count_classes(graph: ValuationGraph, p: int, k: int) -> int:
    """Diagonal similarity classes with distinct entries whose valuation graph is isomorphic to `graph`."""
    if graph.max_weight > k - 1:
        raise InvalidTypeError(f"Weight {graph.max_weight} does not fit in Z_{p}^{k}", graph)
    tree = permissible_tree(graph)
    product = 1
    for weight, members in tree.cells:
        product *= node_factor(weight, len(members) + 1, p, k)
        if product == 0:
            return 0
    return exact_div(p ** k * product, aut_order(graph), "count_classes")


# ----------------------- Graph classes -----------------------

@dataclass(frozen=True)
class GraphClass:
    """A valuation graph shape with weights replaced by dense ranks 1..r."""

    g: int
    root: Hierarchy
    r: int

    @property
    def canon(self) -> tuple:
        return canon(self.root)

    def encoding(self) -> str:
        def render(h: Hierarchy) -> str:
            if isinstance(h, Leaf):
                return "*"
            return f"{h.weight}(" + ",".join(sorted(render(child) for child in h.children)) + ")"
        return render(self.root)

    def instantiate(self, weights: Sequence[int], mults: Optional[Sequence[int]] = None) -> Hierarchy:
        """Replace rank t by weights[t-1]; leaves get vertex numbers in depth-first order."""
        if len(weights) != self.r or any(b <= a for a, b in zip(weights, weights[1:])):
            raise InvalidTypeError(f"Need {self.r} strictly increasing weights, got {list(weights)}")
        counter = itertools.count()

        def build(h: Hierarchy) -> Hierarchy:
            if isinstance(h, Leaf):
                vertex = next(counter)
                return Leaf(vertex, mults[vertex] if mults is not None else 1)
            return Node(weights[h.weight - 1], tuple(build(child) for child in h.children))

        return build(self.root)

    def instantiate_graph(self, weights: Sequence[int]) -> ValuationGraph:
        return weights_of(self.instantiate(weights), self.g)


def _shapes(g: int) -> List[Hierarchy]:
    """Unranked hierarchy shapes on g leaves (every internal node has two or more children)."""
    if g == 1:
        return [Leaf(0)]
    result = []
    for parts in partitions(g, m=None):
        if sum(parts.values()) < 2:
            continue
        choices = []
        for size, count in sorted(parts.items()):
            choices.append(list(itertools.combinations_with_replacement(_shapes_cached(size), count)))
        for picked in itertools.product(*choices):
            children = tuple(child for group in picked for child in group)
            result.append(Node(0, children))
    return result


@cached(cache=LRUCache(maxsize=16))
def _shapes_cached(g: int) -> Tuple[Hierarchy, ...]:
    return tuple(_shapes(g))


def _rankings(shape: Hierarchy) -> Iterator[Hierarchy]:
    """All rank labellings strictly increasing from root to leaf, with ranks drawn from 1..N."""
    limit = sum(1 for _ in internal_nodes(shape))

    def label(h: Hierarchy, floor: int) -> Iterator[Hierarchy]:
        if isinstance(h, Leaf):
            yield h
            return
        for rank in range(floor + 1, limit + 1):
            for children in itertools.product(*(list(label(child, rank)) for child in h.children)):
                yield Node(rank, tuple(children))

    yield from label(shape, 0)


def _densify(h: Hierarchy) -> Tuple[Hierarchy, int]:
    ranks = sorted({node.weight for node in internal_nodes(h)})
    dense = {rank: index + 1 for index, rank in enumerate(ranks)}

    def relabel(x: Hierarchy) -> Hierarchy:
        if isinstance(x, Leaf):
            return Leaf(0)
        return Node(dense[x.weight], tuple(sorted((relabel(child) for child in x.children), key=canon)))

    return relabel(h), len(ranks)


@cached(cache=LRUCache(maxsize=16))
def _graph_classes(g: int) -> Tuple[GraphClass, ...]:
    found: Dict[tuple, GraphClass] = {}
    for shape in _shapes_cached(g):
        for ranked in _rankings(shape):
            root, r = _densify(ranked)
            key = canon(root)
            if key not in found:
                found[key] = GraphClass(g, root, r)
    logger.info(f"Enumerated {len(found)} valuation graph classes on {g} vertices")
    return tuple(found[key] for key in sorted(found))


def enumerate_graph_classes(g: int) -> List[GraphClass]:
    if g < 1:
        raise ValueError(f"Need at least one vertex, got {g}")
    if g > MAX_CLASS_VERTICES:
        raise ValueError(f"Class enumeration is limited to {MAX_CLASS_VERTICES} vertices, got {g}")
    return list(_graph_classes(g))


# ----------------------- DOT output -----------------------

def _vertex_name(graph_labels: Optional[Tuple[int, ...]], v: int) -> str:
    return str(graph_labels[v]) if graph_labels is not None else str(v)


def to_dot(graph: ValuationGraph, name: str = "G") -> str:
    lines = [f"graph {name} {{"]
    for v in range(graph.g):
        lines.append(f'  {v} [label="{_vertex_name(graph.labels, v)}"];')
    for u, v, w in graph.edges():
        lines.append(f'  {u} -- {v} [weight={w}, label="{w}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def tree_to_dot(tree: PermissibleTree, labels: Optional[Tuple[int, ...]] = None, name: str = "T") -> str:
    cell_of = {}
    for index, (_, members) in enumerate(tree.cells):
        for edge in members:
            cell_of[edge] = index
    lines = [f"graph {name} {{"]
    for v in range(tree.g):
        lines.append(f'  {v} [label="{_vertex_name(labels, v)}"];')
    for edge in tree.edges:
        u, v, w = edge
        lines.append(f'  {u} -- {v} [weight={w}, cell={cell_of[edge]}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
