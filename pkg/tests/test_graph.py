import itertools
from collections import Counter
from math import comb, factorial

import pytest
from hypothesis import given, settings
from hypothesis.strategies import integers, sampled_from, sets

from DiagCountSDK.DiagCountErrors import (
    DuplicateEntriesError,
    InvalidTypeError,
    ReconstructionError,
    UnsupportedOperationError,
)
from DiagCountSDK.DiagCountGraph import (
    Leaf,
    Node,
    PermissibleTree,
    ValuationGraph,
    aut_order,
    all_permissible_trees,
    build_graph,
    canon,
    cell_multiset,
    check_triangle,
    count_classes,
    enumerate_graph_classes,
    hierarchy_aut,
    hierarchy_of,
    permissible_tree,
    reconstruct,
    sigma,
    to_dot,
    tree_to_dot,
    weights_of,
)
from DiagCountSDK.DiagCountRing import Modulus, phi_pow

WORKED_ENTRIES = [0, 1, 2, 4, 5, 11]


@pytest.fixture
def worked(z27):
    return build_graph(WORKED_ENTRIES, z27)


def triangle(ab, ac, bc):
    return ValuationGraph.from_matrix([[None, ab, ac], [ab, None, bc], [ac, bc, None]])


def graph_isomorphic(left, right):
    if left.g != right.g:
        return False
    return any(all(left.weights[perm[i]][perm[j]] == right.weights[i][j]
                   for i in range(left.g) for j in range(left.g) if i != j)
               for perm in itertools.permutations(range(left.g)))


# ----------------------- construction -----------------------

def test_worked_example_weights(worked):
    labels = worked.labels
    index = {value: i for i, value in enumerate(labels)}
    assert worked.distinct_weights == (0, 1, 2)
    assert worked.weight(index[2], index[11]) == 2
    assert worked.weight(index[1], index[4]) == 1
    assert worked.weight(index[0], index[1]) == 0
    assert check_triangle(worked)


def test_small_graphs(z4):
    assert build_graph([0, 1], z4).weights == ((None, 0), (0, None))
    graph = build_graph([7, 3, 1], Modulus.prime_power(2, 3))
    assert graph.labels == (1, 3, 7)
    assert (graph.weight(0, 1), graph.weight(0, 2), graph.weight(1, 2)) == (1, 1, 2)


def test_duplicates_rejected():
    with pytest.raises(DuplicateEntriesError):
        build_graph([0, 1, 1], Modulus.prime_power(2, 3))
    with pytest.raises(DuplicateEntriesError):
        build_graph([0, 8], Modulus.prime_power(2, 3))


def test_composite_modulus_rejected(z6):
    with pytest.raises(UnsupportedOperationError):
        build_graph([0, 1], z6)


@pytest.mark.parametrize("weights, expected", [((2, 1, 0), False), ((0, 0, 1), True), ((1, 1, 1), True), ((0, 1, 2), False)])
def test_check_triangle(weights, expected):
    assert check_triangle(triangle(*weights)) is expected


@settings(max_examples=60)
@given(sampled_from([(2, 3), (3, 2), (5, 1), (2, 4)]), sets(integers(min_value=0, max_value=80), min_size=2, max_size=6))
def test_built_graphs_are_ultrametric(pk, values):
    p, k = pk
    modulus = Modulus.prime_power(p, k)
    entries = sorted({v % modulus.m for v in values})
    if len(entries) < 2:
        return
    graph = build_graph(entries, modulus)
    assert check_triangle(graph)
    assert len(graph.distinct_weights) <= graph.g - 1
    assert weights_of(hierarchy_of(graph)) == ValuationGraph(graph.g, graph.weights)
    assert reconstruct(permissible_tree(graph), graph.g) == ValuationGraph(graph.g, graph.weights)


# ----------------------- hierarchy -----------------------

def test_worked_example_hierarchy(worked):
    h = hierarchy_of(worked)
    assert isinstance(h, Node) and h.weight == 0
    sizes = sorted(1 if isinstance(child, Leaf) else len(child.children) for child in h.children)
    assert sizes == [1, 2, 2]
    assert hierarchy_aut(h) == 4


def test_canon_ignores_vertex_numbers():
    assert canon(Node(1, (Leaf(0), Leaf(1)))) == canon(Node(1, (Leaf(5), Leaf(3))))
    assert canon(Node(1, (Leaf(0, 2), Leaf(1)))) != canon(Node(1, (Leaf(0), Leaf(1))))


# ----------------------- permissible trees -----------------------

def test_worked_example_cells(worked):
    tree = permissible_tree(worked)
    assert len(tree.edges) == 5
    assert cell_multiset(tree) == [(0, 2), (1, 1), (1, 1), (2, 1)]


def test_all_trees_share_cell_multiset(worked):
    trees = all_permissible_trees(worked)
    assert len(trees) > 1
    assert {tuple(cell_multiset(tree)) for tree in trees} == {tuple(cell_multiset(permissible_tree(worked)))}
    for tree in trees:
        assert reconstruct(tree, worked.g) == ValuationGraph(worked.g, worked.weights)


def test_single_edge_and_equilateral():
    tree = permissible_tree(ValuationGraph.from_matrix([[None, 3], [3, None]]))
    assert tree.edges == ((0, 1, 3),)
    assert cell_multiset(tree) == [(3, 1)]
    equilateral = triangle(1, 1, 1)
    assert all(cell_multiset(t) == [(1, 2)] for t in all_permissible_trees(equilateral))
    assert len(all_permissible_trees(equilateral)) == 3


def test_reconstruct_examples():
    assert reconstruct(PermissibleTree(2, ((0, 1, 4),)), 2) == ValuationGraph.from_matrix([[None, 4], [4, None]])
    star = PermissibleTree(3, ((0, 1, 0), (0, 2, 0)))
    assert reconstruct(star, 3) == triangle(0, 0, 0)


@pytest.mark.parametrize("tree, g", [
    (PermissibleTree(3, ((0, 1, 0),)), 3),
    (PermissibleTree(3, ((0, 1, 0), (0, 1, 1))), 3),
    (PermissibleTree(3, ((0, 1, 0), (1, 3, 0))), 3),
    (PermissibleTree(3, ((0, 1, 0), (1, 2, 0))), 4),
])
def test_reconstruct_rejects_malformed(tree, g):
    with pytest.raises(ReconstructionError):
        reconstruct(tree, g)


# ----------------------- automorphisms and counts -----------------------

def test_aut_examples(worked):
    assert aut_order(worked) == 4
    k2 = ValuationGraph.from_matrix([[None, 0], [0, None]])
    assert aut_order(k2) == 2
    assert aut_order(k2, (2, 1)) == 1
    isosceles = triangle(0, 0, 1)
    assert aut_order(isosceles, (1, 1, 1)) == 2
    assert aut_order(isosceles, (1, 2, 1)) == 1
    assert aut_order(isosceles, (2, 1, 1)) == 2
    assert sigma(worked) == factorial(6) // 4


def test_hierarchy_aut_agrees_with_permutation_scan(worked):
    for mults in [(1,) * 6, (2, 1, 1, 1, 1, 1), (1, 1, 1, 2, 1, 2)]:
        assert hierarchy_aut(hierarchy_of(worked, mults)) == aut_order(worked, mults)


def test_worked_example_class_count(worked):
    assert count_classes(worked, 3, 3) == 78732


@pytest.mark.parametrize("p, k, i", [(2, 2, 0), (2, 2, 1), (3, 2, 1), (5, 3, 2)])
def test_two_vertex_count(p, k, i):
    k2 = ValuationGraph.from_matrix([[None, i], [i, None]])
    assert count_classes(k2, p, k) == p ** k * phi_pow(p, k - i) // 2


def test_isosceles_over_z4():
    assert count_classes(triangle(0, 0, 1), 2, 2) == 4


def test_count_rejects_heavy_weight():
    with pytest.raises(InvalidTypeError):
        count_classes(triangle(0, 0, 2), 2, 2)


@pytest.mark.parametrize("p, k, g", [(2, 2, 2), (2, 2, 3), (2, 2, 4), (3, 1, 3), (2, 3, 3), (2, 3, 4), (3, 2, 3), (3, 2, 4)])
def test_counts_match_subset_scan(p, k, g):
    modulus = Modulus.prime_power(p, k)
    seen = []
    for subset in itertools.combinations(range(modulus.m), g):
        graph = build_graph(subset, modulus)
        for index, (known, _) in enumerate(seen):
            if graph_isomorphic(known, graph):
                seen[index] = (known, seen[index][1] + 1)
                break
        else:
            seen.append((graph, 1))
    assert sum(count for _, count in seen) == comb(modulus.m, g)
    for graph, count in seen:
        assert count_classes(graph, p, k) == count


# ----------------------- classes -----------------------

@pytest.mark.parametrize("g, expected", [(1, 1), (2, 1), (3, 2), (4, 6), (5, 20)])
def test_graph_class_counts(g, expected):
    assert len(enumerate_graph_classes(g)) == expected


@pytest.mark.parametrize("g", [3, 4, 5])
def test_class_instantiations_are_valid(g):
    for graph_class in enumerate_graph_classes(g):
        weights = list(range(graph_class.r))
        graph = graph_class.instantiate_graph(weights)
        assert check_triangle(graph)
        assert len(graph.distinct_weights) == graph_class.r
        assert graph_class.r <= g - 1


@pytest.mark.parametrize("p, k, g", [(2, 2, 3), (3, 2, 3), (2, 3, 4), (3, 2, 4)])
def test_class_counts_cover_all_subsets(p, k, g):
    total = 0
    for graph_class in enumerate_graph_classes(g):
        for weights in itertools.combinations(range(k), graph_class.r):
            total += count_classes(graph_class.instantiate_graph(weights), p, k)
    assert total == comb(p ** k, g)


def test_class_encodings_are_unique():
    encodings = [graph_class.encoding() for graph_class in enumerate_graph_classes(5)]
    assert len(set(encodings)) == len(encodings)
    assert Counter(graph_class.r for graph_class in enumerate_graph_classes(4)) == Counter({1: 1, 2: 3, 3: 2})


def test_class_enumeration_limits():
    with pytest.raises(ValueError):
        enumerate_graph_classes(0)
    with pytest.raises(ValueError):
        enumerate_graph_classes(9)


# ----------------------- DOT -----------------------

def test_dot_output(worked):
    dot = to_dot(worked)
    assert dot.startswith("graph G {")
    assert dot.count(" -- ") == 15
    assert 'label="11"' in dot
    tree_dot = tree_to_dot(permissible_tree(worked), worked.labels)
    assert tree_dot.count("weight=") == 5
