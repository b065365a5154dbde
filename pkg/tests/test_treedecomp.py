import random

import pytest

from msrdc.treedecomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    InvalidDecompositionError,
    TreeDecomposition,
    min_fill_heuristic,
    nice_violations,
    nicify,
    subtree_vertices,
    td_from_pace,
    td_to_pace,
    validate_td,
)
from conftest import exact_treewidth, make_instance, random_connected_edges


def _inst_path3():
    return make_instance(3, [(0, 1, 1), (1, 2, 1)], {0}, {2}, 1)


def test_validate_single_bag_with_everything():
    inst = _inst_path3()
    td = TreeDecomposition(3, [frozenset({0, 1, 2})], [])
    assert validate_td(td, inst)


def test_validate_path_bags():
    inst = _inst_path3()
    td = TreeDecomposition(3, [frozenset({0, 1}), frozenset({1, 2})], [(0, 1)])
    assert validate_td(td, inst)
    assert td.width == 1


def test_validate_reports_connectivity_violation():
    inst = _inst_path3()
    td = TreeDecomposition(
        3,
        [frozenset({0, 1}), frozenset({0, 2}), frozenset({1, 2})],
        [(0, 1), (1, 2)],
    )
    check = validate_td(td, inst)
    assert not check
    assert check.condition == "connectivity"
    assert check.witness == 1  # vertex 1 occurs in two non-adjacent bags


def test_validate_reports_missing_vertex_and_edge():
    inst = _inst_path3()
    td = TreeDecomposition(3, [frozenset({0, 1}), frozenset({1})], [(0, 1)])
    check = validate_td(td, inst)
    assert check.condition == "vertex-coverage" and check.witness == 2

    td = TreeDecomposition(3, [frozenset({0, 1}), frozenset({2})], [(0, 1)])
    check = validate_td(td, inst)
    assert check.condition == "edge-coverage" and check.witness == (1, 2)


def test_validate_rejects_non_tree():
    inst = _inst_path3()
    td = TreeDecomposition(3, [frozenset({0, 1, 2}), frozenset({0, 1, 2})], [])
    assert validate_td(td, inst).condition == "tree-structure"


def test_min_fill_on_tree_gives_width_one():
    rng = random.Random(5)
    for trial in range(20):
        n = rng.randint(2, 12)
        edges = [(rng.randrange(v), v, 1) for v in range(1, n)]
        inst = make_instance(n, edges, {0}, {0}, 1)
        td = min_fill_heuristic(inst)
        assert validate_td(td, inst)
        assert td.width == 1


def test_min_fill_on_complete_graph():
    edges = [(a, b, 1) for a in range(4) for b in range(a + 1, 4)]
    inst = make_instance(4, edges, {0}, {0}, 1)
    td = min_fill_heuristic(inst)
    assert validate_td(td, inst)
    assert td.width == 3


def test_min_fill_on_cycle_matches_exact_treewidth():
    edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]
    inst = make_instance(4, edges, {0}, {0}, 1)
    td = min_fill_heuristic(inst)
    assert validate_td(td, inst)
    # no width-1 decomposition exists: the exact treewidth of a 4-cycle is 2
    assert exact_treewidth(4, [(u, v) for u, v, _ in edges]) == 2
    assert td.width == 2


def test_nicify_single_bag_chain():
    td = TreeDecomposition(1, [frozenset({0})], [])
    ntd = nicify(td)
    assert list(ntd.kinds) == [LEAF, INTRODUCE, FORGET]
    assert ntd.vertices[1] == 0 and ntd.vertices[2] == 0
    assert ntd.bags[ntd.root] == frozenset()


def test_nicify_two_bags_valid_same_width():
    inst = _inst_path3()
    td = TreeDecomposition(3, [frozenset({0, 1}), frozenset({1, 2})], [(0, 1)])
    ntd = nicify(td)
    assert nice_violations(ntd, inst) == []
    assert ntd.width == td.width == 1


def test_nicify_branching_node_creates_joins():
    star = TreeDecomposition(
        4,
        [frozenset({0}), frozenset({0, 1}), frozenset({0, 2}), frozenset({0, 3})],
        [(0, 1), (0, 2), (0, 3)],
    )
    ntd = nicify(star)
    joins = [i for i, kind in enumerate(ntd.kinds) if kind == JOIN]
    assert joins
    for j in joins:
        a, b = ntd.children[j]
        assert ntd.bags[a] == ntd.bags[b] == ntd.bags[j]


def test_nicify_rejects_non_tree():
    bad = TreeDecomposition(2, [frozenset({0}), frozenset({1})], [])
    with pytest.raises(InvalidDecompositionError):
        nicify(bad)


def test_subtree_vertices():
    inst = _inst_path3()
    td = min_fill_heuristic(inst)
    ntd = nicify(td)
    for i, kind in enumerate(ntd.kinds):
        if kind == LEAF:
            assert subtree_vertices(ntd, i) == frozenset()
    assert subtree_vertices(ntd, ntd.root) == {0, 1, 2}


def test_forget_and_introduce_structural_properties():
    rng = random.Random(99)
    for trial in range(30):
        n = rng.randint(2, 9)
        edges = random_connected_edges(rng, n, 1, 5)
        inst = make_instance(n, edges, {0}, {0}, 1)
        ntd = nicify(min_fill_heuristic(inst))
        assert nice_violations(ntd, inst) == []
        for i, kind in enumerate(ntd.kinds):
            if kind == FORGET:
                v = ntd.vertices[i]
                assert v not in ntd.bags[i] and v in ntd.subtree[i]
        # separator property: interior vertices have no edges leaving a subtree
        for i in range(ntd.node_count):
            interior = ntd.subtree[i] - ntd.bags[i]
            for u, v, _w in inst.edges:
                if u in interior:
                    assert v in ntd.subtree[i]
                if v in interior:
                    assert u in ntd.subtree[i]


def test_random_graphs_min_fill_then_nicify_valid():
    rng = random.Random(31337)
    for trial in range(100):
        n = rng.randint(2, 12)
        edges = random_connected_edges(rng, n, 1, 9, extra_prob=rng.random() * 0.4)
        inst = make_instance(n, edges, {0}, {0}, 1)
        td = min_fill_heuristic(inst)
        assert validate_td(td, inst)
        ntd = nicify(td)
        assert nice_violations(ntd, inst) == []
        assert ntd.width == td.width


def test_pace_round_trip_bit_exact():
    inst = _inst_path3()
    td = min_fill_heuristic(inst)
    text = td_to_pace(td)
    again = td_from_pace(text)
    assert again == td
    assert td_to_pace(again) == text


def test_pace_parse_errors():
    with pytest.raises(InvalidDecompositionError):
        td_from_pace("b 1 1 2\n")  # bag before header
    with pytest.raises(InvalidDecompositionError):
        td_from_pace("s td 2 2 3\nb 1 1 2\n1 2\n")  # missing bag 2
    with pytest.raises(InvalidDecompositionError):
        td_from_pace("c only comments\n")


def test_pace_one_based_ids():
    text = "s td 2 2 3\nb 1 1 2\nb 2 2 3\n1 2\n"
    td = td_from_pace(text)
    assert td.bags == (frozenset({0, 1}), frozenset({1, 2}))
    assert td.edges == ((0, 1),)
