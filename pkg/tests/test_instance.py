import itertools
import random

import numpy as np
import pytest

from msrdc.instance import (
    CostFn,
    DistanceOverflowError,
    Instance,
    InvalidInstanceError,
    ball,
    canonical_solution,
    contract_zero_distance_classes,
    instance_from_json,
    instance_to_json,
    is_covering_global,
    metric_closure,
    permute_instance,
    remove_client,
    solution_cost,
)
from conftest import make_instance, random_connected_edges


def test_metric_closure_path():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0, 2}, {1}, 1)
    clo = metric_closure(inst)
    assert clo.d(0, 2) == 3
    assert clo.candidate_radii == (0, 1, 2, 3)


def test_metric_closure_triangle_shortcut():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 1), (0, 2, 5)], {0}, {2}, 1)
    assert metric_closure(inst).d(0, 2) == 2


def test_metric_closure_zero_weight_edge_is_pseudometric():
    inst = make_instance(2, [(0, 1, 0)], {0}, {1}, 1)
    assert metric_closure(inst).d(0, 1) == 0


def test_metric_closure_symmetry_and_triangle_inequality():
    rng = random.Random(7)
    for trial in range(8):
        n = rng.randint(2, 30)
        edges = random_connected_edges(rng, n, 0, 9, extra_prob=0.1)
        inst = make_instance(n, edges, {0}, {0}, 1)
        d = metric_closure(inst).dist
        assert np.array_equal(d, d.T)
        assert all(d[v, v] == 0 for v in range(n))
        for i, j, m in itertools.product(range(n), repeat=3):
            assert d[i, j] <= d[i, m] + d[m, j]


def test_metric_closure_overflow_rejected():
    with pytest.raises(DistanceOverflowError):
        make_instance(2, [(0, 1, 1 << 62)], {0}, {1}, 1)


def test_ball_zero_radius_includes_colocated_client():
    inst = make_instance(2, [(0, 1, 0)], {0}, {1}, 1)
    clo = metric_closure(inst)
    assert ball(clo, inst.clients, 1, 0) == {0}


def test_ball_max_radius_covers_all_clients():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0, 1, 2}, {0}, 1)
    clo = metric_closure(inst)
    assert ball(clo, inst.clients, 0, max(clo.candidate_radii)) == {0, 1, 2}


def test_ball_on_path():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0, 2}, {1}, 1)
    clo = metric_closure(inst)
    assert ball(clo, inst.clients, 1, 1) == {0}


def test_ball_monotone_in_radius():
    rng = random.Random(3)
    for trial in range(5):
        n = rng.randint(2, 10)
        inst = make_instance(n, random_connected_edges(rng, n, 0, 8), range(n), {0}, 1)
        clo = metric_closure(inst)
        radii = clo.candidate_radii
        for v in range(n):
            for r1, r2 in zip(radii, radii[1:]):
                assert ball(clo, inst.clients, v, r1) <= ball(clo, inst.clients, v, r2)


def test_solution_cost_examples():
    assert solution_cost((), CostFn("identity")) == 0
    assert solution_cost(((0, 3), (1, 0), (2, 4)), CostFn("identity")) == 7
    assert solution_cost(((0, 3), (1, 4)), CostFn("power", alpha=2)) == 25


def test_solution_cost_monotone_in_radius():
    rng = random.Random(11)
    for cost in (CostFn("identity"), CostFn("power", alpha=2)):
        radii = sorted(rng.sample(range(50), 8))
        for i, r in enumerate(radii[:-1]):
            lo = solution_cost(((0, r),), cost)
            hi = solution_cost(((0, radii[i + 1]),), cost)
            assert lo <= hi


def test_table_cost_missing_radius_fails():
    cost = CostFn("table", table={0: 0, 2: 5})
    with pytest.raises(InvalidInstanceError):
        solution_cost(((0, 1),), cost)


def test_table_cost_must_be_non_decreasing():
    cost = CostFn("table", table={0: 3, 1: 1})
    with pytest.raises(InvalidInstanceError):
        cost.validate_against((0, 1))


def test_is_covering_global_examples():
    empty_c = make_instance(2, [(0, 1, 1)], set(), {0}, 1)
    clo = metric_closure(empty_c)
    assert is_covering_global((), empty_c, clo)

    colocated = make_instance(2, [(0, 1, 0)], {0}, {1}, 1)
    clo = metric_closure(colocated)
    assert is_covering_global(((1, 0),), colocated, clo)

    path = make_instance(2, [(0, 1, 2)], {1}, {0}, 1)
    clo = metric_closure(path)
    assert not is_covering_global(((0, 1),), path, clo)


def test_is_covering_global_monotone_under_adding_entries():
    inst = make_instance(4, [(0, 1, 2), (1, 2, 3), (2, 3, 1)], {0, 2, 3}, {1, 2}, 3)
    clo = metric_closure(inst)
    base = ((1, 2),)
    bigger = base + ((2, 3),)
    if is_covering_global(base, inst, clo):
        assert is_covering_global(bigger, inst, clo)


def test_validation_rejects_bad_instances():
    with pytest.raises(InvalidInstanceError):
        make_instance(2, [(0, 0, 1)], {0}, {1}, 1)  # self loop
    with pytest.raises(InvalidInstanceError):
        make_instance(2, [(0, 1, -1)], {0}, {1}, 1)  # negative weight
    with pytest.raises(InvalidInstanceError):
        make_instance(2, [(0, 2, 1)], {0}, {1}, 1)  # endpoint out of range
    with pytest.raises(InvalidInstanceError):
        make_instance(3, [(0, 1, 1)], {0}, {1}, 1)  # disconnected
    with pytest.raises(InvalidInstanceError):
        make_instance(2, [(0, 1, 1)], {0}, {1}, -1)  # negative budget
    with pytest.raises(InvalidInstanceError):
        make_instance(2, [(0, 1, True)], {0}, {1}, 1)  # bool weight


def test_json_round_trip_and_field_order():
    inst = make_instance(
        3, [(1, 2, 2), (0, 1, 1)], {0, 2}, {1}, 2, CostFn("power", alpha=2)
    )
    text = instance_to_json(inst)
    again = instance_from_json(text)
    assert again == inst
    assert instance_to_json(again) == text
    keys = list(__import__("json").loads(text))
    assert keys == ["vertices", "clients", "facilities", "edges", "k", "cost"]


def test_json_unknown_fields_rejected():
    text = instance_to_json(make_instance(2, [(0, 1, 1)], {0}, {1}, 1))
    obj = __import__("json").loads(text)
    obj["extra"] = 1
    with pytest.raises(InvalidInstanceError):
        instance_from_json(__import__("json").dumps(obj))


def test_json_table_cost_round_trip():
    cost = CostFn("table", table={0: 0, 1: 1.5, 3: 4})
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0}, {1}, 1, cost)
    assert instance_from_json(instance_to_json(inst)) == inst


def test_permute_instance_relabels():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0}, {2}, 1)
    perm = [2, 0, 1]
    p = permute_instance(inst, perm)
    assert p.clients == {2} and p.facilities == {1}
    assert set(p.edges) == {(0, 2, 1), (0, 1, 2)}


def test_remove_client():
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {0, 2}, {1}, 1)
    assert remove_client(inst, 0).clients == {2}
    with pytest.raises(ValueError):
        remove_client(inst, 1)


def test_contract_zero_distance_classes():
    inst = make_instance(4, [(0, 1, 0), (1, 2, 3), (2, 3, 0)], {0, 3}, {1, 2}, 1)
    clo = metric_closure(inst)
    contracted, class_of = contract_zero_distance_classes(inst, clo)
    assert contracted.vertex_count == 2
    assert class_of[0] == class_of[1] and class_of[2] == class_of[3]
    c2 = metric_closure(contracted)
    assert c2.d(class_of[0], class_of[2]) == 3
    assert contracted.clients == {class_of[0], class_of[3]}
    assert contracted.facilities == {class_of[1], class_of[2]}
    # no zero distances then nothing changes
    clean = make_instance(2, [(0, 1, 2)], {0}, {1}, 1)
    same, ident = contract_zero_distance_classes(clean, metric_closure(clean))
    assert same is clean and ident == [0, 1]


def test_canonical_solution_sorts_pairs():
    assert canonical_solution([(3, 1), (0, 5), (3, 0)]) == ((0, 5), (3, 0), (3, 1))
