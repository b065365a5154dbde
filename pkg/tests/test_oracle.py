import itertools
import random

import pytest

from msrdc.instance import CostFn, metric_closure, is_covering_global, solution_cost
from msrdc.oracle import (
    CnfFormula,
    WorkLimitExceeded,
    brute_force_msrdc,
    brute_force_sat,
    cnf_from_dimacs,
    cnf_to_dimacs,
)
from conftest import make_instance, random_connected_edges


def _plain_multiset_minimum(inst, closure):
    """Direct multiset enumeration over all of the candidate radii (slow)."""
    clients = sorted(inst.clients)
    pairs = [(f, r) for f in sorted(inst.facilities) for r in closure.candidate_radii]
    best = None
    for size in range(inst.k + 1):
        for combo in itertools.combinations_with_replacement(pairs, size):
            if all(any(closure.d(c, f) <= r for f, r in combo) for c in clients):
                cost = solution_cost(combo, inst.cost_fn)
                if best is None or cost < best:
                    best = cost
    return best


def test_empty_client_set_costs_zero():
    inst = make_instance(2, [(0, 1, 3)], set(), {0}, 1)
    res = brute_force_msrdc(inst, metric_closure(inst))
    assert res.status == "optimal" and res.cost == 0 and res.solution == ()


def test_colocated_single_client():
    inst = make_instance(2, [(0, 1, 0)], {0}, {0, 1}, 1)
    res = brute_force_msrdc(inst, metric_closure(inst))
    assert res.status == "optimal" and res.cost == 0


def test_path_single_ball():
    # facility 0 - client 1 - client 2, weights 1 and 2: one ball of radius 3
    inst = make_instance(3, [(0, 1, 1), (1, 2, 2)], {1, 2}, {0}, 1)
    clo = metric_closure(inst)
    res = brute_force_msrdc(inst, clo)
    assert res.cost == 3
    assert res.cost == _plain_multiset_minimum(inst, clo)


def test_matches_plain_multiset_enumeration():
    rng = random.Random(77)
    for trial in range(25):
        n = rng.randint(2, 6)
        inst = make_instance(
            n,
            random_connected_edges(rng, n, 0, 6),
            {v for v in range(n) if rng.random() < 0.6} or {0},
            {v for v in range(n) if rng.random() < 0.6} or {0},
            rng.randint(1, 2),
        )
        clo = metric_closure(inst)
        res = brute_force_msrdc(inst, clo)
        expected = _plain_multiset_minimum(inst, clo)
        if expected is None:
            assert res.status == "infeasible"
        else:
            assert res.cost == expected
            assert is_covering_global(res.solution, inst, clo)
            assert solution_cost(res.solution, inst.cost_fn) == res.cost
            assert len(res.solution) <= inst.k


def test_infeasible_when_budget_zero():
    inst = make_instance(2, [(0, 1, 1)], {1}, {0}, 0)
    assert brute_force_msrdc(inst, metric_closure(inst)).status == "infeasible"


def test_cost_non_increasing_in_budget_and_under_client_removal():
    rng = random.Random(5)
    for trial in range(10):
        n = rng.randint(3, 6)
        edges = random_connected_edges(rng, n, 1, 6)
        clients = {v for v in range(n) if rng.random() < 0.7} or {0}
        inst1 = make_instance(n, edges, clients, {0, n - 1}, 1)
        inst2 = make_instance(n, edges, clients, {0, n - 1}, 2)
        clo = metric_closure(inst1)
        r1, r2 = brute_force_msrdc(inst1, clo), brute_force_msrdc(inst2, clo)
        if r1.status == "optimal":
            assert r2.cost <= r1.cost
        for c in clients:
            fewer = make_instance(n, edges, clients - {c}, {0, n - 1}, 1)
            rf = brute_force_msrdc(fewer, clo)
            if r1.status == "optimal":
                assert rf.cost <= r1.cost


def test_work_limit_is_an_error_not_an_answer():
    inst = make_instance(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)], {1, 2, 3}, {0, 1}, 2)
    with pytest.raises(WorkLimitExceeded):
        brute_force_msrdc(inst, metric_closure(inst), work_limit=1)


def test_tie_break_is_lexicographically_smallest():
    # both facilities can cover the lone client at radius 1; facility 0 wins
    inst = make_instance(3, [(0, 1, 1), (1, 2, 1)], {1}, {0, 2}, 1)
    res = brute_force_msrdc(inst, metric_closure(inst))
    assert res.solution == ((0, 1),)


def test_brute_force_sat_examples():
    assert brute_force_sat(CnfFormula(1, ((1,),)))
    assert not brute_force_sat(CnfFormula(1, ((1,), (-1,))))
    assert brute_force_sat(CnfFormula(3, ((1, 2, 3), (-1, -2, -3))))


def test_brute_force_sat_limit():
    with pytest.raises(ValueError):
        brute_force_sat(CnfFormula(21, ((1,),)))


def test_cnf_validation():
    with pytest.raises(ValueError):
        CnfFormula(2, ((),))
    with pytest.raises(ValueError):
        CnfFormula(2, ((3,),))


def test_dimacs_round_trip():
    cnf = CnfFormula(3, ((1, -2, 3), (-1, 2), (2,)))
    text = cnf_to_dimacs(cnf)
    again = cnf_from_dimacs(text)
    assert again == cnf
    assert cnf_to_dimacs(again) == text


def test_dimacs_parser_handles_comments_and_multiline_clauses():
    text = "c a comment\np cnf 2 2\n1\n-2 0\n2 1 0\n"
    cnf = cnf_from_dimacs(text)
    assert cnf.clauses == ((1, -2), (2, 1))
    with pytest.raises(ValueError):
        cnf_from_dimacs("1 2 0\n")  # clause before header
    with pytest.raises(ValueError):
        cnf_from_dimacs("p cnf 2 3\n1 0\n")  # clause count mismatch
