"""Exact ball-cover clustering on graph metrics via tree-decomposition DP."""

from .instance import (
    CostFn,
    DistanceOverflowError,
    EMPTY_SOLUTION,
    Instance,
    InvalidInstanceError,
    MetricClosure,
    ball,
    canonical_solution,
    instance_from_json,
    instance_to_json,
    is_covering_global,
    load_instance,
    metric_closure,
    permute_instance,
    remove_client,
    save_instance,
    solution_cost,
)
from .treedecomp import (
    NiceTreeDecomposition,
    TreeDecomposition,
    load_td,
    min_fill_heuristic,
    nicify,
    save_td,
    subtree_vertices,
    validate_td,
)
from .dp import (
    DOWN,
    UP,
    DpEntry,
    SolveResult,
    SolveTimeout,
    TableLimitExceeded,
    TupleKey,
    border_vertex,
    contributor_sets,
    excess_coverage,
    is_feasible_for,
    remaining_clients,
    solve,
)
from .oracle import (
    CnfFormula,
    WorkLimitExceeded,
    brute_force_msrdc,
    brute_force_sat,
    cnf_from_dimacs,
    cnf_to_dimacs,
    load_cnf,
    save_cnf,
)
from .generators import (
    gen_partial_ktree,
    gen_random_3sat,
    gen_random_connected,
    gen_random_tree,
    sat_to_msra,
)

__version__ = "0.1.0"
