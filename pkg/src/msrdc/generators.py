"""Reproducible instance families for tests and benchmarks."""

from __future__ import annotations

import random

from .instance import CostFn, Instance
from .oracle import CnfFormula
from .treedecomp import TreeDecomposition


def sat_to_msra(cnf: CnfFormula) -> Instance:
    """Build the assignment-variant clustering instance for a CNF formula.

    Vertices: positive literal of variable i at 2(i-1), negative at 2(i-1)+1,
    a middle vertex y_i per variable at 2n+(i-1), and one vertex per clause at
    3n+(j-1).  Both literals of variable i connect to y_i, and every literal
    connects to the clauses containing it; all edges incident to variable i's
    literals get weight 2^(i-1).  Facilities are the 2n literal vertices,
    every vertex is a client, k = 2n, and the cost of a ball is its radius.

    The formula is satisfiable iff the optimum is exactly 2^n - 1; otherwise
    every cover costs at least 2^n.

    Consecutive y vertices are additionally linked by weight-2^n edges so the
    graph is connected even when clauses do not tie all variables together.
    Balls cheaper than 2^n can never cross such an edge, so these links change
    neither the threshold nor the optimum values.
    """
    n = cnf.num_vars
    m = len(cnf.clauses)

    def pos(i):  # 1-based variable index
        return 2 * (i - 1)

    def neg(i):
        return 2 * (i - 1) + 1

    def mid(i):
        return 2 * n + (i - 1)

    def cls(j):  # 0-based clause index
        return 3 * n + j

    edges = set()
    for i in range(1, n + 1):
        w = 1 << (i - 1)
        edges.add((pos(i), mid(i), w))
        edges.add((neg(i), mid(i), w))
    for j, clause in enumerate(cnf.clauses):
        for lit in clause:
            i = abs(lit)
            v = pos(i) if lit > 0 else neg(i)
            edges.add((v, cls(j), 1 << (i - 1)))
    for i in range(1, n):
        edges.add((mid(i), mid(i + 1), 1 << n))

    return Instance(
        vertex_count=3 * n + m,
        edges=tuple(sorted(edges)),
        clients=frozenset(range(3 * n + m)),
        facilities=frozenset(range(2 * n)),
        k=2 * n,
        cost_fn=CostFn("identity"),
    )


def _sample_roles(rng: random.Random, n: int, client_ratio: float):
    """Split vertices into clients/facilities; both sets are kept non-empty."""
    clients, facilities = set(), set()
    for v in range(n):
        if rng.random() < client_ratio:
            clients.add(v)
        else:
            facilities.add(v)
    if not facilities:
        facilities.add(0)
    if not clients:
        clients.add(0)
    return frozenset(clients), frozenset(facilities)


def gen_random_tree(
    n: int,
    weight_range=(1, 10),
    client_facility_ratio: float = 0.5,
    seed: int = 0,
    k: int | None = None,
    cost_fn: CostFn | None = None,
) -> Instance:
    """Random-attachment tree with sampled vertex roles; deterministic in seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    lo, hi = weight_range
    edges = []
    for v in range(1, n):
        parent = rng.randrange(v)
        edges.append((parent, v, rng.randint(lo, hi)))
    clients, facilities = _sample_roles(rng, n, client_facility_ratio)
    return Instance(
        vertex_count=n,
        edges=tuple(edges),
        clients=clients,
        facilities=facilities,
        k=k if k is not None else max(1, n // 4),
        cost_fn=cost_fn if cost_fn is not None else CostFn("identity"),
    )


def gen_partial_ktree(
    n: int,
    width_target: int,
    edge_keep_prob: float = 1.0,
    weight_range=(1, 10),
    seed: int = 0,
    client_facility_ratio: float = 0.5,
    k: int | None = None,
    cost_fn: CostFn | None = None,
):
    """Random partial k-tree plus the natural width-`width_target` decomposition.

    Builds a k-tree by repeatedly attaching a fresh vertex to a random
    k-clique, then drops each non-spanning-tree edge with probability
    1 - edge_keep_prob (a spanning tree is always kept, so the graph stays
    connected).  The returned decomposition has one bag per attachment and is
    valid for any subgraph of the k-tree.
    """
    w = width_target
    if w < 1:
        raise ValueError("width_target must be at least 1")
    if n <= w:
        raise ValueError("n must exceed width_target")
    rng = random.Random(seed)

    base = list(range(w + 1))
    cliques = []
    for skip in base:
        cliques.append(tuple(v for v in base if v != skip))
    all_edges = {(a, b) for ia, a in enumerate(base) for b in base[ia + 1:]}
    tree_edges = {(v - 1, v) for v in range(1, w + 1)}
    attach = {}
    for v in range(w + 1, n):
        q = cliques[rng.randrange(len(cliques))]
        attach[v] = q
        for u in q:
            all_edges.add((u, v))
        tree_edges.add((min(q), v))
        for skip in q:
            cliques.append(tuple(sorted([x for x in q if x != skip] + [v])))

    kept = []
    for a, b in sorted(all_edges):
        if (a, b) in tree_edges or rng.random() < edge_keep_prob:
            kept.append((a, b, rng.randint(*weight_range)))
    clients, facilities = _sample_roles(rng, n, client_facility_ratio)
    inst = Instance(
        vertex_count=n,
        edges=tuple(kept),
        clients=clients,
        facilities=facilities,
        k=k if k is not None else max(1, n // 4),
        cost_fn=cost_fn if cost_fn is not None else CostFn("identity"),
    )

    bags = [frozenset(base)]
    td_edges = []
    node_of = {v: 0 for v in base}
    for v in range(w + 1, n):
        bags.append(frozenset(attach[v]) | {v})
        idx = len(bags) - 1
        node_of[v] = idx
        td_edges.append((node_of[max(attach[v])], idx))
    td = TreeDecomposition(vertex_count=n, bags=tuple(bags), edges=tuple(td_edges))
    return inst, td


def gen_random_3sat(n: int, m: int, seed: int = 0, force_positive: bool = False) -> CnfFormula:
    """m random clauses over min(n, 3) distinct variables each."""
    if n < 1 or m < 1:
        raise ValueError("need n >= 1 and m >= 1")
    rng = random.Random(seed)
    width = min(n, 3)
    clauses = []
    for _ in range(m):
        variables = rng.sample(range(1, n + 1), width)
        clause = tuple(
            v if force_positive or rng.random() < 0.5 else -v for v in variables
        )
        clauses.append(clause)
    return CnfFormula(num_vars=n, clauses=tuple(clauses))


def gen_random_connected(
    n: int,
    extra_edge_prob: float = 0.2,
    weight_range=(0, 8),
    client_facility_overlap: float = 0.3,
    seed: int = 0,
    k: int = 2,
    cost_fn: CostFn | None = None,
) -> Instance:
    """Random connected graph: a random spanning tree plus extra chords.

    Every vertex is a client, a facility, or both (overlap probability per
    vertex), and at least one edge weight is forced positive so the metric is
    not identically zero.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    lo, hi = weight_range
    edges = {}
    for v in range(1, n):
        edges[(rng.randrange(v), v)] = rng.randint(lo, hi)
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.random() < extra_edge_prob:
                edges[(a, b)] = rng.randint(lo, hi)
    if edges and all(w == 0 for w in edges.values()):
        key = sorted(edges)[rng.randrange(len(edges))]
        edges[key] = rng.randint(max(lo, 1), max(hi, 1))
    clients, facilities = set(), set()
    for v in range(n):
        u = rng.random()
        if u < client_facility_overlap:
            clients.add(v)
            facilities.add(v)
        elif u < client_facility_overlap + (1 - client_facility_overlap) / 2:
            clients.add(v)
        else:
            facilities.add(v)
    if not facilities:
        facilities.add(0)
    if not clients:
        clients.add(0)
    return Instance(
        vertex_count=n,
        edges=tuple((a, b, w) for (a, b), w in sorted(edges.items())),
        clients=frozenset(clients),
        facilities=frozenset(facilities),
        k=k,
        cost_fn=cost_fn if cost_fn is not None else CostFn("identity"),
    )
