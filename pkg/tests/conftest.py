import itertools
import random

import pytest

from msrdc.dp import is_feasible_for
from msrdc.instance import CostFn, Instance


def make_instance(n, edges, clients, facilities, k, cost=None):
    return Instance(
        vertex_count=n,
        edges=tuple(edges),
        clients=frozenset(clients),
        facilities=frozenset(facilities),
        k=k,
        cost_fn=cost or CostFn("identity"),
    )


def exact_treewidth(n, edges):
    """Min over all elimination orders of the max degree at elimination time."""
    base = [set() for _ in range(n)]
    for u, v in edges:
        base[u].add(v)
        base[v].add(u)
    best = n
    for order in itertools.permutations(range(n)):
        nbrs = [set(s) for s in base]
        width = 0
        for v in order:
            width = max(width, len(nbrs[v]))
            if width >= best:
                break
            nv = list(nbrs[v])
            for a in nv:
                for b in nv:
                    if a != b:
                        nbrs[a].add(b)
            for a in nv:
                nbrs[a].discard(v)
            nbrs[v] = set()
        best = min(best, width)
    return best


def entry_reference(ctx, key, closure):
    """Cheapest feasible solution for a key by exhaustive enumeration.

    Independent of the table machinery: builds every set of at most `budget`
    (facility, radius) pairs over the subtree facilities and checks it with
    the definition-level feasibility predicate.
    """
    ft = sorted(ctx.subtree_facilities(key.node))
    pairs = [(f, r) for f in ft for r in closure.candidate_radii]
    best = None
    for size in range(0, key.budget + 1):
        for combo in itertools.combinations(pairs, size):
            if is_feasible_for(combo, key, ctx):
                c = sum(ctx.g[r] for _, r in combo)
                if best is None or c < best:
                    best = c
    return best


def random_connected_edges(rng, n, weight_lo, weight_hi, extra_prob=0.25):
    edges = {}
    for v in range(1, n):
        edges[(rng.randrange(v), v)] = rng.randint(weight_lo, weight_hi)
    for a in range(n):
        for b in range(a + 1, n):
            if (a, b) not in edges and rng.random() < extra_prob:
                edges[(a, b)] = rng.randint(weight_lo, weight_hi)
    return [(a, b, w) for (a, b), w in sorted(edges.items())]


@pytest.fixture
def rng():
    return random.Random(12345)
