"""Problem model: weighted graphs, shortest-path metric, cost functions, solutions.

An instance is an edge-weighted connected graph over vertices 0..n-1 together
with a client set, a facility set, a budget k and a cost function on radii.
All weights are non-negative integers, so every distance, radius and (for the
identity/power cost variants) cost is an exact integer.  Zero edge weights are
allowed: the shortest-path "metric" may be a pseudometric with distinct
vertices at distance 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

# Largest total path weight we allow.  Distances live in int64 arrays; keeping
# everything below 2**61 leaves room for sums of two distances.
MAX_TOTAL_WEIGHT = 1 << 61

# A solution is a tuple of (facility, radius) pairs; the empty tuple is the
# empty solution with cost 0.
Solution = tuple[tuple[int, int], ...]
EMPTY_SOLUTION: Solution = ()


class InvalidInstanceError(ValueError):
    """Raised when an instance fails structural validation."""


class DistanceOverflowError(OverflowError):
    """Raised when path weights could exceed the supported integer range."""


def canonical_solution(sol) -> Solution:
    """Sort the (facility, radius) pairs; used for deterministic tie-breaking."""
    return tuple(sorted((int(f), int(r)) for f, r in sol))


@dataclass(frozen=True)
class CostFn:
    """Non-decreasing cost g(radius).

    variant is one of "identity", "power" (with integer alpha >= 1) or
    "table" (explicit radius -> cost map covering every candidate radius).
    """

    variant: str = "identity"
    alpha: int | None = None
    table: dict | None = None

    def __post_init__(self):
        if self.variant == "identity":
            if self.alpha is not None or self.table is not None:
                raise InvalidInstanceError("identity cost takes no parameters")
        elif self.variant == "power":
            if not isinstance(self.alpha, int) or isinstance(self.alpha, bool) or self.alpha < 1:
                raise InvalidInstanceError("power cost needs integer alpha >= 1")
            if self.table is not None:
                raise InvalidInstanceError("power cost takes no table")
        elif self.variant == "table":
            if not isinstance(self.table, dict) or not self.table:
                raise InvalidInstanceError("table cost needs a non-empty radius->cost map")
            if self.alpha is not None:
                raise InvalidInstanceError("table cost takes no alpha")
            for r, c in self.table.items():
                if not isinstance(r, int) or isinstance(r, bool) or r < 0:
                    raise InvalidInstanceError("table radii must be non-negative integers")
                if not isinstance(c, (int, float)) or isinstance(c, bool) or c < 0:
                    raise InvalidInstanceError("table costs must be non-negative numbers")
        else:
            raise InvalidInstanceError(f"unknown cost variant {self.variant!r}")

    def __call__(self, radius: int):
        if self.variant == "identity":
            return radius
        if self.variant == "power":
            return radius ** self.alpha
        try:
            return self.table[radius]
        except KeyError:
            raise InvalidInstanceError(f"cost table has no entry for radius {radius}") from None

    def validate_against(self, candidate_radii) -> None:
        """Check the cost is defined and non-decreasing over the candidate radii."""
        prev = None
        for r in sorted(candidate_radii):
            c = self(r)
            if prev is not None and c < prev:
                raise InvalidInstanceError(
                    f"cost function decreases at radius {r}: {c} < {prev}"
                )
            prev = c

    def to_json_obj(self) -> dict:
        if self.variant == "identity":
            return {"variant": "identity"}
        if self.variant == "power":
            return {"variant": "power", "alpha": self.alpha}
        return {"variant": "table", "table": {str(r): c for r, c in sorted(self.table.items())}}

    @staticmethod
    def from_json_obj(obj) -> "CostFn":
        if not isinstance(obj, dict):
            raise InvalidInstanceError("cost must be an object")
        allowed = {"variant", "alpha", "table"}
        unknown = set(obj) - allowed
        if unknown:
            raise InvalidInstanceError(f"unknown cost fields: {sorted(unknown)}")
        variant = obj.get("variant")
        if variant == "identity":
            return CostFn("identity")
        if variant == "power":
            return CostFn("power", alpha=obj.get("alpha"))
        if variant == "table":
            raw = obj.get("table")
            if not isinstance(raw, dict):
                raise InvalidInstanceError("table cost needs a table object")
            table = {}
            for key, val in raw.items():
                try:
                    r = int(key)
                except ValueError:
                    raise InvalidInstanceError(f"bad table radius {key!r}") from None
                table[r] = val
            return CostFn("table", table=table)
        raise InvalidInstanceError(f"unknown cost variant {variant!r}")


@dataclass(frozen=True)
class Instance:
    """A connected edge-weighted graph with clients, facilities and budget."""

    vertex_count: int
    edges: tuple  # ((u, v, w), ...)
    clients: frozenset
    facilities: frozenset
    k: int
    cost_fn: CostFn = field(default_factory=CostFn)

    def __post_init__(self):
        normalized = []
        for e in self.edges:
            if len(e) != 3:
                raise InvalidInstanceError(f"edge {e!r} must be (u, v, w)")
            u, v, w = e
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in (u, v, w)):
                raise InvalidInstanceError(f"edge {e!r} must hold plain integers")
            normalized.append((min(u, v), max(u, v), w))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))
        object.__setattr__(self, "clients", frozenset(self.clients))
        object.__setattr__(self, "facilities", frozenset(self.facilities))
        validate_instance(self)


def validate_instance(inst: Instance) -> None:
    """Raise InvalidInstanceError unless the instance is well formed and connected."""
    n = inst.vertex_count
    if not isinstance(n, int) or isinstance(n, bool) or n <= 0:
        raise InvalidInstanceError("vertex_count must be a positive integer")
    total_weight = 0
    adj = [[] for _ in range(n)]
    for e in inst.edges:
        if len(e) != 3:
            raise InvalidInstanceError(f"edge {e!r} must be (u, v, w)")
        u, v, w = e
        for x in (u, v):
            if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < n:
                raise InvalidInstanceError(f"edge {e!r} has invalid endpoint")
        if u == v:
            raise InvalidInstanceError(f"self-loop at vertex {u}")
        if not isinstance(w, int) or isinstance(w, bool) or w < 0:
            raise InvalidInstanceError(f"edge {e!r} needs a non-negative integer weight")
        total_weight += w
        adj[u].append(v)
        adj[v].append(u)
    if total_weight >= MAX_TOTAL_WEIGHT:
        raise DistanceOverflowError("total edge weight exceeds supported distance range")
    for name, group in (("client", inst.clients), ("facility", inst.facilities)):
        for x in group:
            if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x < n:
                raise InvalidInstanceError(f"{name} {x!r} is not a vertex")
    if not isinstance(inst.k, int) or isinstance(inst.k, bool) or inst.k < 0:
        raise InvalidInstanceError("k must be a non-negative integer")
    # connectivity (zero-weight edges still connect)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    if count != n:
        witness = seen.index(False)
        raise InvalidInstanceError(f"graph is disconnected (vertex {witness} unreachable from 0)")


@dataclass(frozen=True)
class MetricClosure:
    """All-pairs shortest-path distances plus the sorted set of candidate radii."""

    dist: np.ndarray
    candidate_radii: tuple

    def d(self, u: int, v: int) -> int:
        return int(self.dist[u, v])


def metric_closure(inst: Instance) -> MetricClosure:
    """All-pairs shortest paths by cubic relaxation (|V| is small by design)."""
    n = inst.vertex_count
    inf = MAX_TOTAL_WEIGHT
    dist = np.full((n, n), inf, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    for u, v, w in inst.edges:
        if w < dist[u, v]:
            dist[u, v] = w
            dist[v, u] = w
    for m in range(n):
        via = dist[:, m, None] + dist[None, m, :]
        np.minimum(dist, via, out=dist)
    if dist.max() >= inf:
        # unreachable despite validation; defensive
        raise InvalidInstanceError("graph is disconnected")
    dist.setflags(write=False)
    radii = tuple(int(r) for r in np.unique(dist))
    return MetricClosure(dist=dist, candidate_radii=radii)


def ball(closure: MetricClosure, clients, center: int, radius: int) -> frozenset:
    """Clients within the given distance of the center."""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    row = closure.dist[center]
    return frozenset(c for c in clients if row[c] <= radius)


def solution_cost(sol, cost_fn: CostFn):
    """Sum of g(radius) over all opened (facility, radius) pairs."""
    return sum(cost_fn(r) for _, r in sol)


def is_covering_global(sol, inst: Instance, closure: MetricClosure) -> bool:
    """True iff every client lies inside some opened ball."""
    for c in inst.clients:
        row = closure.dist[c]
        if not any(row[f] <= r for f, r in sol):
            return False
    return True


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

_INSTANCE_FIELDS = ("vertices", "clients", "facilities", "edges", "k", "cost")


def instance_to_json_obj(inst: Instance) -> dict:
    return {
        "vertices": inst.vertex_count,
        "clients": sorted(inst.clients),
        "facilities": sorted(inst.facilities),
        "edges": [list(e) for e in sorted((min(u, v), max(u, v), w) for u, v, w in inst.edges)],
        "k": inst.k,
        "cost": inst.cost_fn.to_json_obj(),
    }


def instance_to_json(inst: Instance) -> str:
    return json.dumps(instance_to_json_obj(inst), indent=2) + "\n"


def instance_from_json_obj(obj) -> Instance:
    if not isinstance(obj, dict):
        raise InvalidInstanceError("instance must be a JSON object")
    unknown = set(obj) - set(_INSTANCE_FIELDS)
    if unknown:
        raise InvalidInstanceError(f"unknown instance fields: {sorted(unknown)}")
    missing = set(_INSTANCE_FIELDS) - set(obj)
    if missing:
        raise InvalidInstanceError(f"missing instance fields: {sorted(missing)}")
    return Instance(
        vertex_count=obj["vertices"],
        edges=tuple(tuple(e) for e in obj["edges"]),
        clients=frozenset(obj["clients"]),
        facilities=frozenset(obj["facilities"]),
        k=obj["k"],
        cost_fn=CostFn.from_json_obj(obj["cost"]),
    )


def instance_from_json(text: str) -> Instance:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"bad JSON: {exc}") from None
    return instance_from_json_obj(obj)


def load_instance(path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_json(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(instance_to_json(inst))


# ---------------------------------------------------------------------------
# Instance transformations
# ---------------------------------------------------------------------------

def permute_instance(inst: Instance, perm) -> Instance:
    """Relabel vertices: new id of vertex v is perm[v]."""
    if sorted(perm) != list(range(inst.vertex_count)):
        raise ValueError("perm must be a permutation of the vertex ids")
    return Instance(
        vertex_count=inst.vertex_count,
        edges=tuple((perm[u], perm[v], w) for u, v, w in inst.edges),
        clients=frozenset(perm[c] for c in inst.clients),
        facilities=frozenset(perm[f] for f in inst.facilities),
        k=inst.k,
        cost_fn=inst.cost_fn,
    )


def remove_client(inst: Instance, client: int) -> Instance:
    if client not in inst.clients:
        raise ValueError(f"{client} is not a client")
    return replace(inst, clients=inst.clients - {client})


def contract_zero_distance_classes(inst: Instance, closure: MetricClosure):
    """Merge vertices at shortest-path distance 0 into single representatives.

    Balls, coverage and costs depend only on distances, and vertices at
    distance 0 are interchangeable, so the contracted instance has the same
    optimal cost.  Contracting also restores d(u, v) > 0 for distinct
    vertices, which the forget step of the tree DP relies on.

    Returns (contracted instance, class_of) where class_of[v] is the new id of
    original vertex v.  The representative of a class is its smallest member;
    when lifting a solution back, a facility class maps to its smallest
    original facility member.
    """
    n = inst.vertex_count
    class_of = [-1] * n
    reps = []
    for v in range(n):
        if class_of[v] >= 0:
            continue
        cid = len(reps)
        members = np.nonzero(closure.dist[v] == 0)[0]
        for u in members:
            class_of[int(u)] = cid
        reps.append(int(members[0]))
    if len(reps) == n:
        return inst, list(range(n))
    edges = {}
    for u, v, w in inst.edges:
        cu, cv = class_of[u], class_of[v]
        if cu == cv:
            continue
        key = (min(cu, cv), max(cu, cv))
        if key not in edges or w < edges[key]:
            edges[key] = w
    contracted = Instance(
        vertex_count=len(reps),
        edges=tuple((u, v, w) for (u, v), w in sorted(edges.items())),
        clients=frozenset(class_of[c] for c in inst.clients),
        facilities=frozenset(class_of[f] for f in inst.facilities),
        k=inst.k,
        cost_fn=inst.cost_fn,
    )
    return contracted, class_of


def zero_class_facility_map(inst: Instance, class_of) -> dict:
    """Map each contracted facility id to its smallest original facility."""
    mapping = {}
    for f in sorted(inst.facilities, reverse=True):
        mapping[class_of[f]] = f
    return mapping
