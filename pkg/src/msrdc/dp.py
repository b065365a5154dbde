"""Bottom-up dynamic program over a nice tree decomposition.

State: one entry per (node t, vector c of vertices indexed by the bag, vector
of directions in {UP, DOWN} indexed by the bag, budget k').  A DOWN coordinate
promises that the solution outside the subtree covers a ball of radius
d(v, c_v) around bag vertex v; an UP coordinate requires the subtree solution
to certify excess coverage of at least d(v, c_v) around v.  An entry stores
the cheapest solution for the subtree that covers every subtree client not
excused by a DOWN promise and meets all UP requirements, or NIL.

The excess certified at v by a solution S under a key is

    e_v = max( max_{(f,r) in S} r - d(f, v),
               max_{w: dir_w = DOWN} d(w, c_w) - d(w, v) )

with -infinity for empty maxima.  Feasibility demands e_v >= d(v, c_v) for
every bag vertex v (DOWN coordinates meet this by themselves).

Keys enter the table through an exact quotient: every formula above consumes
c_v only via the distance d(v, c_v), so c_v ranges over one representative
vertex per distinct distance from v (the smallest vertex id at each value).
Entries of merged keys are identical by definition, so nothing is lost.

Node tables are filled by four handlers (leaf / introduce / forget / join).
Introduce and join scan candidate solutions per key in (cost, solution) order;
those scans are the hot path and run in the compiled backend when available
(see kernels).  Forget is a pure index-gather and is vectorized with numpy.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .instance import (
    EMPTY_SOLUTION,
    Instance,
    MetricClosure,
    canonical_solution,
    contract_zero_distance_classes,
    metric_closure,
    solution_cost,
    zero_class_facility_map,
)
from .treedecomp import (
    FORGET,
    INTRODUCE,
    JOIN,
    LEAF,
    NiceTreeDecomposition,
    TreeDecomposition,
    min_fill_heuristic,
    nice_violations,
    nicify,
    validate_td,
)

UP = "up"
DOWN = "down"

NEG_EXC = -(1 << 62)  # sentinel for an empty excess maximum
INF_I64 = 1 << 62


class SolveTimeout(RuntimeError):
    pass


class TableLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class TupleKey:
    """DP index: node, per-bag-vertex target vertices, directions, budget."""

    node: int
    c: tuple
    dirs: tuple
    budget: int


@dataclass(frozen=True)
class DpEntry:
    solution: tuple | None  # (facility, radius) pairs, sorted; None = NIL
    value: object  # cost, or infinity for NIL


@dataclass
class _PoolEntry:
    canon: tuple  # sorted (facility, radius) pairs
    cost: object
    cov: int  # client bitmask


class DpContext:
    """Shared read-only data for one DP run."""

    def __init__(self, inst: Instance, closure: MetricClosure, ntd: NiceTreeDecomposition):
        self.instance = inst
        self.closure = closure
        self.ntd = ntd
        self.dist = closure.dist
        self.dist_list = [[int(x) for x in row] for row in closure.dist]
        self.clients = sorted(inst.clients)
        self.client_index = {c: i for i, c in enumerate(self.clients)}
        self.mask_dtype = np.uint64 if len(self.clients) <= 64 else object

        self.g = {r: inst.cost_fn(r) for r in closure.candidate_radii}
        gvals = list(self.g.values())
        if all(isinstance(v, int) for v in gvals):
            bound = (max(gvals) if gvals else 0) * max(inst.k, 1)
            self.cost_dtype = np.int64 if bound < (1 << 61) else object
        else:
            self.cost_dtype = np.float64
        if self.cost_dtype is object:
            self.inf_cost = float("inf")
        elif self.cost_dtype is np.float64:
            self.inf_cost = np.inf
        else:
            self.inf_cost = INF_I64

        self._reps = {}
        self._ballvec = {}
        self.tables = [None] * ntd.node_count
        self.feasibility_checks = 0
        self.per_node_checks = [0] * ntd.node_count

    # -- per-vertex candidate-value tables -------------------------------

    def reps(self, v: int):
        """Distinct distances from v and the smallest vertex at each distance."""
        cached = self._reps.get(v)
        if cached is None:
            row = self.dist_list[v]
            by_dist = {}
            for q in range(self.instance.vertex_count):
                d = row[q]
                if d not in by_dist or q < by_dist[d]:
                    by_dist[d] = q
            dvals = sorted(by_dist)
            cached = (
                np.array(dvals, dtype=np.int64),
                tuple(by_dist[d] for d in dvals),
            )
            self._reps[v] = cached
        return cached

    def ballvec(self, v: int):
        """ballvec(v)[j] = client mask within distance reps(v)[0][j] of v."""
        cached = self._ballvec.get(v)
        if cached is None:
            dvals, _ = self.reps(v)
            row = self.dist_list[v]
            masks = []
            for d in dvals.tolist():
                m = 0
                for c in self.clients:
                    if row[c] <= d:
                        m |= 1 << self.client_index[c]
                masks.append(m)
            cached = np.array(masks, dtype=self.mask_dtype)
            self._ballvec[v] = cached
        return cached

    def client_mask(self, vertices) -> int:
        m = 0
        for c in vertices:
            i = self.client_index.get(c)
            if i is not None:
                m |= 1 << i
        return m

    def subtree_clients(self, node: int) -> frozenset:
        return self.ntd.subtree[node] & self.instance.clients

    def subtree_facilities(self, node: int) -> frozenset:
        return self.ntd.subtree[node] & self.instance.facilities


class DpTable:
    """Per-node table: entries for every (c, dirs, budget) key of the node.

    Keys are flattened as ((dirs_code * CGRID + c_code) * (k+1)) + budget with
    the first bag position as the most significant digit/bit.
    """

    def __init__(self, ctx: DpContext, node: int):
        self.ctx = ctx
        self.node = node
        self.bag = tuple(sorted(ctx.ntd.bags[node]))
        self.b = len(self.bag)
        if self.b > 20:
            raise TableLimitExceeded(f"bag of size {self.b} at node {node} is not tractable")
        self.dvals = [ctx.reps(v)[0] for v in self.bag]
        self.dreps = [ctx.reps(v)[1] for v in self.bag]
        self.sizes = [len(d) for d in self.dvals]
        self.cgrid = 1
        for s in self.sizes:
            self.cgrid *= s
        self.ndirs = 1 << self.b
        self.kplus1 = ctx.instance.k + 1
        self.nkeys = self.cgrid * self.ndirs * self.kplus1
        self.cost = None  # np array [nkeys]
        self.sol = None  # np int32 [nkeys], pool id or -1
        self.pool: list[_PoolEntry] = []
        self.budget_solutions: list[list[int]] = []  # per budget: pool ids, (cost, canon) sorted

    # -- key arithmetic ---------------------------------------------------

    def flat_index(self, key: TupleKey) -> int:
        if key.node != self.node or len(key.c) != self.b or len(key.dirs) != self.b:
            raise ValueError("key does not match this table")
        if not 0 <= key.budget < self.kplus1:
            raise ValueError("budget out of range")
        c_code = 0
        for pos in range(self.b):
            d = self.ctx.dist_list[self.bag[pos]][key.c[pos]]
            ci = int(np.searchsorted(self.dvals[pos], d))
            c_code = c_code * self.sizes[pos] + ci
        dirs_code = 0
        for pos in range(self.b):
            dirs_code = (dirs_code << 1) | (1 if key.dirs[pos] == DOWN else 0)
        return (dirs_code * self.cgrid + c_code) * self.kplus1 + key.budget

    def key_at(self, flat: int) -> TupleKey:
        budget = flat % self.kplus1
        rest = flat // self.kplus1
        c_code = rest % self.cgrid
        dirs_code = rest // self.cgrid
        c = [0] * self.b
        for pos in range(self.b - 1, -1, -1):
            c[pos] = self.dreps[pos][c_code % self.sizes[pos]]
            c_code //= self.sizes[pos]
        dirs = tuple(
            DOWN if (dirs_code >> (self.b - 1 - pos)) & 1 else UP for pos in range(self.b)
        )
        return TupleKey(self.node, tuple(c), dirs, budget)

    def entry(self, key: TupleKey) -> DpEntry:
        return self.entry_at(self.flat_index(key))

    def entry_at(self, flat: int) -> DpEntry:
        if self.cost is None:
            raise RuntimeError("table arrays were released; solve with collect_tables=True")
        sid = int(self.sol[flat])
        if sid < 0:
            return DpEntry(None, self.ctx.inf_cost)
        c = self.cost[flat]
        return DpEntry(self.pool[sid].canon, c if isinstance(c, (int, float)) else c.item())

    def iter_entries(self):
        for flat in range(self.nkeys):
            yield self.key_at(flat), self.entry_at(flat)

    def release(self):
        self.cost = None
        self.sol = None

    # -- helpers for handlers --------------------------------------------

    def collect_budget_solutions(self):
        """Distinct stored solutions per budget, (cost, canon)-sorted pool ids."""
        out = []
        for kp in range(self.kplus1):
            ids = np.unique(self.sol[kp :: self.kplus1])
            ids = [int(i) for i in ids if i >= 0]
            ids.sort(key=lambda i: (self.pool[i].cost, self.pool[i].canon))
            out.append(ids)
        self.budget_solutions = out


# ---------------------------------------------------------------------------
# Definitional operations (also used as the reference for the scan backends)
# ---------------------------------------------------------------------------

def remaining_clients(key: TupleKey, ctx: DpContext) -> frozenset:
    """Subtree clients not inside any DOWN coordinate's promised ball."""
    bag = tuple(sorted(ctx.ntd.bags[key.node]))
    rem = set(ctx.subtree_clients(key.node))
    for pos, v in enumerate(bag):
        if key.dirs[pos] == DOWN:
            radius = ctx.dist_list[v][key.c[pos]]
            row = ctx.dist_list[v]
            rem = {c for c in rem if row[c] > radius}
    return frozenset(rem)


def excess_coverage(v: int, key: TupleKey, sol, ctx: DpContext):
    """Largest radius around v certified by sol plus incoming DOWN promises."""
    bag = tuple(sorted(ctx.ntd.bags[key.node]))
    row_v = ctx.dist_list[v]
    best = float("-inf")
    for f, r in sol:
        val = r - row_v[f]
        if val > best:
            best = val
    for pos, w in enumerate(bag):
        if key.dirs[pos] == DOWN:
            val = ctx.dist_list[w][key.c[pos]] - ctx.dist_list[w][v]
            if val > best:
                best = val
    return best


def border_vertex(v: int, key: TupleKey, sol, ctx: DpContext) -> int:
    """Farthest client-or-facility within the excess radius of v; min id on ties."""
    e = excess_coverage(v, key, sol, ctx)
    if e < 0:
        raise ValueError(f"excess coverage at {v} is negative")
    row = ctx.dist_list[v]
    best_d, best_q = -1, -1
    for q in sorted(ctx.instance.clients | ctx.instance.facilities):
        if row[q] <= e and row[q] > best_d:
            best_d, best_q = row[q], q
    if best_q < 0:
        raise ValueError("no client or facility within the excess radius")
    return best_q


def contributor_sets(v: int, key: TupleKey, sol, ctx: DpContext):
    """The facilities / DOWN bag vertices achieving the excess maximum at v."""
    e = excess_coverage(v, key, sol, ctx)
    bag = tuple(sorted(ctx.ntd.bags[key.node]))
    row_v = ctx.dist_list[v]
    fv = frozenset(f for f, r in sol if r - row_v[f] == e)
    cv = frozenset(
        w
        for pos, w in enumerate(bag)
        if key.dirs[pos] == DOWN and ctx.dist_list[w][key.c[pos]] - ctx.dist_list[w][v] == e
    )
    return fv, cv


def is_feasible_for(sol, key: TupleKey, ctx: DpContext) -> bool:
    """Coverage of the remaining clients plus all per-vertex excess requirements."""
    ft = ctx.subtree_facilities(key.node)
    for f, _r in sol:
        if f not in ft:
            raise ValueError(f"facility {f} is outside the subtree of node {key.node}")
    if len(sol) > key.budget:
        raise ValueError("solution exceeds the key budget")
    for c in remaining_clients(key, ctx):
        row = ctx.dist_list[c]
        if not any(row[f] <= r for f, r in sol):
            return False
    bag = tuple(sorted(ctx.ntd.bags[key.node]))
    for pos, v in enumerate(bag):
        if excess_coverage(v, key, sol, ctx) < ctx.dist_list[v][key.c[pos]]:
            return False
    return True


# ---------------------------------------------------------------------------
# Grid preparation shared by both scan backends
# ---------------------------------------------------------------------------

def _broadcast(arr: np.ndarray, pos: int, shape):
    view = [1] * len(shape)
    view[pos] = shape[pos]
    return arr.reshape(view)


def _node_grids(ctx: DpContext, table: DpTable):
    """Per-(dirs, c) data: remaining-client mask, required-excess positions/values.

    req[pos] is d(bag[pos], c_pos) for every c; need bit `pos` is set when the
    DOWN promises alone do not already certify that requirement, i.e. the
    candidate solution itself must provide the excess at that position.
    """
    b, sizes, cgrid, ndirs = table.b, table.sizes, table.cgrid, table.ndirs
    shape = tuple(sizes) if b else (1,)
    ct_mask = ctx.client_mask(ctx.subtree_clients(table.node))

    req = np.zeros((max(b, 1), cgrid), dtype=np.int64)
    for pos in range(b):
        req[pos] = np.broadcast_to(_broadcast(table.dvals[pos], pos, shape), shape).ravel()
    crem = np.empty((ndirs, cgrid), dtype=ctx.mask_dtype)
    need = np.zeros((ndirs, cgrid), dtype=np.uint32)
    ballvecs = [ctx.ballvec(v) for v in table.bag]
    dmat = [[ctx.dist_list[u][v] for v in table.bag] for u in table.bag]

    for dirs_code in range(ndirs):
        down = [pos for pos in range(b) if (dirs_code >> (b - 1 - pos)) & 1]
        acc = np.full(shape, ct_mask, dtype=ctx.mask_dtype)
        for w in down:
            acc &= ~_broadcast(ballvecs[w], w, shape)
        crem[dirs_code] = acc.ravel()
        nd = np.zeros(shape, dtype=np.uint32)
        for pos in range(b):
            excd = np.full(shape, NEG_EXC, dtype=np.int64)
            for w in down:
                term = table.dvals[w] - dmat[w][pos]
                np.maximum(excd, _broadcast(term, w, shape), out=excd)
            nd |= (excd.ravel() < req[pos]).reshape(shape).astype(np.uint32) << pos
        need[dirs_code] = nd.ravel()
    return crem, need, req


def _excess_row(ctx: DpContext, bag, sol):
    """Excess certified at each bag position by sol alone; negatives are useless
    (requirements are distances, hence >= 0) and collapse to the sentinel."""
    row = tuple(
        max((r - ctx.dist_list[f][v] for f, r in sol if r >= ctx.dist_list[f][v]),
            default=NEG_EXC)
        for v in bag
    ) if bag else (NEG_EXC,)
    return row


def _candidate_arrays(ctx: DpContext, table: DpTable, rows, id_lists):
    """Flatten per-budget candidate rows into scan arrays.

    rows[i] = (cost, cov, exc_row) for candidate i; id_lists[kp] lists the
    candidate ids usable at budget kp in (cost, canonical-solution) order.
    Candidates sharing (cov, exc_row) behave identically at every key, so only
    the first of each signature survives; the scan picks the first feasible
    candidate, which that dedup cannot change.  Also returns per-budget
    coverage unions and excess maxima for fast NIL rejection.
    """
    b1 = max(table.b, 1)
    deduped = []
    for ids in id_lists:
        seen = set()
        kept = []
        for i in ids:
            sig = (rows[i][1], rows[i][2])
            if sig not in seen:
                seen.add(sig)
                kept.append(i)
        deduped.append(kept)
    total = sum(len(ids) for ids in deduped)
    cost = np.empty(total, dtype=ctx.cost_dtype)
    cov = np.empty(total, dtype=ctx.mask_dtype)
    exc = np.empty((total, b1), dtype=np.int64)
    solid = np.empty(total, dtype=np.int32)
    offsets = np.zeros(len(id_lists) + 1, dtype=np.int64)
    union_cov = np.zeros(len(id_lists), dtype=ctx.mask_dtype)
    max_exc = np.full((len(id_lists), b1), NEG_EXC, dtype=np.int64)
    at = 0
    for kp, ids in enumerate(deduped):
        for i in ids:
            c, cv, er = rows[i]
            cost[at] = c
            cov[at] = cv
            exc[at] = er
            union_cov[kp] |= cv
            np.maximum(max_exc[kp], np.array(er, dtype=np.int64), out=max_exc[kp])
            solid[at] = i
            at += 1
        offsets[kp + 1] = at
    return cost, cov, exc, solid, offsets, union_cov, max_exc


# ---------------------------------------------------------------------------
# Node handlers
# ---------------------------------------------------------------------------

def handle_leaf(node: int, ctx: DpContext) -> None:
    table = DpTable(ctx, node)
    if table.b != 0:
        raise ValueError(f"leaf node {node} has a non-empty bag")
    table.pool = [_PoolEntry(EMPTY_SOLUTION, 0, 0)]
    table.cost = np.zeros(table.nkeys, dtype=ctx.cost_dtype)
    table.sol = np.zeros(table.nkeys, dtype=np.int32)
    table.budget_solutions = [[0] for _ in range(table.kplus1)]
    ctx.tables[node] = table


def handle_introduce(node: int, ctx: DpContext) -> None:
    table = DpTable(ctx, node)
    child = ctx.tables[ctx.ntd.children[node][0]]
    v = ctx.ntd.vertices[node]
    v_is_facility = v in ctx.instance.facilities
    vpos = table.bag.index(v)
    dvals_v, _ = ctx.reps(v)
    ballvec_v = ctx.ballvec(v)

    pool: list[_PoolEntry] = []
    rows = []  # (cost, cov, exc_row) per pool id
    by_canon = {}

    def intern(canon, cost, cov):
        pid = by_canon.get(canon)
        if pid is None:
            pid = len(pool)
            pool.append(_PoolEntry(canon, cost, cov))
            rows.append((cost, cov, _excess_row(ctx, table.bag, canon)))
            by_canon[canon] = pid
        return pid

    id_lists = []
    for kp in range(table.kplus1):
        ids = set()
        for cid in child.budget_solutions[kp]:
            e = child.pool[cid]
            ids.add(intern(e.canon, e.cost, e.cov))
        if v_is_facility and kp >= 1:
            for cid in child.budget_solutions[kp - 1]:
                e = child.pool[cid]
                for j, r in enumerate(dvals_v.tolist()):
                    canon = canonical_solution(e.canon + ((v, r),))
                    ids.add(intern(canon, e.cost + ctx.g[r], e.cov | int(ballvec_v[j])))
        ordered = sorted(ids, key=lambda i: (pool[i].cost, pool[i].canon))
        id_lists.append(ordered)

    crem, need, req = _node_grids(ctx, table)
    cost, cov, exc, solid, offsets, union_cov, max_exc = _candidate_arrays(
        ctx, table, rows, id_lists
    )
    table.cost = np.full(table.nkeys, ctx.inf_cost, dtype=ctx.cost_dtype)
    table.sol = np.full(table.nkeys, -1, dtype=np.int32)
    backend = kernels.select(ctx.mask_dtype, ctx.cost_dtype)
    checks = backend.scan_single(
        crem, need, req, table.kplus1, cost, cov, exc, solid, offsets,
        union_cov, max_exc, table.cost, table.sol,
    )
    ctx.feasibility_checks += checks
    ctx.per_node_checks[node] = checks
    table.pool = pool
    table.collect_budget_solutions()
    ctx.tables[node] = table


def handle_forget(node: int, ctx: DpContext) -> None:
    table = DpTable(ctx, node)
    child = ctx.tables[ctx.ntd.children[node][0]]
    v = ctx.ntd.vertices[node]
    v_is_client = v in ctx.instance.clients
    cpos = child.bag.index(v)
    b, sizes = table.b, table.sizes
    shape = tuple(sizes) if b else (1,)

    # child strides; the forgotten coordinate is (c_v = v, i.e. distance 0,
    # rep index 0), so it contributes nothing to the child c code.
    cstrides = [0] * child.b
    acc = 1
    for pos in range(child.b - 1, -1, -1):
        cstrides[pos] = acc
        acc *= child.sizes[pos]
    ccode = np.zeros(shape, dtype=np.int64)
    for pos in range(b):
        child_pos = pos if pos < cpos else pos + 1
        idx = np.arange(sizes[pos], dtype=np.int64) * cstrides[child_pos]
        ccode = ccode + _broadcast(idx, pos, shape)
    ccode = ccode.ravel()

    # covered_by_down[dirs, c] = v lies inside some DOWN promise of the key
    dmat_v = [ctx.dist_list[w][v] for w in table.bag]
    table.cost = np.empty(table.nkeys, dtype=ctx.cost_dtype)
    table.sol = np.empty(table.nkeys, dtype=np.int32)
    kplus1 = table.kplus1
    for dirs_code in range(table.ndirs):
        down = [pos for pos in range(b) if (dirs_code >> (b - 1 - pos)) & 1]
        if v_is_client:
            covered = np.zeros(shape, dtype=bool)
            for w in down:
                covered |= _broadcast(table.dvals[w] >= dmat_v[w], w, shape)
            covered = covered.ravel()
        else:
            covered = np.ones(table.cgrid, dtype=bool)
        # child dirs code: insert the v bit (UP=0 / DOWN=1) at child position
        high = dirs_code >> (b - cpos)
        low = dirs_code & ((1 << (b - cpos)) - 1)
        cdirs_up = ((high << 1) << (b - cpos)) | low
        cdirs_down = (((high << 1) | 1) << (b - cpos)) | low
        cdirs = np.where(covered, cdirs_down, cdirs_up).astype(np.int64)
        base = (cdirs * child.cgrid + ccode) * kplus1
        for kp in range(kplus1):
            src = base + kp
            dst = slice(
                (dirs_code * table.cgrid) * kplus1 + kp,
                ((dirs_code + 1) * table.cgrid) * kplus1,
                kplus1,
            )
            table.cost[dst] = child.cost[src]
            table.sol[dst] = child.sol[src]
    table.pool = child.pool
    table.collect_budget_solutions()
    ctx.tables[node] = table


def handle_join(node: int, ctx: DpContext) -> None:
    """Combine child entries: the candidates are concatenations of one stored
    solution per child, usable at every budget reachable as k1 + k2.

    Pairs are materialized once per node (cost, cover, excess and canonical
    form are all split-independent), sorted by (cost, canonical solution), and
    scanned like any single candidate list.
    """
    table = DpTable(ctx, node)
    left = ctx.tables[ctx.ntd.children[node][0]]
    right = ctx.tables[ctx.ntd.children[node][1]]
    kmax = table.kplus1 - 1

    def gather(child):
        budgets = {}
        for kp, ids in enumerate(child.budget_solutions):
            for i in ids:
                budgets.setdefault(i, []).append(kp)
        excs = {i: _excess_row(ctx, table.bag, child.pool[i].canon) for i in budgets}
        return budgets, excs

    bud1, excs1 = gather(left)
    bud2, excs2 = gather(right)

    rows = []  # (cost, cov, exc_row) per pair
    pair_src = []  # (left pool id, right pool id)
    pair_kps = []  # sorted budgets where the pair is a legal split
    for i, ks1 in bud1.items():
        e1 = left.pool[i]
        x1 = excs1[i]
        for j, ks2 in bud2.items():
            kps = sorted({a + b for a in ks1 for b in ks2 if a + b <= kmax})
            if not kps:
                continue
            e2 = right.pool[j]
            x2 = excs2[j]
            rows.append((
                e1.cost + e2.cost,
                e1.cov | e2.cov,
                tuple(max(a, b) for a, b in zip(x1, x2)),
            ))
            pair_src.append((i, j))
            pair_kps.append(kps)

    canon_of = [
        canonical_solution(left.pool[i].canon + right.pool[j].canon)
        for i, j in pair_src
    ]
    order = sorted(range(len(rows)), key=lambda r: (rows[r][0], canon_of[r]))
    id_lists = [[] for _ in range(table.kplus1)]
    for r in order:
        for kp in pair_kps[r]:
            id_lists[kp].append(r)

    crem, need, req = _node_grids(ctx, table)
    cost, cov, exc, solid, offsets, union_cov, max_exc = _candidate_arrays(
        ctx, table, rows, id_lists
    )
    table.cost = np.full(table.nkeys, ctx.inf_cost, dtype=ctx.cost_dtype)
    rowsel = np.full(table.nkeys, -1, dtype=np.int32)
    backend = kernels.select(ctx.mask_dtype, ctx.cost_dtype)
    checks = backend.scan_single(
        crem, need, req, table.kplus1, cost, cov, exc, solid, offsets,
        union_cov, max_exc, table.cost, rowsel,
    )
    ctx.feasibility_checks += checks
    ctx.per_node_checks[node] = checks

    # materialize the stored combinations into this node's pool
    pool: list[_PoolEntry] = []
    by_canon = {}
    uniq, inverse = np.unique(rowsel, return_inverse=True)
    pid_of_uniq = np.empty(len(uniq), dtype=np.int32)
    for u, r in enumerate(uniq.tolist()):
        if r < 0:
            pid_of_uniq[u] = -1
            continue
        canon = canon_of[r]
        pid = by_canon.get(canon)
        if pid is None:
            pid = len(pool)
            pool.append(_PoolEntry(canon, rows[r][0], rows[r][1]))
            by_canon[canon] = pid
        pid_of_uniq[u] = pid
    table.sol = pid_of_uniq[inverse.reshape(rowsel.shape)]
    table.pool = pool
    table.collect_budget_solutions()
    ctx.tables[node] = table


_HANDLERS = {LEAF: handle_leaf, INTRODUCE: handle_introduce, FORGET: handle_forget,
             JOIN: handle_join}


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

@dataclass
class SolveStats:
    node_count: int
    width: int
    entry_count: int
    feasibility_checks: int
    backend: str
    per_node: list = field(default_factory=list)


@dataclass
class SolveResult:
    status: str  # "optimal" or "infeasible"
    cost: object
    solution: tuple | None
    stats: SolveStats
    ntd: NiceTreeDecomposition | None = None
    context: DpContext | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status == "optimal"


def _prepare_ntd(inst, ntd) -> NiceTreeDecomposition:
    if ntd is None:
        ntd = min_fill_heuristic(inst)
    if isinstance(ntd, TreeDecomposition):
        check = validate_td(ntd, inst)
        if not check:
            raise ValueError(
                f"invalid tree decomposition: {check.condition} (witness {check.witness})"
            )
        return nicify(ntd)
    if isinstance(ntd, NiceTreeDecomposition):
        problems = nice_violations(ntd, inst)
        if problems:
            raise ValueError(f"invalid nice tree decomposition: {problems[0]}")
        return ntd
    raise TypeError("ntd must be a TreeDecomposition or NiceTreeDecomposition")


def solve(
    inst: Instance,
    ntd=None,
    closure: MetricClosure | None = None,
    *,
    collapse_zero_classes: bool = True,
    collect_tables: bool = False,
    deadline: float | None = None,
    max_table_keys: int | None = None,
) -> SolveResult:
    """Optimal ball cover of the clients, or INFEASIBLE.

    Runs the four node handlers bottom-up and returns the root entry at the
    full budget.  When the shortest-path metric has distinct vertices at
    distance 0, those are first contracted to single representatives (an
    optimum-preserving rewrite; the forget step assumes positive distances
    between distinct vertices).  Pass collapse_zero_classes=False to run the
    recurrences on the raw pseudometric instead.
    """
    if closure is None:
        closure = metric_closure(inst)
    inst.cost_fn.validate_against(closure.candidate_radii)

    lift = None
    run_inst, run_closure, run_ntd = inst, closure, ntd
    if collapse_zero_classes:
        contracted, class_of = contract_zero_distance_classes(inst, closure)
        if contracted is not inst:
            lift = zero_class_facility_map(inst, class_of)
            run_inst = contracted
            run_closure = metric_closure(contracted)
            if isinstance(ntd, NiceTreeDecomposition):
                ntd = ntd.as_tree_decomposition()
            if isinstance(ntd, TreeDecomposition):
                run_ntd = TreeDecomposition(
                    vertex_count=contracted.vertex_count,
                    bags=tuple(frozenset(class_of[v] for v in bag) for bag in ntd.bags),
                    edges=ntd.edges,
                )

    nice = _prepare_ntd(run_inst, run_ntd)
    ctx = DpContext(run_inst, run_closure, nice)

    if max_table_keys is not None:
        for node in range(nice.node_count):
            probe = DpTable(ctx, node)
            if probe.nkeys > max_table_keys:
                raise TableLimitExceeded(
                    f"node {node} needs {probe.nkeys} keys (limit {max_table_keys})"
                )

    for node in range(nice.node_count):
        if deadline is not None and time.monotonic() > deadline:
            raise SolveTimeout(f"deadline hit before node {node}")
        _HANDLERS[nice.kinds[node]](node, ctx)
        if not collect_tables:
            for c in nice.children[node]:
                ctx.tables[c].release()

    root = ctx.tables[nice.root]
    entry = root.entry_at(root.flat_index(TupleKey(nice.root, (), (), inst.k)))
    stats = SolveStats(
        node_count=nice.node_count,
        width=nice.width,
        entry_count=sum(DpTable(ctx, n).nkeys for n in range(nice.node_count)),
        feasibility_checks=ctx.feasibility_checks,
        backend=kernels.select(ctx.mask_dtype, ctx.cost_dtype).NAME,
        per_node=[
            {
                "node": n,
                "kind": nice.kinds[n],
                "bag_size": len(nice.bags[n]),
                "keys": DpTable(ctx, n).nkeys,
                "checks": ctx.per_node_checks[n],
            }
            for n in range(nice.node_count)
        ],
    )
    if entry.solution is None:
        return SolveResult("infeasible", None, None, stats,
                           ntd=nice, context=ctx if collect_tables else None)
    sol = entry.solution
    if lift is not None:
        sol = canonical_solution((lift[f], r) for f, r in sol)
    value = entry.value
    if isinstance(value, np.generic):
        value = value.item()
    return SolveResult("optimal", value, sol, stats,
                       ntd=nice, context=ctx if collect_tables else None)
