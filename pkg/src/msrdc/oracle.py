"""Brute-force reference solvers used as ground truth at desk scale."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance, MetricClosure, canonical_solution, solution_cost


class WorkLimitExceeded(RuntimeError):
    """The enumeration budget ran out before an exact answer was proven."""


@dataclass(frozen=True)
class CnfFormula:
    """CNF with variables 1..num_vars; clauses are tuples of signed literals."""

    num_vars: int
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        for clause in self.clauses:
            if not clause:
                raise ValueError("empty clause")
            for lit in clause:
                if lit == 0 or not 1 <= abs(lit) <= self.num_vars:
                    raise ValueError(f"literal {lit} out of range")


def brute_force_sat(cnf: CnfFormula) -> bool:
    """Exhaustive satisfiability check; assignments are bitmasks over variables."""
    n = cnf.num_vars
    if n > 20:
        raise ValueError("brute_force_sat is limited to 20 variables")
    for assignment in range(1 << n):
        ok = True
        for clause in cnf.clauses:
            if not any(
                (assignment >> (abs(lit) - 1)) & 1 == (1 if lit > 0 else 0)
                for lit in clause
            ):
                ok = False
                break
        if ok:
            return True
    return False


@dataclass(frozen=True)
class OracleResult:
    status: str  # "optimal" or "infeasible"
    cost: object = None
    solution: tuple | None = None


def brute_force_msrdc(
    inst: Instance, closure: MetricClosure, work_limit: int = 5_000_000
) -> OracleResult:
    """Exact optimum by exhaustive search over sets of (facility, radius) balls.

    Enumerates covers of the client set by up to k balls, branching on which
    ball covers the first still-uncovered client.  Radii are restricted per
    facility to its distances to vertices, which never loses the optimum since
    any other radius can be shrunk to the next such distance without changing
    the ball.  Ties are broken toward the lexicographically smallest sorted
    (facility, radius) list, matching the DP.  Raises WorkLimitExceeded rather
    than ever returning a non-optimal answer.
    """
    inst.cost_fn.validate_against(closure.candidate_radii)
    clients = sorted(inst.clients)
    if not clients:
        return OracleResult("optimal", 0, ())
    cidx = {c: i for i, c in enumerate(clients)}
    full = (1 << len(clients)) - 1

    pairs = []  # (facility, radius, cost, covermask)
    for f in sorted(inst.facilities):
        row = closure.dist[f]
        for r in sorted({int(row[q]) for q in range(inst.vertex_count)}):
            mask = 0
            for c in clients:
                if row[c] <= r:
                    mask |= 1 << cidx[c]
            pairs.append((f, r, inst.cost_fn(r), mask))
    np_ = len(pairs)

    covering = [[] for _ in clients]  # pair indices covering each client
    min_cover_cost = [None] * len(clients)
    for idx, (_f, _r, cost, mask) in enumerate(pairs):
        for i in range(len(clients)):
            if (mask >> i) & 1:
                covering[i].append(idx)
                if min_cover_cost[i] is None or cost < min_cover_cost[i]:
                    min_cover_cost[i] = cost
    if any(m is None for m in min_cover_cost):
        return OracleResult("infeasible")
    if inst.k == 0:
        return OracleResult("infeasible")

    best = [None, None]  # [cost, canonical solution]
    work = [0]

    def lower_bound(covered):
        lb = 0
        for i in range(len(clients)):
            if not (covered >> i) & 1 and min_cover_cost[i] > lb:
                lb = min_cover_cost[i]
        return lb

    def consider(chosen_cost, chosen):
        canon = canonical_solution((pairs[i][0], pairs[i][1]) for i in chosen)
        if best[0] is None or chosen_cost < best[0] or (
            chosen_cost == best[0] and canon < best[1]
        ):
            best[0] = chosen_cost
            best[1] = canon

    def search(covered, chosen, chosen_cost, forbidden):
        work[0] += 1
        if work[0] > work_limit:
            raise WorkLimitExceeded(f"work limit {work_limit} exceeded")
        if covered == full:
            consider(chosen_cost, chosen)
            return
        if len(chosen) == inst.k:
            return
        if best[0] is not None and chosen_cost + lower_bound(covered) > best[0]:
            return
        u = 0
        while (covered >> u) & 1:
            u += 1
        newly_forbidden = []
        for idx in covering[u]:
            if forbidden[idx]:
                continue
            f, r, cost, mask = pairs[idx]
            if best[0] is None or chosen_cost + cost <= best[0]:
                chosen.append(idx)
                search(covered | mask, chosen, chosen_cost + cost, forbidden)
                chosen.pop()
            forbidden[idx] = True
            newly_forbidden.append(idx)
        for idx in newly_forbidden:
            forbidden[idx] = False

    search(0, [], 0, [False] * np_)
    if best[0] is None:
        return OracleResult("infeasible")
    return OracleResult("optimal", best[0], best[1])


# ---------------------------------------------------------------------------
# DIMACS CNF
# ---------------------------------------------------------------------------

def cnf_from_dimacs(text: str) -> CnfFormula:
    num_vars = None
    num_clauses = None
    clauses = []
    current = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"malformed problem line: {line!r}")
            num_vars, num_clauses = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError("clause before 'p cnf' header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))  # tolerate a missing final 0
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    if num_clauses is not None and len(clauses) != num_clauses:
        raise ValueError(f"header declares {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars=num_vars, clauses=tuple(clauses))


def cnf_to_dimacs(cnf: CnfFormula) -> str:
    lines = [f"p cnf {cnf.num_vars} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(lit) for lit in clause) + " 0")
    return "\n".join(lines) + "\n"


def load_cnf(path) -> CnfFormula:
    with open(path, "r", encoding="utf-8") as fh:
        return cnf_from_dimacs(fh.read())


def save_cnf(cnf: CnfFormula, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cnf_to_dimacs(cnf))
