"""Empirical scaling harness: exact DP counters vs instance size, CSV output."""

from __future__ import annotations

import csv
import math
import time

from . import kernels
from .dp import SolveTimeout, TableLimitExceeded, solve
from .generators import gen_partial_ktree, gen_random_tree

CSV_HEADER = [
    "family", "|V|", "width", "k",
    "node_count", "entry_count", "feasibility_checks", "wall_time", "status",
]


def _instance_for(family: str, n: int, width: int, k: int, seed: int):
    if family == "tree":
        if width != 1:
            raise ValueError("tree family rows have width 1")
        return gen_random_tree(n, weight_range=(1, 10), seed=seed, k=k), None
    if family == "ktree":
        inst, td = gen_partial_ktree(
            n, width_target=width, edge_keep_prob=0.7, weight_range=(1, 10),
            seed=seed, k=k,
        )
        return inst, td
    raise ValueError(f"unknown family {family!r}")


def run_scaling(family, sizes, widths, k_values, repetitions, seed, timeout=None):
    """One row per (size, width, k, repetition) run.

    Counter columns (node_count, entry_count, feasibility_checks) are exact
    and deterministic; wall_time is measured and varies run to run.  Runs are
    sequential so timings stay honest.  A run past the timeout yields a row
    with status "timeout" and empty counter columns.
    """
    rows = []
    run_id = 0
    for width in widths:
        for n in sizes:
            for k in k_values:
                for _rep in range(repetitions):
                    inst, td = _instance_for(family, n, width, k, seed + 7919 * run_id)
                    run_id += 1
                    row = {"family": family, "|V|": n, "width": width, "k": k}
                    deadline = time.monotonic() + timeout if timeout else None
                    start = time.perf_counter()
                    try:
                        res = solve(inst, ntd=td, deadline=deadline)
                    except (SolveTimeout, TableLimitExceeded):
                        row.update(
                            node_count="", entry_count="", feasibility_checks="",
                            wall_time="", status="timeout",
                        )
                        rows.append(row)
                        continue
                    elapsed = time.perf_counter() - start
                    row.update(
                        node_count=res.stats.node_count,
                        entry_count=res.stats.entry_count,
                        feasibility_checks=res.stats.feasibility_checks,
                        wall_time=f"{elapsed:.6f}",
                        status="ok",
                    )
                    rows.append(row)
    return rows


def write_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)


def read_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def loglog_slope(points) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = [math.log(x) for x, _ in points]
    ys = [math.log(y) for _, y in points]
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    denom = sum((x - mx) ** 2 for x in xs)
    if denom == 0:
        raise ValueError("need at least two distinct sizes")
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / denom


def summarize_slopes(rows):
    """Log-log growth of mean entry_count in |V|, per (family, width, k)."""
    groups = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        key = (row["family"], int(row["width"]), int(row["k"]))
        n = int(row["|V|"])
        groups.setdefault(key, {}).setdefault(n, []).append(int(row["entry_count"]))
    out = []
    for (family, width, k), by_n in sorted(groups.items()):
        if len(by_n) < 2:
            continue
        points = [(n, sum(v) / len(v)) for n, v in sorted(by_n.items())]
        out.append(
            {
                "family": family,
                "width": width,
                "k": k,
                "entry_count_slope": loglog_slope(points),
            }
        )
    return out


def compare_backends(family, sizes, widths, k_values, seed, timeout=None):
    """Wall-time comparison of the compiled scans against the pure fallback."""
    out = []
    prior = kernels.backend_name() == "pure"
    try:
        for forced in (False, True):
            kernels.force_pure(forced)
            backend = kernels.backend_name()
            rows = run_scaling(family, sizes, widths, k_values, 1, seed, timeout=timeout)
            for row in rows:
                out.append({"backend": backend, **row})
    finally:
        kernels.force_pure(prior)
    return out
