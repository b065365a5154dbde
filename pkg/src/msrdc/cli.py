"""Command-line entry point.

Subcommands: solve, oracle, generate, reduce, validate-td, bench.  Result JSON
goes to stdout, diagnostics to stderr.  Exit codes: 0 solved/ok, 1 input
error, 2 infeasible, 3 resource limit exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import bench
from .dp import SolveTimeout, TableLimitExceeded, solve
from .generators import gen_partial_ktree, gen_random_3sat, gen_random_tree, sat_to_msra
from .instance import (
    CostFn,
    InvalidInstanceError,
    instance_to_json,
    load_instance,
    metric_closure,
    save_instance,
)
from .oracle import WorkLimitExceeded, brute_force_msrdc, load_cnf, save_cnf
from .treedecomp import (
    InvalidDecompositionError,
    load_td,
    min_fill_heuristic,
    save_td,
    validate_td,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_RESOURCE = 3


def parse_cost_flag(text: str) -> CostFn:
    """--cost identity | power:A | table:PATH"""
    if text == "identity":
        return CostFn("identity")
    if text.startswith("power:"):
        try:
            alpha = int(text.split(":", 1)[1])
        except ValueError:
            raise InvalidInstanceError(f"bad power exponent in {text!r}") from None
        return CostFn("power", alpha=alpha)
    if text.startswith("table:"):
        path = text.split(":", 1)[1]
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, dict):
            raise InvalidInstanceError("cost table file must hold a JSON object")
        return CostFn("table", table={int(r): c for r, c in raw.items()})
    raise InvalidInstanceError(f"unknown cost flag {text!r}")


def _apply_overrides(inst, k, cost):
    if k is not None:
        inst = replace(inst, k=k)
    if cost is not None:
        inst = replace(inst, cost_fn=parse_cost_flag(cost))
    return inst


def _result_json(status: str, cost, solution) -> str:
    return json.dumps(
        {
            "status": status,
            "cost": cost,
            "opened": [
                {"facility": f, "radius": r} for f, r in (solution or ())
            ],
        },
        indent=2,
    ) + "\n"


def cmd_solve(graph_file, td_file=None, k=None, cost=None, stats_path=None,
              raw_pseudometric=False, out=sys.stdout) -> int:
    inst = _apply_overrides(load_instance(graph_file), k, cost)
    td = load_td(td_file) if td_file else None
    res = solve(inst, ntd=td, collapse_zero_classes=not raw_pseudometric)
    if td is None:
        print(f"using min-fill decomposition, width {res.stats.width}", file=sys.stderr)
    if stats_path:
        stats = {
            "node_count": res.stats.node_count,
            "width": res.stats.width,
            "entry_count": res.stats.entry_count,
            "feasibility_checks": res.stats.feasibility_checks,
            "backend": res.stats.backend,
            "per_node": res.stats.per_node,
        }
        with open(stats_path, "w", encoding="utf-8") as fh:
            json.dump(stats, fh, indent=2)
            fh.write("\n")
    out.write(_result_json(res.status, res.cost, res.solution))
    return EXIT_OK if res.is_optimal else EXIT_INFEASIBLE


def cmd_oracle(graph_file, k=None, cost=None, work_limit=5_000_000, out=sys.stdout) -> int:
    inst = _apply_overrides(load_instance(graph_file), k, cost)
    res = brute_force_msrdc(inst, metric_closure(inst), work_limit=work_limit)
    out.write(_result_json(res.status, res.cost, res.solution))
    return EXIT_OK if res.status == "optimal" else EXIT_INFEASIBLE


def cmd_generate(family, seed, out_path, td_out=None, n=8, width=2, m=4,
                 keep_prob=0.7, weight_lo=1, weight_hi=10, ratio=0.5, k=None,
                 force_positive=False) -> int:
    if family == "tree":
        inst = gen_random_tree(n, (weight_lo, weight_hi), ratio, seed, k=k)
        save_instance(inst, out_path)
        if td_out:
            save_td(min_fill_heuristic(inst), td_out)
    elif family == "ktree":
        inst, td = gen_partial_ktree(
            n, width, keep_prob, (weight_lo, weight_hi), seed, ratio, k=k
        )
        save_instance(inst, out_path)
        if td_out:
            save_td(td, td_out)
    elif family == "cnf":
        save_cnf(gen_random_3sat(n, m, seed, force_positive), out_path)
    else:
        raise InvalidInstanceError(f"unknown family {family!r}")
    return EXIT_OK


def cmd_reduce(cnf_file, out_path=None, out=sys.stdout) -> int:
    inst = sat_to_msra(load_cnf(cnf_file))
    if out_path:
        save_instance(inst, out_path)
    else:
        out.write(instance_to_json(inst))
    return EXIT_OK


def cmd_validate_td(graph_file, td_file, out=sys.stdout) -> int:
    inst = load_instance(graph_file)
    td = load_td(td_file)
    check = validate_td(td, inst)
    if check:
        out.write(f"valid: {len(td.bags)} bags, width {td.width}\n")
        return EXIT_OK
    out.write(f"invalid: {check.condition} violated (witness: {check.witness})\n")
    return EXIT_INPUT


def cmd_bench(family, sizes, widths, k_values, repetitions, seed, out_path,
              timeout=None, compare=False) -> int:
    if compare:
        rows = bench.compare_backends(family, sizes, widths, k_values, seed, timeout)
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            import csv as _csv

            writer = _csv.DictWriter(fh, fieldnames=["backend"] + bench.CSV_HEADER)
            writer.writeheader()
            writer.writerows(rows)
        return EXIT_OK
    rows = bench.run_scaling(family, sizes, widths, k_values, repetitions, seed, timeout)
    bench.write_csv(rows, out_path)
    for line in bench.summarize_slopes(rows):
        print(
            f"{line['family']} width={line['width']} k={line['k']}: "
            f"entry_count log-log slope {line['entry_count_slope']:.3f}",
            file=sys.stderr,
        )
    return EXIT_OK


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msrdc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("solve", help="exact DP solve of an instance JSON")
    sp.add_argument("graph_file")
    sp.add_argument("--td", dest="td_file", help="PACE .td decomposition (else min-fill)")
    sp.add_argument("--k", type=int, help="override the instance budget")
    sp.add_argument("--cost", help="identity | power:A | table:PATH")
    sp.add_argument("--stats", dest="stats_path", help="write DP statistics JSON here")
    sp.add_argument("--raw-pseudometric", action="store_true",
                    help="skip zero-distance contraction (exploratory)")

    op = sub.add_parser("oracle", help="brute-force reference solve")
    op.add_argument("graph_file")
    op.add_argument("--k", type=int)
    op.add_argument("--cost")
    op.add_argument("--work-limit", type=int, default=5_000_000)

    gp = sub.add_parser("generate", help="emit a reproducible instance")
    gp.add_argument("--family", required=True, choices=["tree", "ktree", "cnf"])
    gp.add_argument("--seed", type=int, required=True)
    gp.add_argument("--out", required=True)
    gp.add_argument("--td-out")
    gp.add_argument("--n", type=int, default=8)
    gp.add_argument("--width", type=int, default=2)
    gp.add_argument("--m", type=int, default=4)
    gp.add_argument("--keep-prob", type=float, default=0.7)
    gp.add_argument("--weight-lo", type=int, default=1)
    gp.add_argument("--weight-hi", type=int, default=10)
    gp.add_argument("--ratio", type=float, default=0.5)
    gp.add_argument("--k", type=int)
    gp.add_argument("--force-positive", action="store_true")

    rp = sub.add_parser("reduce", help="3-SAT file to clustering instance")
    rp.add_argument("cnf_file")
    rp.add_argument("--out")

    vp = sub.add_parser("validate-td", help="check a decomposition against a graph")
    vp.add_argument("graph_file")
    vp.add_argument("td_file")

    bp = sub.add_parser("bench", help="scaling harness, CSV output")
    bp.add_argument("--family", default="tree", choices=["tree", "ktree"])
    bp.add_argument("--sizes", type=_int_list, default=[8, 12, 16])
    bp.add_argument("--widths", type=_int_list, default=[1])
    bp.add_argument("--k-values", type=_int_list, default=[3])
    bp.add_argument("--reps", type=int, default=1)
    bp.add_argument("--seed", type=int, required=True)
    bp.add_argument("--out", required=True)
    bp.add_argument("--timeout", type=float)
    bp.add_argument("--compare-backends", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve(args.graph_file, args.td_file, args.k, args.cost,
                             args.stats_path, args.raw_pseudometric)
        if args.command == "oracle":
            return cmd_oracle(args.graph_file, args.k, args.cost, args.work_limit)
        if args.command == "generate":
            return cmd_generate(args.family, args.seed, args.out, args.td_out,
                                args.n, args.width, args.m, args.keep_prob,
                                args.weight_lo, args.weight_hi, args.ratio,
                                args.k, args.force_positive)
        if args.command == "reduce":
            return cmd_reduce(args.cnf_file, args.out)
        if args.command == "validate-td":
            return cmd_validate_td(args.graph_file, args.td_file)
        if args.command == "bench":
            return cmd_bench(args.family, args.sizes, args.widths, args.k_values,
                             args.reps, args.seed, args.out,
                             args.timeout, args.compare_backends)
        raise AssertionError(args.command)
    except (WorkLimitExceeded, SolveTimeout, TableLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (InvalidInstanceError, InvalidDecompositionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
