"""Command-line surface.

Subcommands: analyze (k-safe decision), check (single acyclicity test),
chase (run a chase variant), cycles (list k-cycles with relevance flags),
bounded (depth-bounded membership), generate (benchmark TGDs), report
(batch verdict grid over a directory), graph (dependency graph as DOT).

Exit codes for analyze/bounded: 0 proven, 1 not proven, 2 resources
exhausted, 3 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from . import dlgp
from .acyclicity import Condition, check_condition
from .activeness import Verdict, k_safe
from .bounded import memb_check, multi_head_caveat, parse_bound
from .chase import (
    Budget,
    CyclicTermFound,
    DEFAULT_BUDGET,
    Saturated,
    greedy_restricted,
    skolem_chase,
)
from .cycles import enumerate_k_cycles, is_relevant
from .deps import DependencyOracle, dependency_graph
from .gen import GenParams, GenerationError, generate
from .model import rule_set_size

EXIT_PROVEN = 0
EXIT_NOT_PROVEN = 1
EXIT_EXHAUSTED = 2
EXIT_USAGE = 3

SCHEMA_VERSION = 1


def _budget_from_args(args) -> Budget:
    return Budget(
        max_steps=args.max_steps,
        max_height=args.max_height,
        max_atoms=args.max_atoms,
        wall_clock_s=args.timeout,
        max_probes=args.max_probes,
        max_cycles=args.max_cycles,
    )


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--max-height", type=int, default=None)
    p.add_argument("--max-atoms", type=int, default=DEFAULT_BUDGET.max_atoms)
    p.add_argument("--timeout", type=float, default=DEFAULT_BUDGET.wall_clock_s,
                   help="wall clock seconds per cycle/run")
    p.add_argument("--max-probes", type=int, default=DEFAULT_BUDGET.max_probes)
    p.add_argument("--max-cycles", type=int, default=DEFAULT_BUDGET.max_cycles)


def _jobs_default() -> int:
    env = os.environ.get("CHASE_SENTINEL_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def _load_rules(path: str):
    text = Path(path).read_text(encoding="utf-8")
    doc = dlgp.parse(text, path=path)
    return doc


def _witness_json(witness) -> Optional[dict]:
    if witness is None:
        return None
    return {
        "cycle": list(witness.rule_ids),
        "renaming": str(witness.renaming),
        "initial": [str(a) for a in witness.initial],
        "steps": [
            {
                "rule": s.rule_id,
                "bindings": {v: str(t) for v, t in s.bindings},
                "added": [str(a) for a in s.added],
            }
            for s in witness.steps
        ],
        "chain": list(witness.chain),
    }


def cmd_analyze(args) -> int:
    try:
        doc = _load_rules(args.file)
        rs = doc.rule_set()
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    condition = Condition(args.condition)
    report = k_safe(
        rs,
        args.k,
        condition,
        datalog_first=args.datalog_first,
        budget=_budget_from_args(args),
        jobs=args.jobs,
    )
    stats = report.stats
    payload = {
        "schema_version": SCHEMA_VERSION,
        "file": args.file,
        "condition": condition.value,
        "k": args.k,
        "datalog_first": args.datalog_first,
        "status": report.verdict.value,
        "witness": _witness_json(report.witness),
        "stats": {
            "components": stats.components,
            "components_skipped": stats.components_skipped,
            "cycles_enumerated": stats.cycles_enumerated,
            "cycles_condition_true": stats.cycles_condition_true,
            "cycles_datalog_pruned": stats.cycles_datalog_pruned,
            "cycles_checked": stats.cycles_checked,
            "truncated": stats.truncated,
        },
    }
    if args.timings:
        payload["elapsed_s"] = round(stats.elapsed_s, 6)
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(
            "%s: %s (condition=%s, k=%d%s)"
            % (
                args.file,
                report.verdict.value,
                condition.value,
                args.k,
                ", datalog-first" if args.datalog_first else "",
            )
        )
        if report.witness is not None:
            w = report.witness
            print("  active cycle: %s" % " -> ".join(w.rule_ids))
            print("  renaming: %s" % w.renaming)
            print("  chain: %s" % " -> ".join(str(i) for i in w.chain))
        print(
            "  cycles: %d enumerated, %d passed condition, %d pruned (datalog-first), %d checked"
            % (
                stats.cycles_enumerated,
                stats.cycles_condition_true,
                stats.cycles_datalog_pruned,
                stats.cycles_checked,
            )
        )
    return {
        Verdict.TERMINATING: EXIT_PROVEN,
        Verdict.NOT_PROVEN: EXIT_NOT_PROVEN,
        Verdict.RESOURCE_EXHAUSTED: EXIT_EXHAUSTED,
    }[report.verdict]


def cmd_check(args) -> int:
    try:
        rs = _load_rules(args.file).rule_set()
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    condition = Condition(args.condition)
    res = check_condition(condition, rs, _budget_from_args(args))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "file": args.file,
        "condition": condition.value,
        "value": res.value,
        "witness": str(res.witness) if res.witness is not None else None,
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        label = {True: "holds", False: "fails", None: "unknown"}[res.value]
        print("%s: %s %s" % (args.file, condition.value, label))
        if res.witness is not None:
            print("  witness: %s" % (res.witness,))
    if res.value is True:
        return EXIT_PROVEN
    return EXIT_NOT_PROVEN if res.value is False else EXIT_EXHAUSTED


def cmd_chase(args) -> int:
    try:
        doc = _load_rules(args.file)
        rs = doc.rule_set()
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    db = doc.database()
    if args.database:
        try:
            db = _load_rules(args.database).database()
        except (OSError, ValueError) as e:
            print("error: %s" % e, file=sys.stderr)
            return EXIT_USAGE
    budget = _budget_from_args(args)
    if args.variant == "skolem":
        trace = skolem_chase(db, rs, budget=budget, detect_cyclic_terms=args.detect_cyclic)
    else:
        trace = greedy_restricted(
            db, rs, budget=budget, datalog_first=(args.variant == "datalog-first")
        )
    if args.json:
        sys.stdout.write(trace.to_json_lines())
    else:
        for i, step in enumerate(trace.steps, start=1):
            binding = ", ".join("%s/%s" % (v, t) for v, t in step.bindings)
            added = ", ".join(str(a) for a in step.added)
            print("step %d: <%s, {%s}> adds {%s}" % (i, step.rule_id, binding, added))
        if isinstance(trace.outcome, Saturated):
            print("saturated after %d steps (no active trigger)" % len(trace.steps))
        elif isinstance(trace.outcome, CyclicTermFound):
            print("cyclic skolem term found: %s" % trace.outcome.term)
        else:
            print("budget exhausted (%s) after %d steps" % (trace.outcome.reason, len(trace.steps)))
    return EXIT_PROVEN


def cmd_cycles(args) -> int:
    try:
        rs = _load_rules(args.file).rule_set()
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    graph = dependency_graph(rs)
    oracle = DependencyOracle(rs)
    stream = enumerate_k_cycles(rs, args.k, graph, limit=args.max_cycles)
    for cycle in stream:
        flag = "relevant" if is_relevant(cycle.path, oracle) else "irrelevant"
        print("%s  [%s]" % (" -> ".join(cycle.rule_ids()), flag))
    if stream.truncated:
        print("... truncated at %d cycles" % stream.emitted)
    return EXIT_PROVEN


def cmd_bounded(args) -> int:
    try:
        rs = _load_rules(args.file).rule_set()
        delta = parse_bound(args.delta)
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    result = memb_check(rs, delta, budget=_budget_from_args(args))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "file": args.file,
        "delta": str(delta),
        "size": rule_set_size(rs),
        "bound": result.bound,
        "value": result.value,
        "phase": result.phase,
        "breach_paths": [list(p) for p in result.breach_paths],
        "caveat": multi_head_caveat(rs),
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        label = {True: "T", False: "F", None: "ResourceExhausted"}[result.value]
        print(
            "%s: %s (delta=%s, ||R||=%d, bound=%d, phase %d)"
            % (args.file, label, delta, payload["size"], result.bound, result.phase)
        )
        caveat = multi_head_caveat(rs)
        if caveat and result.value is False:
            print("  note: %s" % caveat)
    if result.value is True:
        return EXIT_PROVEN
    return EXIT_NOT_PROVEN if result.value is False else EXIT_EXHAUSTED


def cmd_generate(args) -> int:
    shapes = {"chained": "chained", "discrete": "discrete"}
    try:
        params = GenParams(
            count=args.count,
            predicate_pool=args.pool,
            arity=args.arity,
            max_repeated_relations=args.max_repeats,
            body_atoms=args.body_atoms,
            head_atoms=args.head_atoms,
            head_shape=shapes[args.preset],
            seed=args.seed,
        )
        rs = generate(params)
    except GenerationError as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    doc = dlgp.SourceDocument(facts=(), rules=rs.rules)
    text = dlgp.serialize(doc)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_PROVEN


def cmd_report(args) -> int:
    directory = Path(args.directory)
    if not directory.is_dir():
        print("error: %s is not a directory" % args.directory, file=sys.stderr)
        return EXIT_USAGE
    conditions = [Condition(c) for c in args.conditions.split(",")]
    ks = list(range(args.k_min, args.k_max + 1))
    budget = _budget_from_args(args)
    columns = ["%s@k=%d" % (c.value, k) for c in conditions for k in ks]
    rows = []
    short = {
        Verdict.TERMINATING: "T",
        Verdict.NOT_PROVEN: "N",
        Verdict.RESOURCE_EXHAUSTED: "R",
    }
    for path in sorted(directory.glob("*.dlgp")):
        try:
            rs = _load_rules(str(path)).rule_set()
        except (OSError, ValueError):
            rows.append((path.name, ["parse-error"] * len(columns)))
            continue
        cells = []
        for c in conditions:
            for k in ks:
                report = k_safe(rs, k, c, datalog_first=args.datalog_first,
                                budget=budget, jobs=args.jobs)
                cells.append(short[report.verdict])
        rows.append((path.name, cells))
    if args.format == "csv":
        print(",".join(["file"] + columns))
        for name, cells in rows:
            print(",".join([name] + cells))
    else:
        print("| file | " + " | ".join(columns) + " |")
        print("|" + "---|" * (len(columns) + 1))
        for name, cells in rows:
            print("| " + " | ".join([name] + cells) + " |")
    return EXIT_PROVEN


def cmd_graph(args) -> int:
    try:
        rs = _load_rules(args.file).rule_set()
    except (OSError, ValueError) as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    dot = dependency_graph(rs).to_dot()
    if args.output:
        Path(args.output).write_text(dot, encoding="utf-8")
    else:
        sys.stdout.write(dot)
    return EXIT_PROVEN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chase-sentinel",
        description="Restricted-chase termination analysis for existential rules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="decide k-safe membership")
    p.add_argument("file")
    p.add_argument("--condition", choices=[c.value for c in Condition], default="wa")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--datalog-first", action="store_true")
    p.add_argument("--jobs", type=int, default=_jobs_default())
    p.add_argument("--json", action="store_true")
    p.add_argument("--timings", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("check", help="run one acyclicity condition")
    p.add_argument("file")
    p.add_argument("--condition", choices=[c.value for c in Condition], required=True)
    p.add_argument("--json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("chase", help="execute a chase variant")
    p.add_argument("file")
    p.add_argument("--variant", choices=["skolem", "restricted", "datalog-first"],
                   default="restricted")
    p.add_argument("--database", help="separate .dlgp file providing the facts")
    p.add_argument("--detect-cyclic", action="store_true")
    p.add_argument("--json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_chase)

    p = sub.add_parser("cycles", help="list k-cycles with relevance flags")
    p.add_argument("file")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--max-cycles", type=int, default=DEFAULT_BUDGET.max_cycles)
    p.set_defaults(func=cmd_cycles)

    p = sub.add_parser("bounded", help="depth-bounded membership test")
    p.add_argument("file")
    p.add_argument("--delta", required=True, help="const:N | linear:A,B | exptower:K")
    p.add_argument("--json", action="store_true")
    _add_budget_flags(p)
    p.set_defaults(func=cmd_bounded)

    p = sub.add_parser("generate", help="generate benchmark TGDs")
    p.add_argument("--preset", choices=["chained", "discrete"], default="chained")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool", type=int, default=20)
    p.add_argument("--arity", type=int, default=4)
    p.add_argument("--max-repeats", type=int, default=3)
    p.add_argument("--body-atoms", type=int, default=1)
    p.add_argument("--head-atoms", type=int, default=3)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report", help="verdict grid over a directory of .dlgp files")
    p.add_argument("directory")
    p.add_argument("--conditions", default="wa,ja,agrd,mfa")
    p.add_argument("--k-min", type=int, default=0)
    p.add_argument("--k-max", type=int, default=2)
    p.add_argument("--datalog-first", action="store_true")
    p.add_argument("--format", choices=["csv", "markdown"], default="csv")
    p.add_argument("--jobs", type=int, default=_jobs_default())
    _add_budget_flags(p)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("graph", help="dependency graph in DOT format")
    p.add_argument("file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_graph)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
