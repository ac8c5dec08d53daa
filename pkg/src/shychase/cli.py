"""Command line front end.

Exit codes: 0 success, 1 harness check failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .canonical import partition_active_harmless, rewrite_theory
from .chase import OBLIVIOUS, RESTRICTED, ChaseConfig, entails, run_chase
from .classify import classify
from .finitemodels import ModelBudget, find_finite_countermodel, find_support_ordering
from .harness import SUITES, run_suite
from .parse import (
    ParseError,
    parse_program,
    print_atom,
    print_program,
    print_query,
    print_rule,
    to_jsonable,
)


def _read_program(path: str):
    with open(path) as fh:
        return parse_program(fh.read())


def _emit(payload, as_json: bool, text: str) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _cmd_classify(args) -> int:
    program = _read_program(args.file)
    report = classify(program.ontology)
    lines = []
    payload = {}
    for name, (holds, witness) in report.verdicts.items():
        payload[name] = {"holds": holds}
        if witness is not None:
            payload[name]["witness"] = witness.describe()
        mark = "yes" if holds else f"no ({witness.describe()})"
        lines.append(f"{name}: {mark}")
    _emit(payload, args.json, "\n".join(lines))
    return 0


def _cmd_chase(args) -> int:
    program = _read_program(args.file)
    mode = RESTRICTED if args.restricted else OBLIVIOUS
    cfg = ChaseConfig(mode, args.max_atoms, args.max_rounds)
    result = run_chase(program.database, program.ontology, cfg)
    payload = {
        "terminated": result.terminated,
        "rounds": result.rounds,
        "atoms": to_jsonable(result.instance),
    }
    text = "\n".join(
        [f"terminated: {result.terminated}", f"rounds: {result.rounds}"]
        + [print_atom(a) for a in result.instance.sorted_atoms()]
    )
    _emit(payload, args.json, text)
    return 0


def _cmd_answer(args) -> int:
    program = _read_program(args.file)
    if not program.queries:
        print("error: no queries in input", file=sys.stderr)
        return 2
    mode = RESTRICTED if args.restricted else OBLIVIOUS
    cfg = ChaseConfig(mode, args.max_atoms, args.max_rounds)
    payload = []
    lines = []
    for q in program.queries:
        result = entails(program.database, program.ontology, q, cfg)
        payload.append({"query": print_query(q), "verdict": result.verdict.value})
        lines.append(f"{print_query(q)}  => {result.verdict.value}")
    _emit(payload, args.json, "\n".join(lines))
    return 0


def _cmd_rewrite(args) -> int:
    program = _read_program(args.file)
    dbc, ontoc, queries = rewrite_theory(
        program.database, program.ontology, program.queries
    )
    if args.partition:
        active, harmless = partition_active_harmless(ontoc)
        payload = {
            "database": to_jsonable(dbc),
            "active": [print_rule(r) for r in active],
            "harmless": [print_rule(r) for r in harmless],
        }
        text = "\n".join(
            [print_atom(a) + "." for a in sorted(dbc, key=lambda a: a.sort_key())]
            + ["# active"] + [print_rule(r) for r in active]
            + ["# harmless"] + [print_rule(r) for r in harmless]
        )
    else:
        from .parse import Program

        payload = to_jsonable(Program(dbc, ontoc, queries))
        text = print_program(Program(dbc, ontoc, queries))
    _emit(payload, args.json, text)
    return 0


def _cmd_fc_check(args) -> int:
    program = _read_program(args.file)
    if not program.queries:
        print("error: no queries in input", file=sys.stderr)
        return 2
    budget = ModelBudget(args.max_nulls, args.max_atoms)
    index = args.query
    if index < 1 or index > len(program.queries):
        print(f"error: query index {index} out of range", file=sys.stderr)
        return 2
    q = program.queries[index - 1]
    counter = find_finite_countermodel(program.database, program.ontology, q, budget)
    if counter is None:
        _emit({"countermodel": None}, args.json, "no countermodel within budget")
        return 0
    ordering = find_support_ordering(counter, program.database, program.ontology)
    payload = {
        "countermodel": to_jsonable(counter),
        "well_supported": ordering is not None,
    }
    text = "\n".join(
        ["countermodel:"]
        + ["  " + print_atom(a) for a in counter.sorted_atoms()]
        + [f"well supported: {ordering is not None}"]
    )
    _emit(payload, args.json, text)
    return 0


def _cmd_harness(args) -> int:
    results = run_suite(args.suite, seed=args.seed)
    payload = [
        {"name": r.name, "passed": r.passed, "detail": r.detail,
         "seconds": round(r.seconds, 3)}
        for r in results
    ]
    text = "\n".join(r.line() for r in results)
    _emit(payload, args.json, text)
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shychase",
        description="Reasoning toolkit for existential rule ontologies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--json", action="store_true", help="emit JSON output")
        p.set_defaults(fn=fn)
        return p

    p = add("classify", _cmd_classify, "report fragment membership")
    p.add_argument("file")

    for name, fn, help in (
        ("chase", _cmd_chase, "materialize a chase instance"),
        ("answer", _cmd_answer, "answer the queries in the input"),
    ):
        p = add(name, fn, help)
        p.add_argument("file")
        p.add_argument("--restricted", action="store_true",
                       help="use the restricted chase (default oblivious)")
        p.add_argument("--max-atoms", type=int, default=2000)
        p.add_argument("--max-rounds", type=int, default=500)

    p = add("rewrite", _cmd_rewrite, "rewrite into shape-indexed form")
    p.add_argument("file")
    p.add_argument("--partition", action="store_true",
                   help="split the rewriting into active and harmless rules")

    p = add("fc-check", _cmd_fc_check, "search for a finite countermodel")
    p.add_argument("file")
    p.add_argument("--query", type=int, default=1, help="1-based query index")
    p.add_argument("--max-nulls", type=int, default=2)
    p.add_argument("--max-atoms", type=int, default=12)

    p = add("harness", _cmd_harness, "run a differential check suite")
    p.add_argument("--suite", choices=sorted(SUITES), default="all")
    p.add_argument("--seed", type=int, default=42)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
