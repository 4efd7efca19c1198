"""Command-line driver: ``archsubst check|subst-check|run|explore|graph|validate``.

Exit codes: 0 consistent / holds / top_p / simulated, 1 the negative outcome
(inconsistent, violated, bot, not simulated), 2 a budget or state bound was
exhausted, 3 parse or validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .consistency import check_consistency
from .dsl import SourceText, parse_model, parse_scenario, parse_substitution
from .engine import Interactive, Random, Scripted, reachable_graph
from .errors import ArchError, BoundExceeded, StrategyError
from .simulation import PairedSystem, cross_validate, oracle_check, run_semi_algorithm, structural_sweep

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BUDGET = 2
EXIT_ERROR = 3

RUN_EXIT = {"top_p": EXIT_OK, "bot": EXIT_FAIL, "budget_exhausted": EXIT_BUDGET}

DEFAULT_MAX_STEPS = 100
DEFAULT_STATE_BOUND = 100_000


def _load(path, check=True):
    return parse_model(SourceText.load(path), check=check)


def _paired(args) -> PairedSystem:
    pre = _load(args.pre)
    post = _load(args.post)
    subst = parse_substitution(SourceText.load(args.map), pre, post)
    return PairedSystem(pre, post, subst, strict=getattr(args, "strict_shared", False))


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    print(text, file=out or sys.stdout)


def cmd_check(args) -> int:
    spec = _load(args.model, check=False)
    report = check_consistency(spec.initial)
    _emit(report.to_json())
    return EXIT_OK if report.consistent else EXIT_FAIL


def cmd_subst_check(args) -> int:
    ps = _paired(args)
    if args.initial_only:
        report = ps.subst_report(ps.post.initial, ps.pre.initial)
        _emit(report.to_json())
        return EXIT_OK if report.holds else EXIT_FAIL
    try:
        result = structural_sweep(ps, args.state_bound)
    except BoundExceeded as exc:
        print(f"archsubst: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(result.to_json())
    if not result.report.holds:
        print(f"subst violated ({', '.join(result.report.ids())}) after: {' '.join(result.path) or '(initial)'}",
              file=sys.stderr)
    return EXIT_OK if result.report.holds else EXIT_FAIL


def _prompt(options: list[str]) -> str:
    print("enabled operations:", file=sys.stderr)
    for i, name in enumerate(options, 1):
        print(f"  {i}. {name}", file=sys.stderr)
    while True:
        print("choose> ", end="", file=sys.stderr, flush=True)
        line = sys.stdin.readline()
        if not line:
            raise StrategyError("no choice on standard input")
        answer = line.strip()
        if answer.isdigit() and 1 <= int(answer) <= len(options):
            return options[int(answer) - 1]
        if answer in options:
            return answer
        print(f"not enabled: {answer!r}", file=sys.stderr)


def cmd_run(args) -> int:
    ps = _paired(args)
    expect = None
    max_steps = args.max_steps
    if args.script:
        scenario = parse_scenario(SourceText.load(args.script))
        strategy = Scripted(scenario.ops)
        expect = scenario.expect
        budget = len(scenario.ops) if max_steps is None else min(max_steps, len(scenario.ops))
    elif args.interactive:
        strategy = Interactive(_prompt)
        budget = DEFAULT_MAX_STEPS if max_steps is None else max_steps
    else:
        strategy = Random(args.seed)
        budget = DEFAULT_MAX_STEPS if max_steps is None else max_steps
    trace = run_semi_algorithm(ps, strategy, budget)
    stream = trace.to_jsonl()
    sys.stdout.write(stream)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(stream)
    if expect is not None:
        got = (trace.final.kind,) + ((trace.final.reason,) if len(expect) > 1 else ())
        status = "met" if got == expect else f"NOT met (got {' '.join(map(str, got))})"
        print(f"expectation {' '.join(expect)}: {status}", file=sys.stderr)
    return RUN_EXIT[trace.final.kind]


def cmd_explore(args) -> int:
    ps = _paired(args)
    try:
        result = oracle_check(ps, args.state_bound, scope=args.scope, backend=args.backend)
    except BoundExceeded as exc:
        print(f"archsubst: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(result.to_json())
    return EXIT_OK if result.simulated else EXIT_FAIL


def cmd_graph(args) -> int:
    spec = _load(args.model)
    try:
        graph = reachable_graph(spec, args.state_bound)
    except BoundExceeded as exc:
        print(f"archsubst: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    dot = graph.to_dot()
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(dot)
    else:
        sys.stdout.write(dot)
    print(f"{len(graph.nodes)} configurations, {len(graph.edges)} transitions", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    ps = _paired(args)
    try:
        report = cross_validate(ps, range(args.seeds), args.max_steps, args.state_bound)
    except BoundExceeded as exc:
        print(f"archsubst: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(report.to_json())
    return EXIT_OK if report.ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="archsubst", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="consistency report for the initial configuration of a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_check)

    def paired(p):
        p.add_argument("pre", help="pre-substitution model (.arch)")
        p.add_argument("post", help="post-substitution model (.arch)")
        p.add_argument("map", help="substitution map (.subst)")
        p.add_argument("--strict-shared", action="store_true",
                       help="reject shared reconfigurations whose bodies differ modulo the substitution")

    p = sub.add_parser("subst-check", help="structural substitutability over the lockstep product")
    paired(p)
    p.add_argument("--initial-only", action="store_true", help="check the initial pair only")
    p.add_argument("--state-bound", type=int, default=DEFAULT_STATE_BOUND)
    p.set_defaults(func=cmd_subst_check)

    p = sub.add_parser("run", help="run the semi-algorithm and stream verdicts as JSON lines")
    paired(p)
    how = p.add_mutually_exclusive_group()
    how.add_argument("--script", help="scenario script (.scn)")
    how.add_argument("--seed", type=int, default=0, help="seed for random pick-up (default 0)")
    how.add_argument("--interactive", action="store_true", help="choose each operation on standard input")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--json", metavar="OUT", help="also write the verdict stream to OUT")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("explore", help="exhaustive simulation check on the finite reachable graphs")
    paired(p)
    p.add_argument("--state-bound", type=int, default=DEFAULT_STATE_BOUND)
    p.add_argument("--scope", choices=("reachable", "full"), default="reachable")
    p.add_argument("--backend", choices=("cython", "python"), default=None)
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("graph", help="export the reachable configuration graph")
    p.add_argument("model")
    p.add_argument("--dot", metavar="OUT", help="write DOT to OUT instead of standard output")
    p.add_argument("--state-bound", type=int, default=DEFAULT_STATE_BOUND)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("validate", help="cross-check random semi-algorithm runs against the oracle")
    paired(p)
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (0..n-1)")
    p.add_argument("--max-steps", type=int, default=DEFAULT_MAX_STEPS)
    p.add_argument("--state-bound", type=int, default=DEFAULT_STATE_BOUND)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="archsubst: %(message)s", stream=sys.stderr)
    if getattr(args, "backend", None) == "cython":
        from .fixpoint import BACKENDS

        if "cython" not in BACKENDS:
            print("archsubst: the compiled backend is not available", file=sys.stderr)
            return EXIT_ERROR
    try:
        return args.func(args)
    except (ArchError, OSError, ValueError) as exc:
        print(f"archsubst: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
