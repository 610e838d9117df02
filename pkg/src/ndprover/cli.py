"""Command-line entry point: ``ndprover {check,run,query,plan,bench}``."""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from .checker import rules_used, verify_proof
from .forward import Contradiction, ResourceLimit, UnsafeRuleError, fixpoint
from .index import BuiltinError
from .planning import LeafLimitExceeded, decide_guaranteed, plan_proof, render_trace
from .query import EXHAUSTED, STRATEGIES, AStar, answer
from .syntax import ParseError, parse_kb, parse_literal, parse_proof, serialize

OK, NEGATIVE, USAGE, GUARD = 0, 1, 2, 3


@dataclass
class CommandOutcome:
    code: int
    verdict: Optional[str] = None
    lines: List[str] = field(default_factory=list)
    payload: Optional[str] = None
    errors: List[str] = field(default_factory=list)
    quiet: bool = False


def format_report(outcome: CommandOutcome, verbosity: int = 1) -> str:
    """``verbosity`` 0 prints only the verdict word; stat lines read ``stat: key=value``."""
    if verbosity <= 0:
        return f"{outcome.verdict}\n" if outcome.verdict else ""
    return "".join(line + "\n" for line in outcome.lines)


def _stats(out: CommandOutcome, stats) -> None:
    for k, v in stats.items():
        out.lines.append(f"stat: {k}={v}")


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_kb(path: str, out: CommandOutcome):
    kb, diags = parse_kb(_read(path), path)
    out.errors.extend(str(d) for d in diags)
    return kb


def _write_proof(path: str, proof, out: CommandOutcome) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize(proof))
    out.payload = path
    out.lines.append(f"proof: {path}")


def cmd_check(args) -> CommandOutcome:
    proof, _ = parse_proof(_read(args.proof), args.proof)
    verdict = verify_proof(proof)
    if not verdict:
        return CommandOutcome(NEGATIVE, "INVALID", [f"INVALID {verdict.violation}"])
    out = CommandOutcome(OK, "VALID", ["VALID", f"fragment: {rules_used(proof)}"])
    _stats(out, {"steps": len(proof.steps)})
    return out


def cmd_run(args) -> CommandOutcome:
    out = CommandOutcome(OK)
    kb = _load_kb(args.kb, out)
    try:
        closure = fixpoint(kb, allow_existentials=True)
    except Contradiction as e:
        out.code = NEGATIVE
        out.lines.append(str(e))
        return out
    given = set(kb.facts)
    facts = closure.sorted_facts()
    shown = facts if args.dump else [f for f in facts if f not in given]
    out.lines.extend(f"{f}." for f in shown)
    _stats(out, {"facts": len(facts), "derived": len(facts) - len(given), "rounds": closure.rounds})
    return out


def _strategy(args):
    cls = STRATEGIES[args.strategy]
    if cls is AStar:
        return AStar(budget=args.budget)
    return cls()


def cmd_query(args) -> CommandOutcome:
    out = CommandOutcome(OK)
    kb = _load_kb(args.kb, out)
    goal = parse_literal(args.goal)
    res = answer(kb, None, goal, _strategy(args), with_proof=bool(args.emit_proof))
    if res.status == EXHAUSTED:
        out.code, out.verdict = GUARD, "NOT-FOUND"
        out.lines.append(f"resource guard tripped: astar-budget ({args.budget} expansions)")
        _stats(out, res.stats)
        return out
    if not res.found:
        out.code, out.verdict = NEGATIVE, "NOT-FOUND"
        out.lines.append(f"NOT-FOUND {goal}")
        _stats(out, res.stats)
        return out
    out.verdict = "FOUND"
    out.lines.append(f"FOUND {goal}")
    if res.witness:
        out.lines.append("witness: " + ", ".join(f"{k}={v}" for k, v in res.witness.items()))
    _stats(out, res.stats)
    if args.emit_proof:
        _write_proof(args.emit_proof, res.proof, out)
    return out


def cmd_plan(args) -> CommandOutcome:
    out = CommandOutcome(OK)
    kb = _load_kb(args.kb, out)
    goal = parse_literal(args.goal)
    strategy = _strategy(args)
    res = decide_guaranteed(kb, goal, strategy, max_leaves=args.max_leaves)
    out.verdict = "GUARANTEED" if res.guaranteed else "NOT-GUARANTEED"
    out.code = OK if res.guaranteed else NEGATIVE
    out.lines.append(f"{out.verdict} {goal}")
    if args.trace:
        out.lines.extend(render_trace(res.tree, goal).rstrip("\n").split("\n"))
    _stats(out, res.stats)
    if args.emit_proof and res.guaranteed:
        _write_proof(args.emit_proof, plan_proof(kb, goal, res.tree, strategy), out)
    return out


def cmd_bench(args) -> CommandOutcome:
    from .bench import emit_csv, measure_scaling, specs_for

    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise _Usage(f"--sizes must be a comma-separated list of integers, got {args.sizes!r}")
    if not sizes or min(sizes) < 1:
        raise _Usage("--sizes needs at least one positive integer")
    try:
        specs = specs_for(args.fragment, sizes, seed=args.seed, existentials=args.existentials)
        report = measure_scaling(specs, repetitions=args.repetitions)
    except ValueError as e:
        raise _Usage(str(e))
    emit_csv(report, args.out)
    out = CommandOutcome(OK, lines=[f"csv: {args.out}", f"environment: {report.environment}"], payload=args.out)
    _stats(out, {"rows": len(report.rows)})
    return out


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.format_usage()}{self.prog}: error: {message}")


def _positive(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ndprover", description="Natural deduction proof checking and fragment reasoning engines.")
    p.add_argument("--quiet", "-q", action="store_true", help="print only the verdict word")
    p.add_argument("--threads", type=_positive, default=None,
                   help="cap on engine threads (default 1, or NDPROVER_THREADS)")
    # --quiet is accepted before or after the subcommand
    common = _Parser(add_help=False)
    common.add_argument("--quiet", "-q", action="store_true", default=argparse.SUPPRESS,
                        help="print only the verdict word")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="verify a proof document")
    c.add_argument("proof")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", parents=[common], help="forward fixpoint of a knowledge base")
    r.add_argument("kb")
    r.add_argument("--dump", action="store_true", help="print every fact, given ones included")
    r.set_defaults(func=cmd_run)

    for name, fn, default in (("query", cmd_query, None), ("plan", cmd_plan, "ground")):
        q = sub.add_parser(name, parents=[common], help="answer a goal" if name == "query" else "decide a goal under all cases")
        q.add_argument("kb")
        q.add_argument("goal")
        q.add_argument("--strategy", choices=sorted(STRATEGIES), default=default, required=default is None)
        q.add_argument("--budget", type=_positive, default=None, help="A* expansion budget")
        q.add_argument("--emit-proof", metavar="OUT.ndp")
        if name == "plan":
            q.add_argument("--trace", action="store_true", help="print the case tree")
            q.add_argument("--max-leaves", type=_positive, default=2**20)
        q.set_defaults(func=fn)

    b = sub.add_parser("bench", parents=[common], help="scaling measurements to CSV")
    b.add_argument("--fragment", choices=["forward", "query", "planning"], required=True)
    b.add_argument("--sizes", required=True, help="comma list: body literals, D, or k")
    b.add_argument("--out", required=True)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repetitions", type=int, default=3)
    b.add_argument("--existentials", type=_positive, default=2, help="N for query benchmarks")
    b.set_defaults(func=cmd_bench)
    return p


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("NDPROVER_THREADS")
    if env is None:
        return 1
    try:
        return _positive(env)
    except (ValueError, argparse.ArgumentTypeError):
        raise _Usage(f"NDPROVER_THREADS must be a positive integer, got {env!r}")


def execute(argv: Sequence[str]) -> CommandOutcome:
    """Run one command; never raises for user-facing failures."""
    try:
        args = build_parser().parse_args(list(argv))
        # engines are sequential; the cap is validated so scripts fail early on bad values
        _threads(args)
    except _Usage as e:
        return CommandOutcome(USAGE, errors=[str(e)])
    out = _dispatch(args)
    out.quiet = args.quiet
    return out


def _dispatch(args) -> CommandOutcome:
    try:
        return args.func(args)
    except _Usage as e:
        return CommandOutcome(USAGE, errors=[str(e)])
    except ParseError as e:
        return CommandOutcome(USAGE, errors=[str(d) for d in e.diagnostics])
    except OSError as e:
        return CommandOutcome(USAGE, errors=[f"{e.filename}: {e.strerror}"])
    except (UnsafeRuleError, BuiltinError) as e:
        return CommandOutcome(USAGE, errors=[str(e)])
    except LeafLimitExceeded as e:
        out = CommandOutcome(GUARD, errors=[f"resource guard tripped: {e.guard}: {e}"])
        if e.partial is not None:
            out.lines.extend(render_trace(e.partial).rstrip("\n").split("\n"))
        return out
    except ResourceLimit as e:
        return CommandOutcome(GUARD, errors=[f"resource guard tripped: {e.guard}: {e}"])
    except Contradiction as e:
        return CommandOutcome(NEGATIVE, errors=[str(e)])


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = execute(argv)
    sys.stdout.write(format_report(out, 0 if out.quiet else 1))
    for e in out.errors:
        print(e, file=sys.stderr)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
