"""Seeded theory generators and scaling measurements."""
from __future__ import annotations

import csv
import gc
import itertools
import platform
import random
import statistics
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, List, Sequence

from .forward import ResourceLimit, fixpoint
from .kb import DisjunctiveFact, KnowledgeBase, Rule
from .logic import Atom, Const, Literal, Var
from .planning import decide_guaranteed
from .query import FullGrounding, answer

CSV_HEADER = [
    "fragment", "seed", "param_D", "param_N", "param_k",
    "rules", "ground_rules", "leaves", "facts_derived", "millis",
]


@dataclass(frozen=True)
class TheorySpec:
    """Size parameters for one generated theory.

    ``shape`` selects the structured scaling family (``"scaling"``) or
    small random theories used as oracle fodder (``"random"``).
    """

    fragment: str
    predicates: int = 4
    constants: int = 8
    rules: int = 10
    body_width: int = 2
    existentials: int = 0
    disjunctions: int = 0
    seed: int = 0
    shape: str = "scaling"

    def __post_init__(self):
        if self.fragment not in ("forward", "query", "planning"):
            raise ValueError(f"unknown fragment {self.fragment!r}")
        for name in ("predicates", "constants", "body_width"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.rules < 0 or self.existentials < 0 or self.disjunctions < 0:
            raise ValueError("counts must be nonnegative")


def _lit(pred, *args, positive=True) -> Literal:
    return Literal(Atom(pred, args), positive)


def _consts(n, prefix="c") -> List[Const]:
    return [Const(f"{prefix}{i}") for i in range(n)]


# ---------------------------------------------------------------- structured families


# body atoms come from this many immediately preceding atoms; uniform draws over the whole
# prefix turn the timing into a measure of cache misses once the program outgrows L2
FORWARD_WINDOW = 64


def _forward_chain(spec: TheorySpec, rng: random.Random) -> KnowledgeBase:
    """Ground Horn program: atom i is q_(i mod P)(c_i); rule r derives a fresh atom from recent earlier ones."""
    facts_n = spec.constants
    if spec.body_width > facts_n:
        raise ValueError(
            f"body width {spec.body_width} exceeds the {facts_n} base facts it could draw on"
        )
    atoms = [_lit(f"q{i % spec.predicates}", Const(f"c{i}")) for i in range(facts_n + spec.rules)]
    rules = []
    for r in range(spec.rules):
        i = facts_n + r
        lo = max(0, i - max(FORWARD_WINDOW, spec.body_width))
        body = tuple(atoms[k] for k in rng.sample(range(lo, i), spec.body_width))
        rules.append(Rule((atoms[i],), (body,)))
    return KnowledgeBase(tuple(atoms[:facts_n]), tuple(rules))


def _query_family(spec: TheorySpec, rng: random.Random) -> KnowledgeBase:
    """Binary relations over exactly D constants plus rules with exactly N body-only variables."""
    n = spec.existentials
    if n < 1:
        raise ValueError("query theories need at least one existential")
    if spec.body_width < n:
        raise ValueError(f"body width {spec.body_width} cannot mention {n} existentials")
    consts = _consts(spec.constants)
    preds = [f"r{i}" for i in range(spec.predicates)]
    facts = [_lit(preds[i % len(preds)], c, consts[(i + 1) % len(consts)]) for i, c in enumerate(consts)]
    for _ in range(2 * len(consts)):
        facts.append(_lit(rng.choice(preds), rng.choice(consts), rng.choice(consts)))
    x = Var("X")
    rules = []
    for r in range(spec.rules):
        exs = [Var(f"E{j}") for j in range(n)]
        chain = [x] + exs
        body = [_lit(rng.choice(preds), chain[j], chain[j + 1]) for j in range(n)]
        while len(body) < spec.body_width:
            body.append(_lit(rng.choice(preds), rng.choice(chain), rng.choice(chain)))
        rules.append(Rule((_lit(f"h{r}", x),), (tuple(body),)))
    return KnowledgeBase(tuple(facts), tuple(rules))


def _planning_family(spec: TheorySpec, rng: random.Random) -> KnowledgeBase:
    """k binary disjunctions, each of which must be split before the goal follows."""
    k = spec.disjunctions
    if k < 1:
        raise ValueError("planning theories need at least one disjunctive fact")
    cs = _consts(k)
    x = Var("X")
    dfacts = tuple(DisjunctiveFact((_lit("left", c), _lit("right", c))) for c in cs)
    rules = [
        Rule((_lit("done", x),), ((_lit("left", x),), (_lit("right", x),))),
        Rule((_lit("goal", Const("g")),), (tuple(_lit("done", c) for c in cs),)),
    ]
    # seeded noise that never touches the goal chain
    noise = _consts(max(spec.constants, 1), "n")
    facts = tuple(_lit("noise", rng.choice(noise), rng.choice(noise)) for _ in range(spec.constants))
    for i in range(spec.rules):
        rules.append(Rule((_lit(f"echo{i}", x),), ((_lit("noise", x, Var("Y")),),)))
    return KnowledgeBase(facts, tuple(rules), dfacts)


# ---------------------------------------------------------------- random families


def _arities(spec, rng):
    return {f"p{i}": rng.randint(1, 2) for i in range(spec.predicates)}


def _random_args(rng, arity, pool):
    return tuple(rng.choice(pool) for _ in range(arity))


def _random_facts(rng, arities, consts, count):
    preds = sorted(arities)
    return tuple(_lit(p, *_random_args(rng, arities[p], consts)) for p in (rng.choice(preds) for _ in range(count)))


def _safe_rule(rng, arities, consts, width, extra_vars=()):
    """A rule whose head variables all occur in positive body literals; ``extra_vars`` become body-only."""
    preds = sorted(arities)
    hp = rng.choice(preds)
    head_vars = [Var(f"X{i}") for i in range(arities[hp])]
    head = _lit(hp, *head_vars)
    need = list(head_vars) + list(extra_vars)
    pool = list(head_vars) + list(extra_vars)
    body = []
    while need or len(body) < width:
        bp = rng.choice(preds)
        args = []
        for _ in range(arities[bp]):
            if need:
                args.append(need.pop(0))
            elif rng.random() < 0.15:
                args.append(rng.choice(consts))
            else:
                args.append(rng.choice(pool))
        body.append(_lit(bp, *args))
    return Rule((head,), (tuple(body),))


def _random_forward(spec, rng):
    arities = _arities(spec, rng)
    consts = _consts(spec.constants)
    facts = _random_facts(rng, arities, consts, rng.randint(1, 2 * spec.constants))
    rules = tuple(_safe_rule(rng, arities, consts, rng.randint(1, spec.body_width)) for _ in range(spec.rules))
    return KnowledgeBase(facts, rules)


def _random_query(spec, rng):
    arities = {f"p{i}": 2 for i in range(spec.predicates)}
    consts = _consts(spec.constants)
    facts = _random_facts(rng, arities, consts, rng.randint(2, 3 * spec.constants))
    rules = []
    for r in range(spec.rules):
        n = rng.randint(1, max(spec.existentials, 1)) if r == 0 else rng.randint(0, spec.existentials)
        exs = [Var(f"E{j}") for j in range(n)]
        rules.append(_safe_rule(rng, arities, consts, rng.randint(1, spec.body_width) + n, exs))
    return KnowledgeBase(facts, tuple(rules))


def _random_planning(spec, rng):
    arities = {f"p{i}": 1 for i in range(spec.predicates)}
    consts = _consts(spec.constants)
    facts = _random_facts(rng, arities, consts, rng.randint(0, spec.constants))
    atoms = [_lit(p, c) for p in sorted(arities) for c in consts]
    pairs = list(itertools.combinations(atoms, 2))
    if spec.disjunctions > len(pairs):
        raise ValueError(f"{spec.disjunctions} disjunctions requested but only {len(pairs)} distinct pairs exist")
    dfacts = [DisjunctiveFact(pair) for pair in rng.sample(pairs, spec.disjunctions)]
    rules = [_safe_rule(rng, arities, consts, rng.randint(1, spec.body_width)) for _ in range(spec.rules)]
    return KnowledgeBase(facts, tuple(rules), tuple(dfacts))


_FAMILIES = {
    ("forward", "scaling"): _forward_chain,
    ("query", "scaling"): _query_family,
    ("planning", "scaling"): _planning_family,
    ("forward", "random"): _random_forward,
    ("query", "random"): _random_query,
    ("planning", "random"): _random_planning,
}


def generate_theory(spec: TheorySpec) -> KnowledgeBase:
    """Deterministic in ``spec``: equal specs give equal theories."""
    gen = _FAMILIES.get((spec.fragment, spec.shape))
    if gen is None:
        raise ValueError(f"unknown theory shape {spec.shape!r}")
    return gen(spec, random.Random(spec.seed))


def default_goal(spec: TheorySpec, kb: KnowledgeBase) -> Literal:
    if spec.fragment == "planning":
        return _lit("goal", Const("g"))
    if spec.fragment == "query":
        return _lit("h0", Const("c0"))
    return kb.rules[-1].heads[0] if kb.rules else kb.facts[0]


# ---------------------------------------------------------------- measurement


@dataclass
class Row:
    fragment: str
    seed: int
    param_D: object = ""
    param_N: object = ""
    param_k: object = ""
    rules: object = ""
    ground_rules: object = ""
    leaves: object = ""
    facts_derived: object = ""
    millis: object = ""
    guard: str = ""

    def values(self):
        return [getattr(self, k) for k in CSV_HEADER]


@dataclass
class ScalingReport:
    rows: List[Row] = field(default_factory=list)
    environment: str = field(
        default_factory=lambda: f"python {sys.version.split()[0]} on {platform.platform()}, single thread"
    )


def _run(spec: TheorySpec, kb: KnowledgeBase, goal: Literal, row: Row) -> Callable[[], None]:
    if spec.fragment == "forward":
        def go():
            c = fixpoint(kb)
            row.facts_derived = len(c.facts) - len(kb.facts)
    elif spec.fragment == "query":
        def go():
            res = answer(kb, None, goal, FullGrounding(), with_proof=False)
            row.ground_rules = res.stats.get("rules_generated", 0)
            row.facts_derived = res.stats.get("facts_derived", 0) - len(kb.facts)
    else:
        def go():
            res = decide_guaranteed(kb, goal)
            row.leaves = res.stats["leaves"]
    return go


def median_millis(fn: Callable[[], object], repetitions: int) -> float:
    """Median wall time of ``fn`` in milliseconds after one warm-up call, with the cyclic collector paused as timeit does."""
    times = []
    fn()  # warm-up: lazy caches and allocator growth are not part of the measurement
    for _ in range(repetitions):
        gc.collect()
        was_enabled = gc.isenabled()
        gc.disable()
        try:
            t0 = time.perf_counter()
            fn()
            times.append((time.perf_counter() - t0) * 1000.0)
        finally:
            if was_enabled:
                gc.enable()
    return statistics.median(times)


def measure_scaling(specs: Sequence[TheorySpec], repetitions: int = 3) -> ScalingReport:
    """Median wall time over ``repetitions`` runs per spec; guard trips become annotated rows."""
    if repetitions < 3:
        raise ValueError("repetitions must be at least 3")
    report = ScalingReport()
    for spec in specs:
        kb = generate_theory(spec)
        row = Row(spec.fragment, spec.seed, rules=len(kb.rules) + len(kb.disjunctive_rules))
        if spec.fragment == "forward":
            row.param_D = spec.constants
        elif spec.fragment == "query":
            row.param_D, row.param_N = spec.constants, spec.existentials
        else:
            row.param_k = spec.disjunctions
        go = _run(spec, kb, default_goal(spec, kb), row)
        try:
            row.millis = f"{median_millis(go, repetitions):.3f}"
        except ResourceLimit as e:
            row.guard = e.guard
            row.millis = f"guard:{e.guard}"
        report.rows.append(row)
    return report


def emit_csv(report: ScalingReport, path) -> None:
    if not report.rows:
        raise ValueError("report has no rows")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for row in report.rows:
            w.writerow(row.values())


def specs_for(fragment: str, sizes: Sequence[int], seed: int = 0, existentials: int = 2, body_width: int = 2) -> List[TheorySpec]:
    """Scaling specs for the command line: sizes are body literals (forward), D (query) or k (planning)."""
    out = []
    for n in sizes:
        if fragment == "forward":
            out.append(TheorySpec("forward", predicates=8, constants=max(body_width, 16),
                                  rules=max(n // body_width, 1), body_width=body_width, seed=seed))
        elif fragment == "query":
            out.append(TheorySpec("query", predicates=3, constants=n, rules=1,
                                  body_width=max(body_width, existentials), existentials=existentials, seed=seed))
        else:
            out.append(TheorySpec("planning", constants=4, rules=2, disjunctions=n, seed=seed))
    return out
