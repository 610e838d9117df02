"""Rules with body-only variables: grounding, shallow lookup, ranked and best-first witness search."""
from __future__ import annotations

import heapq
import itertools
import math
from collections import ChainMap, Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .checker import Proof
from .forward import Closure, Program, ResourceLimit, as_literal, check_rules
from .index import FactIndex, join
from .kb import Derivation, KnowledgeBase, Rule
from .logic import Atom, Const, Literal, Term, Var, match_atom
from .proofs import literal_proof

DEFAULT_GROUNDING_CEILING = 10**6


class GroundingLimitExceeded(ResourceLimit):
    guard = "grounding-ceiling"

    def __init__(self, domain_size: int, existentials: int, bound: int):
        self.domain_size = domain_size
        self.existentials = existentials
        self.bound = bound
        super().__init__(
            f"grounding would produce {domain_size}^{existentials} rules, above the ceiling of {bound}"
        )


def classify_rule(rule: Rule) -> Tuple[str, int]:
    """``('forward', 0)`` for safe rules, else ``('query', N)`` with N the widest disjunct's existential count."""
    n = max((len(rule.disjunct_existentials(j)) for j in range(len(rule.body))), default=0)
    return ("query", n) if n else ("forward", 0)


def ground_existentials(
    rule: Rule,
    domain: Union[Iterable[Const], Mapping[str, Iterable[Const]]],
    ceiling: int = DEFAULT_GROUNDING_CEILING,
) -> List[Rule]:
    """One safe rule per assignment of the rule's existentials to domain constants.

    ``domain`` is either one collection shared by every existential or a
    mapping from existential name to its own collection.
    """
    if not rule.existentials:
        return [rule]
    return [g for _, g in _ground_pairs(rule, domain, ceiling)]


def _ground_pairs(rule, domain, ceiling):
    exs = rule.existentials
    if isinstance(domain, Mapping):
        pools = [sorted(domain[v], key=str) for v in exs]
    else:
        shared = sorted(domain, key=str)
        pools = [shared] * len(exs)
    total = math.prod(len(p) for p in pools)
    if total > ceiling:
        raise GroundingLimitExceeded(max(len(p) for p in pools), len(exs), ceiling)
    out = []
    for combo in itertools.product(*pools):
        s = dict(zip(exs, combo))
        body = tuple(tuple(lit.substitute(s) for lit in c) for c in rule.body)
        out.append((s, Rule(rule.heads, body, rule.disjunctive, rule.span)))
    return out


def existential_domains(kb: KnowledgeBase, rule: Rule) -> Dict[str, Tuple[Const, ...]]:
    """Sort-respecting grounding domain for each existential of ``rule``."""
    lits = [lit for c in rule.body for lit in c]
    return {v: kb.domain_for(lits, v) for v in rule.existentials}


@dataclass
class GroundProgram:
    """A knowledge base's rules with every existential grounded out."""

    rules: List[Rule]
    origin: Dict[Rule, Tuple[Rule, dict]]

    @classmethod
    def build(cls, kb: KnowledgeBase, ceiling: int = DEFAULT_GROUNDING_CEILING) -> "GroundProgram":
        rules: List[Rule] = []
        origin: Dict[Rule, Tuple[Rule, dict]] = {}
        for r in kb.rules:
            if not r.existentials:
                rules.append(r)
                continue
            for s, g in _ground_pairs(r, existential_domains(kb, r), ceiling):
                if g not in origin:
                    origin[g] = (r, s)
                    rules.append(g)
        return cls(rules, origin)

    @property
    def generated(self) -> int:
        return len(self.origin)

    def lift(self, d: Optional[Derivation]) -> Optional[Derivation]:
        if d is None or d.rule not in self.origin:
            return d
        r, s = self.origin[d.rule]
        return Derivation(r, d.disjunct, {**d.subst, **s})


class _LiftedProvenance:
    def __init__(self, provenance, program: GroundProgram):
        self.provenance = provenance
        self.program = program

    def __contains__(self, lit):
        return lit in self.provenance

    def __getitem__(self, lit):
        return self.program.lift(self.provenance[lit])

    def get(self, lit, default=None):
        if lit not in self.provenance:
            return default
        return self.program.lift(self.provenance[lit])


# ---------------------------------------------------------------- shallow


def shallow_query(idx: FactIndex, body: Sequence[Literal], bound: Optional[dict] = None, builtins=None) -> List[dict]:
    """Every extension of ``bound`` satisfying ``body`` against the stored facts alone."""
    return list(join(body, idx, bound or {}, builtins))


# ---------------------------------------------------------------- ranking


class RankingModel:
    """Candidate scores per ``(predicate, position, constant)``.

    Missing entries score ``default``; :meth:`from_facts` yields add-one
    smoothed frequencies.
    """

    def __init__(self, scores: Optional[Mapping[Tuple[str, int, str], float]] = None, default: float = 1.0):
        self.scores = dict(scores or {})
        self.default = default
        for k, v in self.scores.items():
            if not (v >= 0 and math.isfinite(v)):
                raise ValueError(f"score for {k} must be finite and nonnegative, got {v}")

    @classmethod
    def from_facts(cls, facts: Iterable[Literal]) -> "RankingModel":
        counts: Counter = Counter()
        for f in facts:
            for i, a in enumerate(f.atom.args):
                if isinstance(a, Const):
                    counts[(f.atom.pred, i, a.name)] += 1
        return cls({k: v + 1.0 for k, v in counts.items()}, 1.0)

    def score(self, pred: Optional[str], position: int, c: Term) -> float:
        if pred is None:
            return self.default
        return self.scores.get((pred, position, str(c)), self.default)

    def costs(self, pred, position, domain) -> Dict[Term, float]:
        """``-log`` of scores normalised by the best candidate, so every cost is nonnegative."""
        raw = {c: self.score(pred, position, c) for c in domain}
        top = max(raw.values(), default=0.0)
        out = {}
        for c, v in raw.items():
            out[c] = math.inf if v <= 0 or top <= 0 else -math.log(v / top)
        return out


def rank_candidates(m: RankingModel, pred: Optional[str], position: int, domain: Iterable[Term]) -> List[Term]:
    return sorted(domain, key=lambda c: (-m.score(pred, position, c), str(c)))


# ---------------------------------------------------------------- strategies


@dataclass(frozen=True)
class FullGrounding:
    ceiling: int = DEFAULT_GROUNDING_CEILING
    name = "ground"


@dataclass(frozen=True)
class Shallow:
    name = "shallow"


@dataclass(frozen=True)
class TopOneRanked:
    model: Optional[RankingModel] = None
    name = "top1"


@dataclass(frozen=True)
class AStar:
    budget: Optional[int] = None
    model: Optional[RankingModel] = None
    name = "astar"

    def __post_init__(self):
        if self.budget is not None and self.budget < 1:
            raise ValueError("A* budget must be at least 1")


Strategy = Union[FullGrounding, Shallow, TopOneRanked, AStar]

STRATEGIES = {"ground": FullGrounding, "shallow": Shallow, "top1": TopOneRanked, "astar": AStar}

FOUND, NOT_FOUND, EXHAUSTED = "found", "not-found", "budget-exhausted"


@dataclass
class AnswerResult:
    found: bool
    status: str
    witness: Dict[str, Term] = field(default_factory=dict)
    proof: Optional[Proof] = None
    stats: Dict[str, int] = field(default_factory=dict)
    derivation: Optional[Derivation] = None


class Context:
    """Everything a strategy consults for one fact situation.

    ``stored`` holds the facts taken as given; ``closure`` is the least
    model (over the grounded program for full grounding, over the native
    rules otherwise). Planning builds one per branch.
    """

    def __init__(self, kb: KnowledgeBase, stored, closure: Optional[Closure], program: Optional[GroundProgram] = None):
        self.kb = kb
        self._stored = stored
        self.closure = closure
        self.program = program

    @property
    def stored(self) -> FactIndex:
        # planning passes a factory so branches that never need the store skip building it
        if callable(self._stored):
            self._stored = self._stored()
        return self._stored

    def is_given(self, goal: Literal) -> bool:
        if self.closure is not None:
            return goal in self.closure and self.closure.provenance.get(goal) is None
        return goal in self.stored

    def provenance(self):
        prov = self.closure.provenance
        return _LiftedProvenance(prov, self.program) if self.program else prov


def native_closure(kb: KnowledgeBase, facts: Optional[Iterable[Literal]] = None) -> Closure:
    check_rules(kb, allow_existentials=True)
    c = Closure(Program(kb.rules, kb.builtins))
    c.extend(kb.facts if facts is None else facts)
    return c


def grounded_closure(kb: KnowledgeBase, strategy: FullGrounding, facts=None) -> Tuple[Closure, GroundProgram]:
    check_rules(kb, allow_existentials=True)
    gp = GroundProgram.build(kb, strategy.ceiling)
    c = Closure(Program(gp.rules, kb.builtins))
    c.extend(kb.facts if facts is None else facts)
    return c, gp


def make_context(kb: KnowledgeBase, strategy: Strategy, idx: Optional[FactIndex] = None) -> Context:
    stored = idx if idx is not None else FactIndex(kb.facts)
    if isinstance(strategy, Shallow):
        return Context(kb, stored, None)
    if isinstance(strategy, FullGrounding):
        c, gp = grounded_closure(kb, strategy)
        return Context(kb, stored, c, gp)
    return Context(kb, stored, native_closure(kb))


def _roots(kb: KnowledgeBase, goal: Literal):
    """``(rule, disjunct, head binding, search variables)`` for every way a rule could yield ``goal``."""
    key = (goal.positive, goal.atom.pred, len(goal.atom.args))
    for rule, k in kb.rules_by_head.get(key, ()):
        s0 = match_atom(rule.heads[k].atom, goal.atom)
        if s0 is None:
            continue
        for j, conjunct in enumerate(rule.body):
            seen: Dict[str, None] = {}
            for lit in conjunct:
                for v in sorted(lit.variables()):
                    if v not in s0:
                        seen.setdefault(v)
            yield rule, j, s0, list(seen)


def _anchor(conjunct, var, builtins) -> Tuple[Optional[str], int]:
    for lit in conjunct:
        if lit.atom.pred in builtins:
            continue
        for i, a in enumerate(lit.atom.args):
            if isinstance(a, Var) and a.name == var:
                return lit.atom.pred, i
    return None, 0


def _holds(lit: Literal, model: FactIndex, builtins) -> bool:
    if lit.atom.pred in builtins:
        return builtins.evaluate(lit.atom.pred, lit.atom.args) == lit.positive
    return lit in model


def _witness(rule: Rule, j: int, s: dict) -> Dict[str, Term]:
    return {v: s[v] for v in rule.disjunct_existentials(j) if v in s}


def solve(ctx: Context, goal: Literal, strategy: Strategy) -> AnswerResult:
    """Run ``strategy`` for ``goal`` in ``ctx`` without building a proof."""
    kb = ctx.kb
    builtins = kb.builtins
    stats = {"expansions": 0}
    if ctx.is_given(goal):
        return AnswerResult(True, FOUND, {}, None, stats)

    if isinstance(strategy, FullGrounding):
        stats["rules_generated"] = ctx.program.generated
        if goal not in ctx.closure:
            return AnswerResult(False, NOT_FOUND, {}, None, stats)
        d = ctx.program.lift(ctx.closure.provenance[goal])
        w = _witness(d.rule, d.disjunct, d.subst) if d else {}
        return AnswerResult(True, FOUND, w, None, stats, d)

    if isinstance(strategy, Shallow):
        for rule, j, s0, _ in _roots(kb, goal):
            for s in join(rule.body[j], ctx.stored, s0, builtins):
                stats["expansions"] += 1
                d = Derivation(rule, j, s)
                return AnswerResult(True, FOUND, _witness(rule, j, s), None, stats, d)
        return AnswerResult(False, NOT_FOUND, {}, None, stats)

    model = ctx.closure.facts
    ranking = strategy.model or RankingModel.from_facts(kb.facts)

    if isinstance(strategy, TopOneRanked):
        for rule, j, s0, search in _roots(kb, goal):
            conjunct = rule.body[j]
            s = dict(s0)
            for v in search:
                pred, pos = _anchor(conjunct, v, builtins)
                ranked = rank_candidates(ranking, pred, pos, kb.domain_for(conjunct, v))
                stats["expansions"] += 1
                if not ranked:
                    break
                s[v] = ranked[0]
            else:
                if all(_holds(lit.substitute(s), model, builtins) for lit in conjunct):
                    d = Derivation(rule, j, s)
                    return AnswerResult(True, FOUND, _witness(rule, j, s), None, stats, d)
        return AnswerResult(False, NOT_FOUND, {}, None, stats)

    if isinstance(strategy, AStar):
        return _astar(ctx, goal, strategy, ranking, stats)
    raise TypeError(f"unknown strategy {strategy!r}")


def _astar(ctx, goal, strategy, ranking, stats):
    kb = ctx.kb
    builtins = kb.builtins
    model = ctx.closure.facts
    roots = list(_roots(kb, goal))
    plans = []
    for rule, j, s0, search in roots:
        conjunct = rule.body[j]
        steps = []
        for depth, v in enumerate(search):
            pred, pos = _anchor(conjunct, v, builtins)
            domain = kb.domain_for(conjunct, v)
            costs = ranking.costs(pred, pos, domain)
            order = rank_candidates(ranking, pred, pos, domain)
            assigned = set(s0) | set(search[: depth + 1])
            # literals that become fully ground once this variable is set
            ready = [lit for lit in conjunct if v in lit.variables() and lit.variables() <= assigned]
            steps.append((v, [(c, costs[c]) for c in order], ready))
        ground_now = [lit for lit in conjunct if lit.variables() <= set(s0)]
        plans.append((rule, j, s0, steps, ground_now))

    tie = itertools.count()
    queue = []
    for p, (rule, j, s0, steps, ground_now) in enumerate(plans):
        if all(_holds(lit.substitute(s0), model, builtins) for lit in ground_now):
            heapq.heappush(queue, (0.0, next(tie), p, 0, s0))
    budget = strategy.budget
    while queue:
        if budget is not None and stats["expansions"] >= budget:
            return AnswerResult(False, EXHAUSTED, {}, None, stats)
        cost, _, p, depth, s = heapq.heappop(queue)
        stats["expansions"] += 1
        rule, j, _, steps, _ = plans[p]
        if depth == len(steps):
            d = Derivation(rule, j, s)
            return AnswerResult(True, FOUND, _witness(rule, j, s), None, stats, d)
        v, cands, ready = steps[depth]
        for c, step_cost in cands:
            if math.isinf(step_cost):
                continue
            s2 = dict(s)
            s2[v] = c
            if all(_holds(lit.substitute(s2), model, builtins) for lit in ready):
                heapq.heappush(queue, (cost + step_cost, next(tie), p, depth + 1, s2))
    return AnswerResult(False, NOT_FOUND, {}, None, stats)


def result_proof(ctx: Context, goal: Literal, result: AnswerResult) -> Proof:
    """Checkable proof for a successful :func:`solve` result."""
    if result.derivation is None or ctx.closure is None:
        prov = {goal: result.derivation} if result.derivation else {}
    else:
        base = ctx.provenance()
        prov = base
        # a witness whose support runs back through the goal would make the proof circular;
        # the closure's own first derivation is well-founded, so use it instead
        if not _reaches(base, result.derivation.premises(), goal, ctx.kb.builtins):
            prov = ChainMap({goal: result.derivation}, base)
    return literal_proof(prov, goal, ctx.kb.builtins)


def _reaches(provenance, premises, goal: Literal, builtins) -> bool:
    seen = set()
    stack = [p for p in premises if p.atom.pred not in builtins]
    while stack:
        cur = stack.pop()
        if cur == goal:
            return True
        if cur in seen:
            continue
        seen.add(cur)
        d = provenance.get(cur)
        if d is not None:
            stack.extend(p for p in d.premises() if p.atom.pred not in builtins)
    return False


def answer(
    kb: KnowledgeBase,
    idx: Optional[FactIndex],
    goal: Union[Atom, Literal],
    strategy: Strategy,
    with_proof: bool = True,
) -> AnswerResult:
    """Decide ``goal`` with ``strategy``; found answers carry a proof when ``with_proof``."""
    goal = as_literal(goal)
    if not goal.is_ground():
        raise ValueError(f"goal {goal} is not ground")
    ctx = make_context(kb, strategy, idx)
    res = solve(ctx, goal, strategy)
    if ctx.closure is not None:
        res.stats["facts_derived"] = len(ctx.closure.facts)
    if res.found and with_proof:
        res.proof = result_proof(ctx, goal, res)
    return res
