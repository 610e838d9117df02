"""Safe Horn rules: safety checks, rule merging, and forward chaining.

The closure is computed semi-naively: each round only fires rule
instances that use at least one fact first derived in the previous round.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .checker import Proof
from .index import FactIndex, join
from .kb import Derivation, KnowledgeBase, Rule
from .logic import Atom, Func, Literal, Var, match_atom, term_depth
from .proofs import literal_proof

DEFAULT_MAX_TERM_DEPTH = 16


class ResourceLimit(Exception):
    """An engine guard tripped; ``guard`` names which one."""

    guard = "resource"


class TermDepthExceeded(ResourceLimit):
    guard = "term-depth"


class UnsafeRuleError(ValueError):
    pass


class Contradiction(Exception):
    """Both a literal and its complement were derived."""

    def __init__(self, literal: Literal, provenance, complement_provenance):
        self.literal = literal
        self.provenance = provenance
        self.complement_provenance = complement_provenance
        super().__init__(f"contradiction: both {literal} and {literal.negate()} derived")


@dataclass(frozen=True)
class SafetyVerdict:
    safe: bool
    problems: Dict[str, str] = field(default_factory=dict)

    def __bool__(self):
        return self.safe


def _positive_vars(lits: Iterable[Literal], builtins) -> set:
    acc: set = set()
    for lit in lits:
        if lit.positive and lit.atom.pred not in builtins:
            acc |= lit.variables()
    return acc


def range_problems(rule: Rule, builtins=None) -> Dict[str, str]:
    """Variables no evaluation could bind: head or filter variables without a positive body occurrence."""
    from .index import DEFAULT_BUILTINS

    builtins = builtins if builtins is not None else DEFAULT_BUILTINS
    problems: Dict[str, str] = {}
    head_vars = set(rule.universals)
    for conjunct in rule.body:
        bound = _positive_vars(conjunct, builtins)
        for v in sorted(head_vars - bound):
            problems[v] = "head variable not bound by a positive body literal"
        for lit in conjunct:
            if not lit.positive or lit.atom.pred in builtins:
                for v in sorted(lit.variables() - bound):
                    problems.setdefault(v, "filter variable not bound by a positive body literal")
    return problems


def validate_safety(rule: Rule, builtins=None) -> SafetyVerdict:
    """Two-sided safety: body variables occur in the head, head variables in a positive body literal."""
    problems = range_problems(rule, builtins)
    head_vars = set(rule.universals)
    for conjunct in rule.body:
        for lit in conjunct:
            for v in sorted(lit.variables() - head_vars):
                problems.setdefault(v, "body variable absent from the head")
    return SafetyVerdict(not problems, problems)


# ---------------------------------------------------------------- merging


def _canonical(lits: Sequence[Literal], names: Dict[str, str]):
    def visit(t):
        if isinstance(t, Var):
            names.setdefault(t.name, f"_{len(names)}")
        elif isinstance(t, Func):
            for a in t.args:
                visit(a)

    for lit in lits:
        for a in lit.atom.args:
            visit(a)
    s = {k: Var(v) for k, v in names.items()}
    return tuple(lit.substitute(s) for lit in lits)


def _rename(lits, mapping):
    s = {k: Var(v) for k, v in mapping.items()}
    return tuple(lit.substitute(s) for lit in lits)


def merge_rules(rules: Sequence[Rule]) -> List[Rule]:
    """Merge rules with alpha-equivalent bodies (conjoin heads), then rules
    with alpha-equivalent heads (disjoin bodies)."""
    by_body: Dict[tuple, Tuple[Rule, Dict[str, str], list]] = {}
    order: List[tuple] = []
    for r in rules:
        names: Dict[str, str] = {}
        key = tuple(_canonical(c, names) for c in r.body)
        if key not in by_body:
            by_body[key] = (r, names, list(r.heads))
            order.append(key)
            continue
        first, first_names, heads = by_body[key]
        inverse = {v: k for k, v in first_names.items()}
        to_first = {k: inverse[v] for k, v in names.items()}
        for h in _rename(r.heads, to_first):
            if h not in heads:
                heads.append(h)
    stage: List[Rule] = []
    for key in order:
        first, _, heads = by_body[key]
        stage.append(Rule(tuple(heads), first.body, first.disjunctive, first.span))

    by_head: Dict[tuple, Tuple[Rule, Dict[str, str], list]] = {}
    order = []
    for r in stage:
        names = {}
        key = (r.disjunctive, _canonical(r.heads, names))
        if key not in by_head:
            by_head[key] = (r, names, list(r.body))
            order.append(key)
            continue
        first, first_names, bodies = by_head[key]
        inverse = {v: k for k, v in first_names.items()}
        to_first = {k: inverse[v] for k, v in names.items()}
        # body-only variables keep their names, made distinct from the first rule's
        taken = set(first_names) | {v for c in bodies for lit in c for v in lit.variables()}
        for v in sorted({v for c in r.body for lit in c for v in lit.variables()} - set(names)):
            new, i = v, 1
            while new in taken:
                new, i = f"{v}_{i}", i + 1
            to_first[v] = new
            taken.add(new)
        for c in r.body:
            c2 = _rename(c, to_first)
            if c2 not in bodies:
                bodies.append(c2)
    return [Rule(first.heads, tuple(bodies), first.disjunctive, first.span) for first, _, bodies in (by_head[k] for k in order)]


# ---------------------------------------------------------------- fixpoint


class _Trigger:
    __slots__ = ("tid", "rule", "disjunct", "literal", "rest")

    def __init__(self, tid, rule, disjunct, literal, rest):
        self.tid = tid
        self.rule = rule
        self.disjunct = disjunct
        self.literal = literal
        self.rest = rest


_WILD = object()


class Program:
    """Rules compiled into a trigger table keyed by the literal a new fact can match."""

    def __init__(self, rules: Sequence[Rule], builtins):
        self.rules = tuple(rules)
        self.builtins = builtins
        self.triggers: Dict[tuple, List[_Trigger]] = {}
        self.static: List[Tuple[Rule, int]] = []
        self.deep_heads = {r for r in self.rules if any(
            isinstance(a, Func) for h in r.heads for a in h.atom.args)}
        tid = 0
        for r in self.rules:
            for j, conjunct in enumerate(r.body):
                fired = False
                for i, lit in enumerate(conjunct):
                    if lit.atom.pred in builtins:
                        continue
                    args = lit.atom.args
                    first = args[0] if args and args[0].is_ground() else _WILD
                    key = (lit.positive, lit.atom.pred, len(args), first)
                    rest = conjunct[:i] + conjunct[i + 1 :]
                    self.triggers.setdefault(key, []).append(_Trigger(tid, r, j, lit, rest))
                    tid += 1
                    fired = True
                if not fired:
                    self.static.append((r, j))

    def triggers_for(self, fact: Literal) -> Iterable[_Trigger]:
        args = fact.atom.args
        base = (fact.positive, fact.atom.pred, len(args))
        exact = self.triggers.get(base + (args[0] if args else _WILD,), ())
        wild = self.triggers.get(base + (_WILD,), ()) if args else ()
        if not exact:
            return wild
        if not wild:
            return exact
        return heapq.merge(exact, wild, key=lambda t: t.tid)


class Closure:
    """Least fact set closed under a program, with first-derivation provenance.

    ``extend`` continues the semi-naive iteration from new facts, so a
    closure can be grown incrementally (planning branches do this).
    """

    def __init__(self, program: Program, max_term_depth: int = DEFAULT_MAX_TERM_DEPTH):
        self.program = program
        self.facts = FactIndex()
        self.provenance: Dict[Literal, Optional[Derivation]] = {}
        self.max_term_depth = max_term_depth
        self.rounds = 0
        self.firings = 0

    def copy(self) -> "Closure":
        new = Closure.__new__(Closure)
        new.program = self.program
        new.facts = self.facts.copy()
        new.provenance = dict(self.provenance)
        new.max_term_depth = self.max_term_depth
        new.rounds = self.rounds
        new.firings = self.firings
        return new

    def __contains__(self, lit):
        return lit in self.facts

    @property
    def derived(self) -> frozenset:
        """Facts produced by a rule firing, as opposed to given ones."""
        return frozenset(f for f, d in self.provenance.items() if d is not None)

    def _admit(self, lit, deriv, pending, pending_set):
        if lit in self.facts or lit in pending_set:
            return
        if not lit.is_ground():
            raise UnsafeRuleError(f"derived non-ground literal {lit}; rule is not range-restricted")
        if deriv is not None and deriv.rule in self.program.deep_heads:
            if max(term_depth(a) for a in lit.atom.args) > self.max_term_depth:
                raise TermDepthExceeded(f"term depth exceeds {self.max_term_depth} in {lit}")
        self.provenance[lit] = deriv
        pending_set.add(lit)
        pending.append(lit)

    def _commit(self, pending):
        for lit in pending:
            self.facts.add(lit)
        for lit in pending:
            other = lit.negate()
            if other in self.facts:
                raise Contradiction(lit, self.provenance.get(lit), self.provenance.get(other))

    def _fire_static(self, pending, pending_set):
        prog = self.program
        for r, j in prog.static:
            for s in join(r.body[j], self.facts, {}, prog.builtins):
                d = Derivation(r, j, s)
                for h in r.heads:
                    self._admit(h.substitute(s), d, pending, pending_set)

    def extend(self, facts: Iterable[Literal], given: bool = True) -> List[Literal]:
        """Add ``facts`` and run to the fixed point; returns the newly added literals."""
        delta: List[Literal] = []
        seen: set = set()
        for f in facts:
            self._admit(f, None, delta, seen)
        if self.rounds == 0:
            self._fire_static(delta, seen)
        self._commit(delta)
        added = list(delta)
        prog, idx = self.program, self.facts
        while delta:
            self.rounds += 1
            pending: List[Literal] = []
            pending_set: set = set()
            for fact in delta:
                for trig in prog.triggers_for(fact):
                    s0 = match_atom(trig.literal.atom, fact.atom)
                    if s0 is None:
                        continue
                    r = trig.rule
                    for s in join(trig.rest, idx, s0, prog.builtins):
                        self.firings += 1
                        d = Derivation(r, trig.disjunct, s)
                        for h in r.heads:
                            self._admit(h.substitute(s), d, pending, pending_set)
            self._commit(pending)
            added += pending
            delta = pending
        return added

    def extend_naive(self, facts: Iterable[Literal]) -> None:
        """Reference strategy: re-match every rule against all facts until nothing changes."""
        first: List[Literal] = []
        seen: set = set()
        for f in facts:
            self._admit(f, None, first, seen)
        self._commit(first)
        prog = self.program
        while True:
            self.rounds += 1
            pending: List[Literal] = []
            pending_set: set = set()
            for r in prog.rules:
                for j, conjunct in enumerate(r.body):
                    for s in join(conjunct, self.facts, {}, prog.builtins):
                        d = Derivation(r, j, s)
                        for h in r.heads:
                            self._admit(h.substitute(s), d, pending, pending_set)
            if not pending:
                return
            self._commit(pending)

    def sorted_facts(self) -> List[Literal]:
        return sorted(self.facts, key=Literal.sort_key)


def check_rules(kb: KnowledgeBase, allow_existentials: bool) -> None:
    for r in kb.rules:
        problems = range_problems(r, kb.builtins)
        if not problems and not allow_existentials:
            problems = validate_safety(r, kb.builtins).problems
        if problems:
            detail = ", ".join(f"{v}: {why}" for v, why in problems.items())
            raise UnsafeRuleError(f"unsafe rule {r} ({detail})")


def fixpoint(
    kb: KnowledgeBase,
    *,
    allow_existentials: bool = False,
    semi_naive: bool = True,
    max_term_depth: int = DEFAULT_MAX_TERM_DEPTH,
) -> Closure:
    """Least set of ground literals containing ``kb.facts`` and closed under ``kb.rules``.

    Disjunctive facts and rules are ignored here. Raises
    :class:`Contradiction` if a literal and its complement are both derived.
    """
    check_rules(kb, allow_existentials)
    closure = Closure(Program(kb.rules, kb.builtins), max_term_depth)
    if semi_naive:
        closure.extend(kb.facts)
    else:
        closure.extend_naive(kb.facts)
    return closure


def as_literal(goal: Union[Atom, Literal]) -> Literal:
    return goal if isinstance(goal, Literal) else Literal(goal, True)


def entails_with_proof(kb: KnowledgeBase, goal: Union[Atom, Literal]) -> Optional[Proof]:
    """Proof of ``goal`` in the forward fragment, or None if it is not derived."""
    goal = as_literal(goal)
    closure = fixpoint(kb)
    if goal not in closure:
        return None
    return literal_proof(closure.provenance, goal, kb.builtins)
