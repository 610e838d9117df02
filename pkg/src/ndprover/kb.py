"""Rules, disjunctive facts and knowledge bases."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Tuple

from .index import DEFAULT_BUILTINS, BuiltinRegistry
from .logic import (
    Const,
    Exists,
    ForAll,
    Formula,
    Func,
    Implies,
    Literal,
    Var,
    conj,
    disj,
    term_constants,
)


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


def _ordered_vars(literals: Iterable[Literal]) -> List[str]:
    seen: Dict[str, None] = {}

    def visit(t):
        if isinstance(t, Var):
            seen.setdefault(t.name)
        elif isinstance(t, Func):
            for a in t.args:
                visit(a)

    for lit in literals:
        for a in lit.atom.args:
            visit(a)
    return list(seen)


@dataclass(frozen=True)
class Rule:
    """``heads <- body`` with a DNF body.

    Heads are conjoined, or disjoined when ``disjunctive`` is set. Every
    variable is implicitly universal; body variables absent from the heads
    are existentials of the disjunct they occur in.
    """

    heads: Tuple[Literal, ...]
    body: Tuple[Tuple[Literal, ...], ...]
    disjunctive: bool = False
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "heads", tuple(self.heads))
        object.__setattr__(self, "body", tuple(tuple(c) for c in self.body))

    @cached_property
    def universals(self) -> Tuple[str, ...]:
        return tuple(_ordered_vars(self.heads))

    def disjunct_existentials(self, j: int) -> Tuple[str, ...]:
        head = set(self.universals)
        return tuple(v for v in _ordered_vars(self.body[j]) if v not in head)

    @cached_property
    def existentials(self) -> Tuple[str, ...]:
        seen: Dict[str, None] = {}
        for j in range(len(self.body)):
            for v in self.disjunct_existentials(j):
                seen.setdefault(v)
        return tuple(seen)

    def to_formula(self) -> Formula:
        parts = []
        for j, lits in enumerate(self.body):
            f = conj([lit.to_formula() for lit in lits])
            for v in reversed(self.disjunct_existentials(j)):
                f = Exists(v, f)
            parts.append(f)
        heads = [h.to_formula() for h in self.heads]
        out: Formula = Implies(disj(parts), disj(heads) if self.disjunctive else conj(heads))
        for v in reversed(self.universals):
            out = ForAll(v, out)
        return out

    def __str__(self):
        sep = " | " if self.disjunctive else " & "
        head = sep.join(map(str, self.heads))
        body = " ; ".join(" & ".join(map(str, c)) for c in self.body)
        return f"{head} <- {body}."


@dataclass(frozen=True)
class DisjunctiveFact:
    """A ground disjunction ``alt1 | alt2 | ...``.

    ``origin`` is set when the disjunction came from firing a disjunctive
    rule inside a branch rather than from the knowledge base itself.
    """

    alternatives: Tuple[Literal, ...]
    origin: Optional[object] = field(default=None, compare=False, repr=False)
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))

    def to_formula(self) -> Formula:
        return disj([a.to_formula() for a in self.alternatives])

    def __str__(self):
        return " | ".join(map(str, self.alternatives)) + "."


@dataclass(frozen=True, eq=False)
class Derivation:
    """How a fact was first obtained: rule, disjunct index, and the full binding."""

    rule: Rule
    disjunct: int
    subst: dict

    def premises(self) -> Tuple[Literal, ...]:
        return tuple(lit.substitute(self.subst) for lit in self.rule.body[self.disjunct])


def _literal_constants(lits, acc):
    for lit in lits:
        for a in lit.atom.args:
            term_constants(a, acc)


@dataclass(frozen=True, eq=False)
class KnowledgeBase:
    facts: Tuple[Literal, ...] = ()
    rules: Tuple[Rule, ...] = ()
    disjunctive_facts: Tuple[DisjunctiveFact, ...] = ()
    disjunctive_rules: Tuple[Rule, ...] = ()
    builtins: BuiltinRegistry = field(default=DEFAULT_BUILTINS, repr=False)

    def __post_init__(self):
        for lit in self.facts:
            if not lit.is_ground():
                raise ValueError(f"fact {lit} is not ground")
        object.__setattr__(self, "facts", tuple(dict.fromkeys(self.facts)))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "disjunctive_facts", tuple(self.disjunctive_facts))
        object.__setattr__(self, "disjunctive_rules", tuple(self.disjunctive_rules))

    def __eq__(self, other):
        if not isinstance(other, KnowledgeBase):
            return NotImplemented
        return (
            set(self.facts) == set(other.facts)
            and set(self.rules) == set(other.rules)
            and set(self.disjunctive_facts) == set(other.disjunctive_facts)
            and set(self.disjunctive_rules) == set(other.disjunctive_rules)
        )

    __hash__ = None

    def all_rules(self) -> Tuple[Rule, ...]:
        return self.rules + self.disjunctive_rules

    def with_facts(self, extra: Iterable[Literal]) -> "KnowledgeBase":
        return replace(self, facts=self.facts + tuple(extra))

    @cached_property
    def domain(self) -> frozenset:
        """Every constant mentioned anywhere, integers included."""
        acc: set = set()
        _literal_constants(self.facts, acc)
        for d in self.disjunctive_facts:
            _literal_constants(d.alternatives, acc)
        for r in self.all_rules():
            _literal_constants(r.heads, acc)
            for c in r.body:
                _literal_constants(c, acc)
        return frozenset(acc)

    @cached_property
    def position_sorts(self) -> Dict[Tuple[str, int], str]:
        """``(pred, position) -> 'int' | 'object'``, fixed by the first constant seen there."""
        sorts: Dict[Tuple[str, int], str] = {}

        def scan(lits):
            for lit in lits:
                for i, a in enumerate(lit.atom.args):
                    if isinstance(a, Const):
                        sorts.setdefault((lit.atom.pred, i), "int" if a.is_int else "object")
                    elif isinstance(a, Func):
                        sorts.setdefault((lit.atom.pred, i), "object")

        scan(self.facts)
        for d in self.disjunctive_facts:
            scan(d.alternatives)
        for r in self.all_rules():
            scan(r.heads)
            for c in r.body:
                scan(c)
        return sorts

    @cached_property
    def int_domain(self) -> Tuple[Const, ...]:
        return tuple(sorted((c for c in self.domain if c.is_int), key=lambda c: c.value))

    @cached_property
    def object_domain(self) -> Tuple[Const, ...]:
        return tuple(sorted((c for c in self.domain if not c.is_int), key=lambda c: c.name))

    def variable_sort(self, literals, var: str) -> str:
        for lit in literals:
            if lit.atom.pred in self.builtins:
                continue
            for i, a in enumerate(lit.atom.args):
                if isinstance(a, Var) and a.name == var:
                    return self.position_sorts.get((lit.atom.pred, i), "object")
        return "object"

    def domain_for(self, literals, var: str) -> Tuple[Const, ...]:
        """Grounding domain of ``var``: integers for integer positions, objects otherwise."""
        if self.variable_sort(literals, var) == "int":
            return self.int_domain
        return self.object_domain

    @cached_property
    def rules_by_head(self) -> Dict[Tuple[bool, str, int], List[Tuple[Rule, int]]]:
        table: Dict[tuple, List[Tuple[Rule, int]]] = {}
        for r in self.rules:
            for k, h in enumerate(r.heads):
                table.setdefault((h.positive, h.atom.pred, len(h.atom.args)), []).append((r, k))
        return table

    def statement_count(self) -> int:
        return len(self.facts) + len(self.rules) + len(self.disjunctive_facts) + len(self.disjunctive_rules)
