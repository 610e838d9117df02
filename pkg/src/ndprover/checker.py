"""Step-by-step verification of natural deduction proofs.

A sequent ``(A, C)`` records that every formula of ``C`` follows from the
assumptions ``A``. A proof is a list of steps; each step names a rule,
points at earlier steps, and states the sequent it produces. Besides the
twelve introduction/elimination rules there is one leaf rule, ``Axiom``,
which admits any ``(A, C)`` with ``C`` contained in ``A``.

Rules that keep the assumption set may drop conclusions of their premise
(forgetting proven formulas is always sound), but everything newly
concluded must be justified by the named rule.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Union

from .logic import (
    BOT,
    And,
    Const,
    Exists,
    ForAll,
    Formula,
    Implies,
    Or,
    Term,
    Var,
    apply_substitution,
    constants_of,
    free_variables,
    is_negation,
)

AXIOM = "Axiom"
RULES = (
    "AndIntro",
    "AndElim",
    "OrIntro",
    "OrElim",
    "ImpIntro",
    "ImpElim",
    "ForAllIntro",
    "ForAllElim",
    "ExistsIntro",
    "ExistsElim",
    "BottomIntro",
    "BottomElim",
)
SYMBOLS = {
    AXIOM: "Axiom",
    "AndIntro": "∧-Intro",
    "AndElim": "∧-Elim",
    "OrIntro": "∨-Intro",
    "OrElim": "∨-Elim",
    "ImpIntro": "→-Intro",
    "ImpElim": "→-Elim",
    "ForAllIntro": "∀-Intro",
    "ForAllElim": "∀-Elim",
    "ExistsIntro": "∃-Intro",
    "ExistsElim": "∃-Elim",
    "BottomIntro": "⊥-Intro",
    "BottomElim": "⊥-Elim",
}
_ARITY = {"OrElim": 3, "ExistsElim": 2}
_ARITY_TEXT = {1: "exactly one premise sequent", 2: "two premise sequents", 3: "three premise sequents"}


class Fragment(str, enum.Enum):
    FORWARD = "forward"
    QUERY = "query"
    PLANNING = "planning"
    FULL = "full"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Sequent:
    assumptions: frozenset
    conclusions: frozenset

    def __init__(self, assumptions: Iterable[Formula] = (), conclusions: Iterable[Formula] = ()):
        object.__setattr__(self, "assumptions", frozenset(assumptions))
        object.__setattr__(self, "conclusions", frozenset(conclusions))

    def subsumes(self, goal: "Sequent") -> bool:
        """True when this sequent proves ``goal`` (fewer assumptions, more conclusions)."""
        return self.assumptions <= goal.assumptions and goal.conclusions <= self.conclusions

    def size(self) -> int:
        from .logic import formula_size

        return sum(formula_size(f) for f in self.assumptions) + sum(
            formula_size(f) for f in self.conclusions
        )

    def __str__(self):
        a = ", ".join(sorted(map(str, self.assumptions)))
        c = ", ".join(sorted(map(str, self.conclusions)))
        return f"({a} ; {c})"


@dataclass(frozen=True)
class ProofStep:
    rule: str
    inputs: tuple
    output: Sequent
    witness: Union[Term, Formula, None] = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))


@dataclass(frozen=True)
class Proof:
    goal: Sequent
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def size(self) -> int:
        return sum(s.output.size() for s in self.steps)

    def count(self, rule: str) -> int:
        return sum(1 for s in self.steps if s.rule == rule)


@dataclass(frozen=True)
class Violation:
    step: Optional[int]
    rule: str
    reason: str

    def __str__(self):
        if self.step is None:
            return self.reason
        return f"step {self.step + 1}: {SYMBOLS.get(self.rule, self.rule)} {self.reason}"


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violation: Optional[Violation] = None

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "VALID" if self.ok else f"INVALID: {self.violation}"


class _Fail(Exception):
    pass


def _premises(step: ProofStep, earlier: Sequence[Sequent]) -> List[Sequent]:
    out = []
    for i in step.inputs:
        if not isinstance(i, int) or i < 0 or i >= len(earlier):
            raise _Fail(f"references unresolved step {i + 1 if isinstance(i, int) else i}")
        out.append(earlier[i])
    want = _ARITY.get(step.rule, 1)
    if len(out) != want:
        raise _Fail(f"requires {_ARITY_TEXT[want]}")
    return out


def _single_added(out: Sequent, prem: Sequent) -> Formula:
    added = out.conclusions - prem.conclusions
    if not added:
        raise _Fail("concludes nothing new")
    if len(added) > 1:
        raise _Fail("introduces more than one conclusion")
    return next(iter(added))


def _same_assumptions(out: Sequent, prem: Sequent):
    if out.assumptions != prem.assumptions:
        raise _Fail("must leave the assumptions unchanged")


def _need_term(step: ProofStep) -> Term:
    if not isinstance(step.witness, Term):
        raise _Fail("needs the instantiating term as witness")
    return step.witness


def _occurs_in(t: Term, fs: Iterable[Formula]) -> bool:
    if isinstance(t, Var):
        return any(t.name in free_variables(f) for f in fs)
    return any(t in constants_of(f) for f in fs)


def _forall_premise(step: ProofStep, prem: Sequent):
    """The ``forall x. A`` in the premise that instantiates to the new conclusion."""
    g = _single_added(step.output, prem)
    t = _need_term(step)
    for f in prem.conclusions:
        if isinstance(f, ForAll) and apply_substitution(f.body, {f.var: t}) == g:
            return f
    raise _Fail(f"no universal in the premise instantiates to {g} with {t}")


def _check(step: ProofStep, earlier: Sequence[Sequent]) -> None:
    rule, out = step.rule, step.output
    if rule == AXIOM:
        if step.inputs:
            raise _Fail("takes no premises")
        if not out.conclusions <= out.assumptions:
            raise _Fail("conclusions must be among the assumptions")
        return
    if rule not in RULES:
        raise _Fail("is not a known rule")
    prem = _premises(step, earlier)
    p = prem[0]

    if rule == "AndIntro":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        if not (isinstance(g, And) and g.left in p.conclusions and g.right in p.conclusions):
            raise _Fail(f"needs both conjuncts of {g} proven")
    elif rule == "AndElim":
        _same_assumptions(out, p)
        added = out.conclusions - p.conclusions
        if not added:
            raise _Fail("concludes nothing new")
        for f in p.conclusions:
            if isinstance(f, And) and added <= {f.left, f.right}:
                return
        raise _Fail("new conclusions are not conjuncts of a proven conjunction")
    elif rule == "OrIntro":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        if not (isinstance(g, Or) and (g.left in p.conclusions or g.right in p.conclusions)):
            raise _Fail(f"needs a disjunct of {g} proven")
    elif rule == "ImpElim":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        if not any(
            isinstance(f, Implies) and f.right == g and f.left in p.conclusions for f in p.conclusions
        ):
            raise _Fail(f"needs A and A -> {g} proven")
    elif rule == "ForAllElim":
        _same_assumptions(out, p)
        _forall_premise(step, p)
    elif rule == "ExistsIntro":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        t = _need_term(step)
        if not isinstance(g, Exists):
            raise _Fail("must conclude an existential")
        if apply_substitution(g.body, {g.var: t}) not in p.conclusions:
            raise _Fail(f"needs the instance of {g} at {t} proven")
    elif rule == "ForAllIntro":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        if not isinstance(g, ForAll) or g.body not in p.conclusions:
            raise _Fail("must generalize a proven formula")
        if any(g.var in free_variables(a) for a in p.assumptions):
            raise _Fail(f"eigenvariable {g.var} is free in an assumption")
    elif rule == "BottomIntro":
        _same_assumptions(out, p)
        g = _single_added(out, p)
        if g != BOT:
            raise _Fail("must conclude bot")
        if not any(is_negation(f) and f.left in p.conclusions for f in p.conclusions):
            raise _Fail("needs some A and A -> bot proven")
    elif rule == "BottomElim":
        _same_assumptions(out, p)
        _single_added(out, p)
        if BOT not in p.conclusions:
            raise _Fail("needs bot proven")
    elif rule == "ImpIntro":
        if not out.assumptions <= p.assumptions:
            raise _Fail("cannot add assumptions")
        discharged = p.assumptions - out.assumptions
        if len(discharged) > 1:
            raise _Fail("discharges more than one assumption")
        for g in out.conclusions:
            if not isinstance(g, Implies) or g.right not in p.conclusions:
                continue
            if discharged and discharged != {g.left}:
                continue
            if all(h == g or h in out.assumptions for h in out.conclusions):
                return
        raise _Fail("needs A -> B where B was proven under the discharged assumption A")
    elif rule == "OrElim":
        p1, p2, p3 = prem
        _same_assumptions(out, p1)
        c = _single_added(out, p1)
        if c not in p2.conclusions or c not in p3.conclusions:
            raise _Fail(f"both case premises must conclude {c}")
        cands = [step.witness] if isinstance(step.witness, Formula) else list(p1.conclusions)
        for d in cands:
            if not isinstance(d, Or) or d not in p1.conclusions:
                continue
            if p2.assumptions <= out.assumptions | {d.left} and p3.assumptions <= out.assumptions | {
                d.right
            }:
                return
        raise _Fail("case premises must assume the two disjuncts of a proven disjunction")
    elif rule == "ExistsElim":
        p1, p2 = prem
        _same_assumptions(out, p1)
        b = _single_added(out, p1)
        t = step.witness
        if not isinstance(t, (Const, Var)):
            raise _Fail("needs the fresh constant as witness")
        if b not in p2.conclusions:
            raise _Fail(f"second premise must conclude {b}")
        if _occurs_in(t, list(out.assumptions) + list(p1.conclusions) + [b]):
            raise _Fail(f"witness {t} is not fresh")
        for e in p1.conclusions:
            if isinstance(e, Exists):
                inst = apply_substitution(e.body, {e.var: t})
                if p2.assumptions <= out.assumptions | {inst}:
                    return
        raise _Fail("second premise must assume an instance of a proven existential")


def check_step(step: ProofStep, earlier: Sequence[Sequent], index: Optional[int] = None) -> Optional[Violation]:
    """None when ``step`` follows from ``earlier`` by its rule, else the violation."""
    try:
        _check(step, earlier)
    except _Fail as e:
        return Violation(index, step.rule, str(e))
    return None


def verify_proof(proof: Proof) -> Verdict:
    """Check every step in order; report the earliest failure."""
    seen: List[Sequent] = []
    for i, step in enumerate(proof.steps):
        v = check_step(step, seen, i)
        if v is not None:
            return Verdict(False, v)
        seen.append(step.output)
    if not seen:
        return Verdict(False, Violation(None, "goal", "proof has no steps"))
    if not seen[-1].subsumes(proof.goal):
        return Verdict(False, Violation(None, "goal", "goal not subsumed by the final step"))
    return Verdict(True)


def _rule_head(f: Formula) -> Formula:
    while isinstance(f, ForAll):
        f = f.body
    if isinstance(f, Implies) and not is_negation(f):
        return f.right
    return f


def is_safe_instantiation(forall: ForAll) -> bool:
    """A universal instantiation is safe when the variable occurs in the rule's conclusion."""
    return forall.var in free_variables(_rule_head(forall.body))


def rules_used(proof: Proof) -> Fragment:
    """Smallest fragment whose rule set covers every step of a verified proof."""
    level = Fragment.FORWARD
    order = list(Fragment)

    def lift(to):
        nonlocal level
        if order.index(to) > order.index(level):
            level = to

    outputs = [s.output for s in proof.steps]
    for step in proof.steps:
        r = step.rule
        if r in (AXIOM, "AndIntro", "AndElim", "OrIntro", "ImpElim"):
            continue
        if r == "ForAllElim":
            try:
                f = _forall_premise(step, outputs[step.inputs[0]])
            except (_Fail, IndexError):
                lift(Fragment.QUERY)
                continue
            if not is_safe_instantiation(f):
                lift(Fragment.QUERY)
        elif r == "ExistsIntro":
            lift(Fragment.QUERY)
        elif r == "OrElim":
            lift(Fragment.PLANNING)
        else:
            lift(Fragment.FULL)
    return level
