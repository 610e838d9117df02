"""Turning derivation records into checkable proof objects.

A :class:`Chain` replays derivations under one assumption set as a linear
sequence of rule applications; :class:`ProofBuilder` lays chains out as
numbered steps and joins them with case analyses.
"""
from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence

from .checker import AXIOM, Proof, ProofStep, Sequent
from .index import DEFAULT_BUILTINS
from .kb import Derivation, Rule
from .logic import And, Formula, ForAll, Literal, apply_substitution

_INF = float("inf")


class Chain:
    """Forward replay of derivations.

    ``provenance`` maps a literal to the :class:`Derivation` that produced
    it; literals missing from it (or mapped to None) are taken as assumptions.
    """

    def __init__(self, provenance: Dict[Literal, Optional[Derivation]], builtins=DEFAULT_BUILTINS):
        self.provenance = provenance
        self.builtins = builtins
        self.ops: List[tuple] = []
        self.have: set = set()
        self.assumed: Dict[Formula, None] = {}
        self._rule_formulas: Dict[Rule, Formula] = {}

    def assume(self, f: Formula) -> Formula:
        if f not in self.have:
            self.have.add(f)
            self.assumed[f] = None
        return f

    def _add(self, rule: str, f: Formula, uses: Sequence[Formula], witness=None) -> Formula:
        if f not in self.have:
            self.ops.append((rule, f, tuple(uses), witness))
            self.have.add(f)
        return f

    def rule_formula(self, rule: Rule) -> Formula:
        f = self._rule_formulas.get(rule)
        if f is None:
            f = self._rule_formulas[rule] = rule.to_formula()
        return f

    def prove(self, lit: Literal) -> Formula:
        """Derive ``lit``, first deriving whatever its provenance needs."""
        stack = [(lit, False)]
        opened = set()
        while stack:
            cur, expanded = stack.pop()
            f = cur.to_formula()
            if f in self.have:
                continue
            d = self.provenance.get(cur)
            if d is None:
                self.assume(f)
            elif expanded:
                self.fire(d, cur)
            else:
                if cur in opened:
                    raise ValueError(f"circular provenance through {cur}")
                opened.add(cur)
                stack.append((cur, True))
                for p in reversed(d.premises()):
                    if p.atom.pred not in self.builtins:
                        stack.append((p, False))
        return lit.to_formula()

    def fire(self, d: Derivation, target: Optional[Literal] = None) -> Formula:
        """Apply a rule whose premises are available; returns the head formula reached.

        With a conjunctive head, ``target`` selects which conjunct to extract.
        """
        rule, s, j = d.rule, d.subst, d.disjunct
        for p in d.premises():
            if p.atom.pred in self.builtins:
                self.assume(p.to_formula())
        cur = self.assume(self.rule_formula(rule))
        for u in rule.universals:
            assert isinstance(cur, ForAll)
            t = s[u]
            cur = self._add("ForAllElim", apply_substitution(cur.body, {cur.var: t}), [cur], t)
        antecedent, consequent = cur.left, cur.right

        lits = [p.to_formula() for p in d.premises()]
        acc = lits[-1]
        for lf in reversed(lits[:-1]):
            acc = self._add("AndIntro", And(lf, acc), [lf, acc])

        suffixes = [antecedent]
        for _ in range(len(rule.body) - 1):
            suffixes.append(suffixes[-1].right)
        disjunct = suffixes[j].left if j < len(rule.body) - 1 else suffixes[j]

        # peel the existential prefix: layers[k] still quantifies exs[k:]
        exs = rule.disjunct_existentials(j)
        layers = [disjunct]
        for e in exs:
            x = layers[-1]
            layers.append(apply_substitution(x.body, {x.var: s[e]}))
        assert layers[-1] == acc, (layers[-1], acc)
        for k in range(len(exs) - 1, -1, -1):
            self._add("ExistsIntro", layers[k], [layers[k + 1]], s[exs[k]])

        if j < len(rule.body) - 1:
            self._add("OrIntro", suffixes[j], [disjunct])
        for i in range(j - 1, -1, -1):
            self._add("OrIntro", suffixes[i], [suffixes[i + 1]])
        head = self._add("ImpElim", consequent, [antecedent, cur])
        if rule.disjunctive or target is None:
            return head

        k = [h.substitute(s) for h in rule.heads].index(target)
        node = head
        for _ in range(k):
            node = self._add("AndElim", node.right, [node])
        if k < len(rule.heads) - 1:
            node = self._add("AndElim", node.left, [node])
        return node


class ProofBuilder:
    def __init__(self):
        self.steps: List[ProofStep] = []

    def emit_chain(self, chain: Chain, assumptions: Iterable[Formula], target: Formula) -> int:
        """Lay out ``chain`` as steps; conclusions are dropped after their last use."""
        assumptions = frozenset(assumptions)
        last: Dict[Formula, float] = {}
        for i, (_, _, uses, _) in enumerate(chain.ops):
            for u in uses:
                last[u] = i
        last[target] = _INF
        live = set(chain.assumed)
        self.steps.append(ProofStep(AXIOM, (), Sequent(assumptions, live)))
        for i, (rule, f, _, witness) in enumerate(chain.ops):
            live.add(f)
            live = {g for g in live if last.get(g, -1) > i}
            prev = len(self.steps) - 1
            self.steps.append(ProofStep(rule, (prev,), Sequent(assumptions, live), witness))
        return len(self.steps) - 1

    def or_elim(self, major: int, left: int, right: int, assumptions, conclusion: Formula, disjunction: Formula) -> int:
        self.steps.append(
            ProofStep("OrElim", (major, left, right), Sequent(assumptions, [conclusion]), disjunction)
        )
        return len(self.steps) - 1

    def build(self, goal: Sequent) -> Proof:
        return Proof(goal, self.steps)


def chain_proof(chain: Chain, target: Formula) -> Proof:
    """Proof of ``target`` from exactly the assumptions ``chain`` used."""
    b = ProofBuilder()
    assumptions = frozenset(chain.assumed)
    b.emit_chain(chain, assumptions, target)
    return b.build(Sequent(assumptions, [target]))


def literal_proof(provenance, goal: Literal, builtins=DEFAULT_BUILTINS) -> Proof:
    chain = Chain(provenance, builtins)
    target = chain.prove(goal)
    return chain_proof(chain, target)
