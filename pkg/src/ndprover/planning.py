"""Deciding goals under disjunctive knowledge by lazy case splits."""
from __future__ import annotations

from collections import ChainMap
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple, Union

from .checker import AXIOM, Proof, ProofStep, Sequent
from .forward import Closure, Contradiction, ResourceLimit, as_literal
from .index import FactIndex, eval_builtin, join  # noqa: F401  (eval_builtin re-exported)
from .kb import Derivation, DisjunctiveFact, KnowledgeBase
from .logic import Atom, Formula, Literal, disj
from .proofs import Chain, ProofBuilder
from .query import (
    Context,
    FullGrounding,
    GroundProgram,
    Strategy,
    _LiftedProvenance,
    _roots,
    grounded_closure,
    native_closure,
    solve,
)

DEFAULT_MAX_LEAVES = 2**20


@dataclass
class Leaf:
    path: Tuple[Literal, ...]
    holds: bool
    facts: frozenset = field(default=frozenset(), repr=False)
    witness: dict = field(default_factory=dict)
    support: Tuple[Literal, ...] = ()
    note: str = ""


@dataclass
class Split:
    path: Tuple[Literal, ...]
    on: DisjunctiveFact
    children: List["CaseTree"] = field(default_factory=list)


CaseTree = Union[Leaf, Split]


class LeafLimitExceeded(ResourceLimit):
    guard = "leaf-ceiling"

    def __init__(self, bound: int, partial: CaseTree):
        self.bound = bound
        self.partial = partial
        super().__init__(f"case analysis exceeds {bound} leaves")


def leaves(tree: CaseTree) -> List[Leaf]:
    out, stack = [], [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.append(node)
        else:
            stack.extend(reversed(node.children))
    return out


def tree_depth(tree: CaseTree) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max((tree_depth(c) for c in tree.children), default=0)


def split_cases(kb: KnowledgeBase, d: DisjunctiveFact) -> List[KnowledgeBase]:
    """One knowledge base per alternative of ``d``, with that alternative as a fact."""
    if d not in kb.disjunctive_facts:
        raise ValueError(f"{d} is not a disjunctive fact of the knowledge base")
    rest = tuple(x for x in kb.disjunctive_facts if x != d)
    return [replace(kb, facts=kb.facts + (alt,), disjunctive_facts=rest) for alt in d.alternatives]


@dataclass
class PlanResult:
    guaranteed: bool
    tree: CaseTree
    stats: Dict[str, int]


class _Branch:
    """Fact situation of one node: the closure plus the disjunctions still open."""

    def __init__(self, closure: Closure, path: Tuple[Literal, ...], fired: List[DisjunctiveFact]):
        self.closure = closure
        self.path = path
        self.fired = fired


class Planner:
    def __init__(self, kb: KnowledgeBase, strategy: Optional[Strategy] = None, max_leaves: int = DEFAULT_MAX_LEAVES):
        self.kb = kb
        self.strategy = strategy or FullGrounding()
        self.max_leaves = max_leaves
        self.program: Optional[GroundProgram] = None
        if isinstance(self.strategy, FullGrounding):
            self.root_closure, self.program = grounded_closure(kb, self.strategy)
        else:
            self.root_closure = native_closure(kb)
        self.leaf_count = 0
        self.splits = 0

    # -- branch bookkeeping

    def provenance(self, closure: Closure):
        if self.program is None:
            return closure.provenance
        return _LiftedProvenance(closure.provenance, self.program)

    def fired_disjunctions(self, closure: Closure, known: List[DisjunctiveFact]) -> List[DisjunctiveFact]:
        seen = {d.alternatives for d in known}
        out = list(known)
        for rule in self.kb.disjunctive_rules:
            for j, conjunct in enumerate(rule.body):
                for s in join(conjunct, closure.facts, {}, self.kb.builtins):
                    alts = tuple(h.substitute(s) for h in rule.heads)
                    if alts in seen:
                        continue
                    seen.add(alts)
                    out.append(DisjunctiveFact(alts, origin=Derivation(rule, j, s)))
        return out

    def pending(self, branch: _Branch, split_done) -> Optional[DisjunctiveFact]:
        facts = branch.closure.facts
        for d in list(self.kb.disjunctive_facts) + branch.fired:
            if d.alternatives in split_done:
                continue
            if any(a in facts for a in d.alternatives):
                continue
            return d
        return None

    def context(self, branch: _Branch) -> Context:
        def stored():
            idx = FactIndex(self.kb.facts)
            for lit in branch.path:
                idx.add(lit)
            return idx

        return Context(self.kb, stored, branch.closure, self.program)

    def child(self, branch: _Branch, alt: Literal) -> Tuple[Optional[_Branch], Optional[Contradiction]]:
        c = branch.closure.copy()
        try:
            c.extend([alt])
        except Contradiction as e:
            return None, e
        path = branch.path + (alt,)
        return _Branch(c, path, self.fired_disjunctions(c, branch.fired)), None

    def root(self) -> _Branch:
        return _Branch(self.root_closure, (), self.fired_disjunctions(self.root_closure, []))

    # -- the decision procedure

    def decide(self, goal: Literal) -> PlanResult:
        root_holder: List[CaseTree] = []
        try:
            self._explore(self.root(), goal, frozenset(), root_holder.append)
        except LeafLimitExceeded as e:
            e.partial = root_holder[0] if root_holder else None
            raise
        tree = root_holder[0]
        stats = {
            "leaves": self.leaf_count,
            "splits": self.splits,
            "depth": tree_depth(tree),
        }
        return PlanResult(all(l.holds for l in leaves(tree)), tree, stats)

    def _leaf(self, branch: _Branch, goal: Literal) -> Optional[Leaf]:
        res = solve(self.context(branch), goal, self.strategy)
        if res.found:
            support = res.derivation.premises() if res.derivation else (goal,)
            return Leaf(branch.path, True, frozenset(branch.closure.facts), res.witness, support)
        return None

    def _count_leaf(self):
        self.leaf_count += 1
        if self.leaf_count > self.max_leaves:
            raise LeafLimitExceeded(self.max_leaves, None)

    def _explore(self, branch: _Branch, goal: Literal, split_done, attach):
        leaf = self._leaf(branch, goal)
        if leaf is not None:
            self._count_leaf()
            attach(leaf)
            return leaf.holds
        d = self.pending(branch, split_done)
        if d is None:
            self._count_leaf()
            attach(Leaf(branch.path, False, frozenset(branch.closure.facts), note=self.failure_note(branch, goal)))
            return False
        node = Split(branch.path, d)
        attach(node)
        self.splits += 1
        ok = True
        done = split_done | {d.alternatives}
        for alt in d.alternatives:
            sub, clash = self.child(branch, alt)
            if sub is None:
                self._count_leaf()
                node.children.append(Leaf(branch.path + (alt,), False, note=str(clash)))
                ok = False
                continue
            ok = self._explore(sub, goal, done, node.children.append) and ok
        return ok

    def failure_note(self, branch: _Branch, goal: Literal) -> str:
        """Explain a failing leaf: name the comparisons that block otherwise matched rule bodies."""
        kb = self.kb
        notes: Dict[str, None] = {}
        for rule, j, s0, _ in _roots(kb, goal):
            conjunct = rule.body[j]
            plain = [lit for lit in conjunct if lit.atom.pred not in kb.builtins]
            tests = [lit for lit in conjunct if lit.atom.pred in kb.builtins]
            for s in join(plain, branch.closure.facts, s0, kb.builtins):
                for t in tests:
                    g = t.substitute(s)
                    if not g.is_ground():
                        continue
                    if eval_builtin(g.atom.pred, g.atom.args, kb.builtins) != g.positive:
                        notes.setdefault(f"{g} is false")
        if notes:
            return "; ".join(notes)
        return f"no derivation of {goal}"

    # -- proof construction

    def proof(self, goal: Literal, tree: CaseTree) -> Proof:
        if not all(l.holds for l in leaves(tree)):
            raise ValueError("case tree has a failing leaf; the goal is not guaranteed")
        target = goal.to_formula()
        plans: list = []
        self._collect(self.root(), goal, tree, plans)
        path_alts = set()
        for kind, node_path, chain, _ in plans:
            path_alts.update(lit.to_formula() for lit in node_path)
        base: Dict[Formula, None] = {}
        for kind, node_path, chain, extra in plans:
            for f in chain.assumed if chain else extra:
                if f not in path_alts:
                    base.setdefault(f)
        builder = ProofBuilder()
        it = iter(plans)
        self._emit(tree, it, builder, tuple(base), target)
        return builder.build(Sequent(base, [target]))

    def _collect(self, branch: _Branch, goal: Literal, node: CaseTree, plans: list):
        """Replay the tree, recording one proof chain per leaf and per split's major premise (pre-order)."""
        prov = self.provenance(branch.closure)
        if isinstance(node, Leaf):
            res = solve(self.context(branch), goal, self.strategy)
            assert res.found
            p = ChainMap({goal: res.derivation}, prov) if res.derivation else prov
            chain = Chain(p, self.kb.builtins)
            chain.prove(goal)
            plans.append(("leaf", branch.path, chain, ()))
            return
        d = node.on
        if d.origin is None:
            plans.append(("split", branch.path, None, (d.to_formula(),)))
        else:
            chain = Chain(prov, self.kb.builtins)
            for p in d.origin.premises():
                if p.atom.pred not in self.kb.builtins:
                    chain.prove(p)
            chain.fire(d.origin)
            plans.append(("split", branch.path, chain, ()))
        for alt, child in zip(d.alternatives, node.children):
            sub, _ = self.child(branch, alt)
            self._collect(sub, goal, child, plans)

    def _emit(self, node: CaseTree, plans, builder: ProofBuilder, base: tuple, target: Formula) -> int:
        kind, path, chain, extra = next(plans)
        assumptions = frozenset(base) | {lit.to_formula() for lit in path}
        if isinstance(node, Leaf):
            return builder.emit_chain(chain, assumptions, target)
        d = node.on.to_formula()
        if chain is None:
            builder.steps.append(ProofStep(AXIOM, (), Sequent(assumptions, [d])))
            major = len(builder.steps) - 1
        else:
            major = builder.emit_chain(chain, assumptions, d)
        cases = [self._emit(child, plans, builder, base, target) for child in node.children]
        return self._fold(builder, major, node.on.alternatives, cases, assumptions, target)

    def _fold(self, builder, major, alts, cases, assumptions, target):
        """Binary case analyses over ``a1 | (a2 | ...)``, innermost last."""
        if len(alts) == 2:
            return builder.or_elim(major, cases[0], cases[1], assumptions, target, disj([a.to_formula() for a in alts]))
        rest = disj([a.to_formula() for a in alts[1:]])
        inner_assumptions = assumptions | {rest}
        builder.steps.append(ProofStep(AXIOM, (), Sequent(inner_assumptions, [rest])))
        inner_major = len(builder.steps) - 1
        inner = self._fold(builder, inner_major, alts[1:], cases[1:], inner_assumptions, target)
        return builder.or_elim(
            major, cases[0], inner, assumptions, target, disj([a.to_formula() for a in alts])
        )


def decide_guaranteed(
    kb: KnowledgeBase,
    goal: Union[Atom, Literal],
    strategy: Optional[Strategy] = None,
    max_leaves: int = DEFAULT_MAX_LEAVES,
) -> PlanResult:
    """Whether ``goal`` follows in every case of the knowledge base's disjunctions."""
    goal = as_literal(goal)
    if not goal.is_ground():
        raise ValueError(f"goal {goal} is not ground")
    return Planner(kb, strategy, max_leaves).decide(goal)


def plan_proof(
    kb: KnowledgeBase,
    goal: Union[Atom, Literal],
    tree: CaseTree,
    strategy: Optional[Strategy] = None,
) -> Proof:
    """Proof of ``goal`` with one case analysis per split of ``tree``."""
    goal = as_literal(goal)
    return Planner(kb, strategy).proof(goal, tree)


def render_trace(tree: CaseTree, goal: Optional[Literal] = None) -> str:
    """Indented text form of a case tree."""
    lines: List[str] = []

    def visit(node, depth, label):
        pad = "  " * depth
        head = f"{pad}[{label}] " if label else pad
        if isinstance(node, Split):
            lines.append(f"{head}split on {' | '.join(map(str, node.on.alternatives))}")
            for alt, child in zip(node.on.alternatives, node.children):
                visit(child, depth + 1, str(alt))
        elif node.holds:
            via = ", ".join(map(str, node.support))
            what = f"{goal} " if goal is not None else ""
            lines.append(f"{head}leaf holds: {what}from {via}")
        else:
            lines.append(f"{head}leaf fails: {node.note}")

    visit(tree, 0, "")
    return "\n".join(lines) + "\n"
