"""Oracles and fixtures shared by the test modules."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from ndprover.checker import RULES, Proof, ProofStep, Sequent
from ndprover.index import BuiltinError
from ndprover.kb import KnowledgeBase
from ndprover.logic import BOT, And, Atom, Bottom, Const, Implies, Or, Var, free_variables
from ndprover.syntax import parse_kb, parse_proof

ROOT = Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
DATA = Path(__file__).resolve().parent / "data"
GOLDEN = DATA / "golden"

# golden file -> the rule its final step exercises
GOLDEN_RULES = {
    "and_intro": "AndIntro",
    "and_elim": "AndElim",
    "or_intro": "OrIntro",
    "or_elim": "OrElim",
    "imp_intro": "ImpIntro",
    "imp_elim": "ImpElim",
    "forall_intro": "ForAllIntro",
    "forall_elim": "ForAllElim",
    "exists_intro": "ExistsIntro",
    "exists_elim": "ExistsElim",
    "bottom_intro": "BottomIntro",
    "bottom_elim": "BottomElim",
}

# a tag the final step does not satisfy
TAG_SWAP = {
    "AndIntro": "OrIntro",
    "AndElim": "AndIntro",
    "OrIntro": "AndIntro",
    "OrElim": "ExistsElim",
    "ImpIntro": "ImpElim",
    "ImpElim": "ImpIntro",
    "ForAllIntro": "ForAllElim",
    "ForAllElim": "ExistsIntro",
    "ExistsIntro": "ForAllElim",
    "ExistsElim": "OrElim",
    "BottomIntro": "BottomElim",
    "BottomElim": "BottomIntro",
}


def load_kb(name: str) -> KnowledgeBase:
    path = SAMPLES / name
    return parse_kb(path.read_text(), str(path))[0]


def load_golden(name: str) -> Proof:
    path = GOLDEN / f"{name}.ndp"
    return parse_proof(path.read_text(), str(path))[0]


def _replace_last(proof: Proof, step: ProofStep) -> Proof:
    return Proof(proof.goal, proof.steps[:-1] + (step,))


def mutations(proof: Proof):
    """Three single-step mutations of the final step: drop an input, swap the tag, alter the output."""
    last = proof.steps[-1]
    prem = proof.steps[last.inputs[0]].output
    yield "drop-input", _replace_last(proof, ProofStep(last.rule, last.inputs[:-1], last.output, last.witness))
    yield "swap-tag", _replace_last(proof, ProofStep(TAG_SWAP[last.rule], last.inputs, last.output, last.witness))
    if last.rule == "BottomElim":
        # any conclusion follows from bot, so corrupt the assumptions instead
        out = Sequent(set(last.output.assumptions) - {BOT}, last.output.conclusions)
    else:
        new = sorted(last.output.conclusions - prem.conclusions, key=str)[0]
        junk = Atom("zz", ())
        out = Sequent(last.output.assumptions, (last.output.conclusions - {new}) | {And(new, junk)})
    yield "alter-output", _replace_last(proof, ProofStep(last.rule, last.inputs, out, last.witness))


# ---------------------------------------------------------------- propositional semantics


def evaluate(f, model) -> bool:
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Atom):
        return model[f.pred]
    if isinstance(f, And):
        return evaluate(f.left, model) and evaluate(f.right, model)
    if isinstance(f, Or):
        return evaluate(f.left, model) or evaluate(f.right, model)
    if isinstance(f, Implies):
        return (not evaluate(f.left, model)) or evaluate(f.right, model)
    raise TypeError(f"not propositional: {f}")


def atoms_of(fs):
    out = set()
    stack = list(fs)
    while stack:
        f = stack.pop()
        if isinstance(f, Atom):
            out.add(f.pred)
        elif isinstance(f, (And, Or, Implies)):
            stack += [f.left, f.right]
    return sorted(out)


def models(names):
    for bits in itertools.product([False, True], repeat=len(names)):
        yield dict(zip(names, bits))


def sequent_valid(seq: Sequent) -> bool:
    names = atoms_of(list(seq.assumptions) + list(seq.conclusions))
    for m in models(names):
        if all(evaluate(a, m) for a in seq.assumptions) and not all(evaluate(c, m) for c in seq.conclusions):
            return False
    return True


PROP_ATOMS = [Atom(n, ()) for n in "abcdef"]


def random_formula(rng: random.Random, depth: int, atoms=PROP_ATOMS):
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(atoms) if rng.random() > 0.05 else BOT
    op = rng.choice([And, Or, Implies])
    return op(random_formula(rng, depth - 1, atoms), random_formula(rng, depth - 1, atoms))


def random_candidate_steps(rng: random.Random, n: int):
    """Plausible propositional steps; some follow their rule, others are subtly wrong."""
    outputs = []
    steps = []
    for _ in range(n):
        choice = rng.random()
        if not outputs or choice < 0.2:
            a = {random_formula(rng, 2) for _ in range(rng.randint(1, 3))}
            if rng.random() < 0.4:
                ante = random_formula(rng, 1)
                a |= {ante, Implies(ante, random_formula(rng, 1))}
            c = set(rng.sample(sorted(a, key=str), rng.randint(1, len(a))))
            if rng.random() < 0.1:
                c.add(random_formula(rng, 1))  # unjustified axiom
            step = ProofStep("Axiom", (), Sequent(a, c))
        else:
            i = rng.randrange(len(outputs))
            p = outputs[i]
            cs = sorted(p.conclusions, key=str)
            rule = rng.choice(RULES[:6] + ("BottomIntro", "BottomElim"))
            extra = random_formula(rng, 1)
            new = None
            inputs = (i,)
            assumptions = set(p.assumptions)
            keep = set(cs) if rng.random() < 0.7 else set()
            if rule == "AndIntro":
                new = And(rng.choice(cs), rng.choice(cs + [extra]))
            elif rule == "AndElim":
                conj = [f for f in cs if isinstance(f, And)] or cs
                f = rng.choice(conj)
                new = f.left if isinstance(f, And) else extra
            elif rule == "OrIntro":
                new = Or(rng.choice(cs), extra) if rng.random() < 0.5 else Or(extra, rng.choice(cs + [extra]))
            elif rule == "ImpElim":
                imps = [f for f in cs if isinstance(f, Implies)]
                usable = [f for f in imps if f.left in cs] or imps
                new = rng.choice(usable).right if usable else extra
            elif rule == "ImpIntro":
                hyp = rng.choice(sorted(p.assumptions, key=str)) if p.assumptions else extra
                new = Implies(hyp, rng.choice(cs))
                assumptions.discard(hyp)
                keep = {f for f in keep if f in assumptions} if rng.random() < 0.8 else keep
            elif rule == "OrElim":
                ors = [(k, f) for k, o in enumerate(outputs) for f in o.conclusions if isinstance(f, Or)]
                if ors:
                    k, d = rng.choice(ors)
                    goal = rng.choice(cs + [extra])
                    cases = []
                    for side in (d.left, d.right):
                        hits = [m for m, o in enumerate(outputs) if goal in o.conclusions and o.assumptions <= outputs[k].assumptions | {side}]
                        cases.append(rng.choice(hits) if hits else i)
                    inputs = (k, cases[0], cases[1])
                    assumptions = set(outputs[k].assumptions)
                    keep = set(outputs[k].conclusions)
                    new = goal
                else:
                    new = extra
            elif rule == "BottomIntro":
                new = BOT
            else:
                new = extra
            step = ProofStep(rule, inputs, Sequent(assumptions, keep | {new}))
        steps.append(step)
        outputs.append(step.output)
    return steps


# ---------------------------------------------------------------- brute-force model


def _domain(kb: KnowledgeBase):
    return sorted(kb.domain, key=str)


def _body_holds(lits, s, facts, builtins):
    for lit in lits:
        g = lit.substitute(s)
        if g.atom.pred in builtins:
            try:
                if builtins.evaluate(g.atom.pred, g.atom.args) != g.positive:
                    return False
            except BuiltinError:
                return False
        elif g not in facts:
            return False
    return True


def brute_force_model(kb: KnowledgeBase, extra=()):
    """Least model by trying every assignment of every rule variable to every constant.

    Returns None when a literal and its complement are both derived.
    """
    facts = set(kb.facts) | set(extra)
    domain = _domain(kb)
    changed = True
    while changed:
        changed = False
        for r in kb.rules:
            for conjunct in r.body:
                names = sorted({v for lit in conjunct for v in lit.variables()} | set(r.universals))
                for combo in itertools.product(domain, repeat=len(names)):
                    s = dict(zip(names, combo))
                    if _body_holds(conjunct, s, facts, kb.builtins):
                        for h in r.heads:
                            g = h.substitute(s)
                            if g not in facts:
                                facts.add(g)
                                changed = True
    if any(f.negate() in facts for f in facts):
        return None
    return facts


def exhaustive_guaranteed(kb: KnowledgeBase, goal) -> bool:
    """Goal holds in the least model of every total choice of disjunct alternatives."""
    for choice in itertools.product(*(d.alternatives for d in kb.disjunctive_facts)):
        m = brute_force_model(kb, choice)
        if m is None or goal not in m:
            return False
    return True


def witness_sound(kb: KnowledgeBase, derivation, model) -> bool:
    if derivation is None:
        return True
    return _body_holds(derivation.rule.body[derivation.disjunct], derivation.subst, model, kb.builtins)


def random_ground_atom(rng: random.Random, kb: KnowledgeBase, preds=None):
    from ndprover.logic import Literal

    heads = preds or sorted({(h.atom.pred, len(h.atom.args)) for r in kb.rules for h in r.heads})
    pred, arity = rng.choice(heads)
    consts = [c for c in _domain(kb) if not c.is_int] or [Const("c0")]
    return Literal(Atom(pred, [rng.choice(consts) for _ in range(arity)]), True)


def var(name):
    return Var(name)


def fv(f):
    return free_variables(f)
