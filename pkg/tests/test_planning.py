import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import exhaustive_guaranteed
from ndprover.bench import TheorySpec, generate_theory
from ndprover.checker import Fragment, rules_used, verify_proof
from ndprover.kb import KnowledgeBase
from ndprover.logic import Atom, Const, Literal
from ndprover.planning import (
    LeafLimitExceeded,
    Split,
    decide_guaranteed,
    leaves,
    plan_proof,
    render_trace,
    split_cases,
)
from ndprover.query import AStar, Shallow
from ndprover.syntax import parse_kb, parse_literal


def kb_of(text):
    return parse_kb(text)[0]


def lit(text):
    return parse_literal(text)


def test_beach_is_guaranteed(beach_kb):
    goal = lit("satisfied(p,e)")
    res = decide_guaranteed(beach_kb, goal)
    assert res.guaranteed
    assert res.stats == {"leaves": 2, "splits": 1, "depth": 1}
    sunny, rainy = res.tree.children
    assert sunny.path == (lit("sunny(e)"),) and lit("excited(p,e,10)") in sunny.support
    assert rainy.path == (lit("~sunny(e)"),) and lit("excited(p,e,7)") in rainy.support
    proof = plan_proof(beach_kb, goal, res.tree)
    assert proof.count("OrElim") == 1
    assert verify_proof(proof) and rules_used(proof) is Fragment.PLANNING


def test_beach_trace(beach_kb):
    goal = lit("satisfied(p,e)")
    trace = render_trace(decide_guaranteed(beach_kb, goal).tree, goal)
    assert trace.splitlines() == [
        "split on sunny(e) | ~sunny(e)",
        "  [sunny(e)] leaf holds: satisfied(p,e) from excited(p,e,10), geq(10,7)",
        "  [~sunny(e)] leaf holds: satisfied(p,e) from excited(p,e,7), geq(7,7)",
    ]


def test_beach_without_restaurant_rules_fails_on_rainy_days(beach_kb):
    rules = tuple(r for r in beach_kb.rules if not ("restaurant" in str(r) and str(r).startswith("excited")))
    assert len(rules) == len(beach_kb.rules) - 2
    kb = KnowledgeBase(beach_kb.facts, rules, beach_kb.disjunctive_facts)
    res = decide_guaranteed(kb, lit("satisfied(p,e)"))
    assert not res.guaranteed
    failing = [l for l in leaves(res.tree) if not l.holds]
    assert len(failing) == 1
    assert failing[0].path == (lit("~sunny(e)"),)
    assert failing[0].note == "geq(1,7) is false"
    with pytest.raises(ValueError):
        plan_proof(kb, lit("satisfied(p,e)"), res.tree)


def test_goal_without_any_split():
    kb = kb_of("a(k). b(X) <- a(X). c(k) | d(k).")
    res = decide_guaranteed(kb, lit("b(k)"))
    assert res.guaranteed and res.stats["splits"] == 0
    proof = plan_proof(kb, lit("b(k)"), res.tree)
    assert verify_proof(proof) and proof.count("OrElim") == 0


def test_three_way_split_folds_into_two_or_eliminations():
    kb = kb_of("""
        red(k) | green(k) | blue(k).
        colored(X) <- red(X) ; green(X) ; blue(X).
    """)
    res = decide_guaranteed(kb, lit("colored(k)"))
    assert res.guaranteed and res.stats["leaves"] == 3
    proof = plan_proof(kb, lit("colored(k)"), res.tree)
    assert proof.count("OrElim") == 2
    assert verify_proof(proof) and rules_used(proof) is Fragment.PLANNING


def test_fired_disjunctive_rule_is_split():
    kb = kb_of("""
        cloudy(d).
        rain(X) | snow(X) <- cloudy(X).
        wet(X) <- rain(X) ; snow(X).
    """)
    res = decide_guaranteed(kb, lit("wet(d)"))
    assert res.guaranteed and res.stats["splits"] == 1
    proof = plan_proof(kb, lit("wet(d)"), res.tree)
    assert verify_proof(proof) and proof.count("OrElim") == 1
    assert not decide_guaranteed(kb, lit("rain(d)")).guaranteed


def test_disjunction_with_a_known_alternative_is_not_split():
    kb = kb_of("left(k) | right(k). left(k). done(X) <- left(X).")
    res = decide_guaranteed(kb, lit("done(k)"))
    assert res.guaranteed and res.stats["splits"] == 0


def test_contradictory_branch_is_a_failing_leaf():
    kb = kb_of("""
        ~bad(k). p(k) | q(k).
        bad(X) <- q(X).
        goal(X) <- p(X).
    """)
    res = decide_guaranteed(kb, lit("goal(k)"))
    assert not res.guaranteed
    failing = [l for l in leaves(res.tree) if not l.holds]
    assert len(failing) == 1 and "contradiction" in failing[0].note


def test_nested_splits():
    kb = kb_of("""
        a(k) | b(k). c(k) | d(k).
        x(K) <- a(K) & c(K). x(K) <- a(K) & d(K).
        x(K) <- b(K) & c(K). x(K) <- b(K) & d(K).
    """)
    res = decide_guaranteed(kb, lit("x(k)"))
    assert res.guaranteed and res.stats["leaves"] == 4 and res.stats["depth"] == 2
    proof = plan_proof(kb, lit("x(k)"), res.tree)
    assert verify_proof(proof) and proof.count("OrElim") == 3


def test_leaf_guard_keeps_the_partial_tree():
    kb = generate_theory(TheorySpec("planning", disjunctions=6, constants=2, rules=1))
    with pytest.raises(LeafLimitExceeded) as e:
        decide_guaranteed(kb, lit("goal(g)"), max_leaves=5)
    assert e.value.guard == "leaf-ceiling"
    assert isinstance(e.value.partial, Split)


def test_split_cases_add_one_alternative_each():
    kb = kb_of("sunny(e) | ~sunny(e). visit(p).")
    d = kb.disjunctive_facts[0]
    cases = split_cases(kb, d)
    assert [c.facts[-1] for c in cases] == list(d.alternatives)
    assert all(not c.disjunctive_facts for c in cases)


@pytest.mark.parametrize("strategy", [Shallow(), AStar()], ids=["shallow", "astar"])
def test_other_leaf_strategies(beach_kb, strategy):
    res = decide_guaranteed(beach_kb, lit("satisfied(p,e)"), strategy)
    assert res.guaranteed == (strategy.name == "astar")


def test_generated_family_has_two_to_the_k_leaves():
    for k in range(1, 7):
        kb = generate_theory(TheorySpec("planning", disjunctions=k, constants=2, rules=1))
        res = decide_guaranteed(kb, lit("goal(g)"))
        assert res.guaranteed and res.stats["leaves"] == 2 ** k


def random_planning_kb(seed, k):
    return generate_theory(TheorySpec("planning", predicates=3, constants=3, rules=3, body_width=2,
                                      disjunctions=k, seed=seed, shape="random"))


def _goal(kb, rng):
    consts = sorted(kb.domain, key=str) or [Const("c0")]
    preds = sorted({h.atom.pred for r in kb.rules for h in r.heads} | {"p0"})
    return Literal(Atom(rng.choice(preds), (rng.choice(consts),)))


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 6), st.integers(0, 10**6))
def test_verdict_matches_exhaustive_enumeration(seed, k, goal_seed):
    kb = random_planning_kb(seed, k)
    goal = _goal(kb, random.Random(goal_seed))
    res = decide_guaranteed(kb, goal)
    assert res.guaranteed == exhaustive_guaranteed(kb, goal)
    if res.guaranteed:
        proof = plan_proof(kb, goal, res.tree)
        assert verify_proof(proof)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6), st.randoms(use_true_random=False))
def test_split_order_does_not_change_the_verdict(seed, k, rnd):
    kb = random_planning_kb(seed, k)
    goal = _goal(kb, rnd)
    dfacts = list(kb.disjunctive_facts)
    rnd.shuffle(dfacts)
    shuffled = KnowledgeBase(kb.facts, kb.rules, tuple(dfacts))
    assert decide_guaranteed(kb, goal).guaranteed == decide_guaranteed(shuffled, goal).guaranteed
