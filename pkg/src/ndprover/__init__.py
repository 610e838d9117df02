"""Natural deduction proof checking with forward, query and planning engines."""
from .checker import Fragment, Proof, ProofStep, Sequent, check_step, rules_used, verify_proof
from .forward import Contradiction, entails_with_proof, fixpoint, merge_rules, validate_safety
from .kb import DisjunctiveFact, KnowledgeBase, Rule
from .logic import (
    BOT, And, Atom, Const, Exists, ForAll, Func, Implies, Literal, Not, Or, Var,
    apply_substitution, free_variables, match_premise, to_dnf, unify,
)
from .planning import decide_guaranteed, plan_proof, split_cases
from .query import AStar, FullGrounding, RankingModel, Shallow, TopOneRanked, answer, ground_existentials
from .syntax import parse_kb, parse_literal, parse_proof, serialize

__version__ = "0.1.0"

__all__ = [
    "Fragment",
    "Proof",
    "ProofStep",
    "Sequent",
    "check_step",
    "rules_used",
    "verify_proof",
    "Contradiction",
    "entails_with_proof",
    "fixpoint",
    "merge_rules",
    "validate_safety",
    "DisjunctiveFact",
    "KnowledgeBase",
    "Rule",
    "BOT",
    "And",
    "Atom",
    "Const",
    "Exists",
    "ForAll",
    "Func",
    "Implies",
    "Literal",
    "Not",
    "Or",
    "Var",
    "apply_substitution",
    "free_variables",
    "match_premise",
    "to_dnf",
    "unify",
    "decide_guaranteed",
    "plan_proof",
    "split_cases",
    "AStar",
    "FullGrounding",
    "RankingModel",
    "Shallow",
    "TopOneRanked",
    "answer",
    "ground_existentials",
    "parse_kb",
    "parse_literal",
    "parse_proof",
    "serialize",
]
