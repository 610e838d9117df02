"""Indexed fact store and conjunctive matching over it."""
from __future__ import annotations

from typing import Dict, Iterable, Iterator, List, Optional, Sequence

from .logic import Func, Literal, Substitution, Term, Var, match_atom, subst_term

BUILTIN_ARITY = {"geq": 2, "leq": 2, "eq": 2}


class BuiltinError(ValueError):
    pass


class BuiltinRegistry:
    """Evaluable integer comparisons."""

    def __init__(self, extra=None):
        self.table = {
            "geq": lambda a, b: a >= b,
            "leq": lambda a, b: a <= b,
            "eq": lambda a, b: a == b,
        }
        if extra:
            self.table.update(extra)

    def __contains__(self, pred):
        return pred in self.table

    def evaluate(self, pred: str, args: Sequence[Term]) -> bool:
        fn = self.table.get(pred)
        if fn is None:
            raise BuiltinError(f"unknown builtin {pred}")
        values = []
        for a in args:
            if not a.is_ground():
                raise BuiltinError(f"{pred}: argument {a} is not ground")
            if getattr(a, "is_int", False) is not True:
                raise BuiltinError(f"{pred}: argument {a} is not an integer")
            values.append(a.value)
        return bool(fn(*values))


DEFAULT_BUILTINS = BuiltinRegistry()


def eval_builtin(pred: str, args: Sequence[Term], registry: BuiltinRegistry = DEFAULT_BUILTINS) -> bool:
    return registry.evaluate(pred, args)


class FactIndex:
    """Ground literals indexed by predicate and by (position, argument).

    Insertion order is preserved, so enumeration is deterministic.
    """

    def __init__(self, facts: Iterable[Literal] = ()):
        self._facts: Dict[Literal, None] = {}
        self._by_pred: Dict[tuple, List[Literal]] = {}
        self._by_arg: Dict[tuple, List[Literal]] = {}
        for f in facts:
            self.add(f)

    def add(self, fact: Literal) -> bool:
        if fact in self._facts:
            return False
        if not fact.is_ground():
            raise ValueError(f"fact {fact} is not ground")
        self._facts[fact] = None
        key = (fact.positive, fact.atom.pred, len(fact.atom.args))
        self._by_pred.setdefault(key, []).append(fact)
        for i, a in enumerate(fact.atom.args):
            self._by_arg.setdefault(key + (i, a), []).append(fact)
        return True

    def __contains__(self, fact):
        return fact in self._facts

    def __len__(self):
        return len(self._facts)

    def __iter__(self):
        return iter(self._facts)

    def copy(self) -> "FactIndex":
        new = FactIndex.__new__(FactIndex)
        new._facts = dict(self._facts)
        new._by_pred = {k: list(v) for k, v in self._by_pred.items()}
        new._by_arg = {k: list(v) for k, v in self._by_arg.items()}
        return new

    def candidates(self, lit: Literal, bound: Substitution) -> List[Literal]:
        """Stored facts that could match ``lit`` under ``bound``; smallest list wins."""
        key = (lit.positive, lit.atom.pred, len(lit.atom.args))
        best = self._by_pred.get(key, [])
        if not best:
            return best
        for i, a in enumerate(lit.atom.args):
            if isinstance(a, Var):
                a = bound.get(a.name)
                if a is None:
                    continue
            elif isinstance(a, Func) and not a.is_ground():
                a = subst_term(a, bound)
                if not a.is_ground():
                    continue
            lst = self._by_arg.get(key + (i, a), [])
            if len(lst) < len(best):
                best = lst
                if not best:
                    break
        return best


def _unbound(lit: Literal, bound: Substitution) -> bool:
    return any(v not in bound for v in lit.variables())


def join(
    literals: Sequence[Literal],
    index: FactIndex,
    bound: Optional[Substitution] = None,
    builtins: Optional[BuiltinRegistry] = None,
) -> Iterator[Substitution]:
    """Enumerate extensions of ``bound`` that map every literal into ``index``.

    Literals are matched fewest-candidates first; builtin literals are
    evaluated as soon as their arguments are ground and never bind.
    """
    bound = dict(bound) if bound else {}
    builtins = builtins if builtins is not None else DEFAULT_BUILTINS
    plain, evaluable = [], []
    for lit in literals:
        (evaluable if lit.atom.pred in builtins else plain).append(lit)
    yield from _join(plain, evaluable, index, bound, builtins)


def _check_builtins(evaluable, bound, builtins):
    rest = []
    for lit in evaluable:
        if _unbound(lit, bound):
            rest.append(lit)
            continue
        g = lit.substitute(bound)
        if builtins.evaluate(g.atom.pred, g.atom.args) != g.positive:
            return None
    return rest


def _join(plain, evaluable, index, bound, builtins):
    evaluable = _check_builtins(evaluable, bound, builtins)
    if evaluable is None:
        return
    if not plain:
        if evaluable:
            names = sorted({v for lit in evaluable for v in lit.variables() if v not in bound})
            raise BuiltinError(f"builtin arguments never bound: {', '.join(names)}")
        yield dict(bound)
        return
    best_i, best = 0, None
    for i, lit in enumerate(plain):
        cands = index.candidates(lit, bound)
        if best is None or len(cands) < len(best):
            best_i, best = i, cands
            if not cands:
                return
    lit = plain[best_i]
    rest = plain[:best_i] + plain[best_i + 1 :]
    for fact in best:
        s = match_atom(lit.atom, fact.atom, bound)
        if s is not None:
            yield from _join(rest, evaluable, index, s, builtins)
