"""First-order terms, formulas, substitution and unification.

Formulas compare by alpha-equivalence: ``ForAll("X", p(X)) == ForAll("Y", p(Y))``.
Everything here is immutable and hashable.
"""
from __future__ import annotations

import itertools
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

Substitution = Dict[str, "Term"]


# ---------------------------------------------------------------- terms


class Term:
    __slots__ = ()

    def is_ground(self) -> bool:
        raise NotImplementedError


class Var(Term):
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("V", name))

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    def is_ground(self):
        return False


class Const(Term):
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        self.name = name
        self._hash = hash(("C", name))

    def __eq__(self, other):
        return isinstance(other, Const) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Const({self.name!r})"

    def __str__(self):
        return self.name

    def is_ground(self):
        return True

    @property
    def is_int(self) -> bool:
        n = self.name[1:] if self.name.startswith("-") else self.name
        return n.isdigit()

    @property
    def value(self) -> int:
        return int(self.name)


class Func(Term):
    __slots__ = ("symbol", "args", "_hash", "_ground")

    def __init__(self, symbol: str, args: Sequence[Term]):
        self.symbol = symbol
        self.args = tuple(args)
        self._hash = hash(("F", symbol, self.args))
        self._ground = all(a.is_ground() for a in self.args)

    def __eq__(self, other):
        return (
            isinstance(other, Func)
            and other._hash == self._hash
            and other.symbol == self.symbol
            and other.args == self.args
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Func({self.symbol!r}, {list(self.args)!r})"

    def __str__(self):
        return f"{self.symbol}({','.join(map(str, self.args))})"

    def is_ground(self):
        return self._ground


def term_vars(t: Term, acc: Optional[set] = None) -> set:
    if acc is None:
        acc = set()
    if isinstance(t, Var):
        acc.add(t.name)
    elif isinstance(t, Func) and not t._ground:
        for a in t.args:
            term_vars(a, acc)
    return acc


def term_depth(t: Term) -> int:
    if isinstance(t, Func):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def term_constants(t: Term, acc: set) -> set:
    if isinstance(t, Const):
        acc.add(t)
    elif isinstance(t, Func):
        for a in t.args:
            term_constants(a, acc)
    return acc


def subst_term(t: Term, s: Substitution) -> Term:
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Func) and not t._ground:
        return Func(t.symbol, [subst_term(a, s) for a in t.args])
    return t


def _walk(t: Term, s: Substitution) -> Term:
    while isinstance(t, Var) and t.name in s:
        t = s[t.name]
    return t


def _occurs(name: str, t: Term, s: Substitution) -> bool:
    t = _walk(t, s)
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Func):
        return any(_occurs(name, a, s) for a in t.args)
    return False


def _unify_terms(a: Term, b: Term, s: Substitution) -> bool:
    a, b = _walk(a, s), _walk(b, s)
    if a == b:
        return True
    if isinstance(a, Var):
        if _occurs(a.name, b, s):
            return False
        s[a.name] = b
        return True
    if isinstance(b, Var):
        return _unify_terms(b, a, s)
    if isinstance(a, Func) and isinstance(b, Func):
        if a.symbol != b.symbol or len(a.args) != len(b.args):
            return False
        return all(_unify_terms(x, y, s) for x, y in zip(a.args, b.args))
    return False


def _resolve(s: Substitution) -> Substitution:
    def full(t):
        t = _walk(t, s)
        if isinstance(t, Func) and not t._ground:
            return Func(t.symbol, [full(a) for a in t.args])
        return t

    return {k: full(v) for k, v in s.items()}


def match_term(pattern: Term, ground: Term, s: Substitution) -> bool:
    """One-way match of ``pattern`` onto ``ground``; extends ``s`` in place."""
    if isinstance(pattern, Var):
        bound = s.get(pattern.name)
        if bound is None:
            s[pattern.name] = ground
            return True
        return bound == ground
    if isinstance(pattern, Const):
        return pattern == ground
    if pattern._ground:
        return pattern == ground
    if not isinstance(ground, Func) or ground.symbol != pattern.symbol:
        return False
    if len(ground.args) != len(pattern.args):
        return False
    return all(match_term(p, g, s) for p, g in zip(pattern.args, ground.args))


# ---------------------------------------------------------------- formulas


class Formula:
    """Base class. Equality and hashing are modulo renaming of bound variables."""

    __slots__ = ("_key", "_khash")

    def _compute_key(self, env: Dict[str, int], depth: int):
        raise NotImplementedError

    @property
    def key(self):
        try:
            return self._key
        except AttributeError:
            k = self._compute_key({}, 0)
            object.__setattr__(self, "_key", k)
            object.__setattr__(self, "_khash", hash(k))
            return k

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return hash(self) == hash(other) and self.key == other.key

    def __hash__(self):
        try:
            return self._khash
        except AttributeError:
            self.key
            return self._khash

    def __repr__(self):
        return f"<{type(self).__name__} {self}>"


def _term_key(t: Term, env: Dict[str, int], depth: int):
    if not env:
        return t
    if isinstance(t, Var):
        if t.name in env:
            return ("#", depth - env[t.name])
        return t
    if isinstance(t, Func) and not t._ground:
        return ("f", t.symbol, tuple(_term_key(a, env, depth) for a in t.args))
    return t


class Atom(Formula):
    __slots__ = ("pred", "args", "_hash", "_ground")

    def __init__(self, pred: str, args: Sequence[Term] = ()):
        self.pred = pred
        self.args = tuple(args)
        self._hash = hash(("A", pred, self.args))
        self._ground = all(a.is_ground() for a in self.args)

    def _compute_key(self, env, depth):
        if not env or self._ground:
            return self
        return ("atom", self.pred, tuple(_term_key(a, env, depth) for a in self.args))

    @property
    def key(self):
        return self

    def __eq__(self, other):
        if isinstance(other, Atom):
            return (
                other._hash == self._hash
                and other.pred == self.pred
                and other.args == self.args
            )
        return False if isinstance(other, Formula) else NotImplemented

    def __hash__(self):
        return self._hash

    def __str__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({','.join(map(str, self.args))})"

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return self._ground


class Bottom(Formula):
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def _compute_key(self, env, depth):
        return ("bot",)

    def __str__(self):
        return "bot"


class _Binary(Formula):
    __slots__ = ("left", "right")
    tag = ""

    def __init__(self, left: Formula, right: Formula):
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def _compute_key(self, env, depth):
        return (
            self.tag,
            self.left._compute_key(env, depth),
            self.right._compute_key(env, depth),
        )

    def __str__(self):
        return f"({self.tag} {self.left} {self.right})"


class And(_Binary):
    __slots__ = ()
    tag = "and"


class Or(_Binary):
    __slots__ = ()
    tag = "or"


class Implies(_Binary):
    __slots__ = ()
    tag = "imp"


class _Quant(Formula):
    __slots__ = ("var", "body")
    tag = ""

    def __init__(self, var: str, body: Formula):
        object.__setattr__(self, "var", var)
        object.__setattr__(self, "body", body)

    def _compute_key(self, env, depth):
        inner = dict(env)
        inner[self.var] = depth + 1
        return (self.tag, self.body._compute_key(inner, depth + 1))

    def __str__(self):
        return f"({self.tag} {self.var} {self.body})"


class ForAll(_Quant):
    __slots__ = ()
    tag = "forall"


class Exists(_Quant):
    __slots__ = ()
    tag = "exists"


BOT = Bottom()


def Not(f: Formula) -> Formula:
    """Negation has no primitive connective; it is ``f -> bot``."""
    return Implies(f, BOT)


def is_negation(f: Formula) -> bool:
    return isinstance(f, Implies) and isinstance(f.right, Bottom)


def conj(fs: Sequence[Formula]) -> Formula:
    """Right-nested conjunction of a nonempty sequence."""
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(fs: Sequence[Formula]) -> Formula:
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


# ---------------------------------------------------------------- literals


class Literal:
    __slots__ = ("atom", "positive", "_hash")

    def __init__(self, atom: Atom, positive: bool = True):
        self.atom = atom
        self.positive = positive
        self._hash = hash((atom._hash, positive))

    def __eq__(self, other):
        return (
            isinstance(other, Literal)
            and other._hash == self._hash
            and other.positive == self.positive
            and other.atom == self.atom
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Literal({self})"

    def __str__(self):
        return str(self.atom) if self.positive else f"~{self.atom}"

    @property
    def pred(self) -> str:
        return self.atom.pred

    @property
    def args(self) -> Tuple[Term, ...]:
        return self.atom.args

    def is_ground(self) -> bool:
        return self.atom._ground

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def to_formula(self) -> Formula:
        return self.atom if self.positive else Not(self.atom)

    def substitute(self, s: Substitution) -> "Literal":
        if self.atom._ground:
            return self
        return Literal(Atom(self.atom.pred, [subst_term(a, s) for a in self.atom.args]), self.positive)

    def variables(self) -> set:
        acc: set = set()
        for a in self.atom.args:
            term_vars(a, acc)
        return acc

    def sort_key(self):
        return (self.atom.pred, tuple(str(a) for a in self.atom.args), not self.positive)


def pos(pred: str, *args: Term) -> Literal:
    return Literal(Atom(pred, args), True)


def neg(pred: str, *args: Term) -> Literal:
    return Literal(Atom(pred, args), False)


# ---------------------------------------------------------------- operations


def free_variables(f: Formula) -> frozenset:
    """Names of variables with a free occurrence in ``f``."""
    acc: set = set()
    _free(f, frozenset(), acc)
    return frozenset(acc)


def _free(f, bound, acc):
    if isinstance(f, Atom):
        for a in f.args:
            for v in term_vars(a):
                if v not in bound:
                    acc.add(v)
    elif isinstance(f, _Binary):
        _free(f.left, bound, acc)
        _free(f.right, bound, acc)
    elif isinstance(f, _Quant):
        _free(f.body, bound | {f.var}, acc)


def all_variables(f: Formula) -> set:
    acc: set = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            for a in g.args:
                term_vars(a, acc)
        elif isinstance(g, _Binary):
            stack += [g.left, g.right]
        elif isinstance(g, _Quant):
            acc.add(g.var)
            stack.append(g.body)
    return acc


def constants_of(f: Formula) -> set:
    acc: set = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Atom):
            for a in g.args:
                term_constants(a, acc)
        elif isinstance(g, _Binary):
            stack += [g.left, g.right]
        elif isinstance(g, _Quant):
            stack.append(g.body)
    return acc


def _fresh(base: str, avoid: set) -> str:
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in avoid:
            return cand


def apply_substitution(f: Formula, s: Substitution) -> Formula:
    """Replace free occurrences of the variables bound in ``s``.

    Capture-avoiding: a quantifier whose variable would capture a variable
    of an inserted term is renamed first.
    """
    if not s:
        return f
    if isinstance(f, Atom):
        if f._ground:
            return f
        return Atom(f.pred, [subst_term(a, s) for a in f.args])
    if isinstance(f, Bottom):
        return f
    if isinstance(f, _Binary):
        return type(f)(apply_substitution(f.left, s), apply_substitution(f.right, s))
    if isinstance(f, _Quant):
        inner = {k: v for k, v in s.items() if k != f.var}
        if not inner:
            return f
        body_free = free_variables(f.body)
        inner = {k: v for k, v in inner.items() if k in body_free}
        if not inner:
            return f
        incoming = set()
        for t in inner.values():
            term_vars(t, incoming)
        var, body = f.var, f.body
        if var in incoming:
            avoid = incoming | all_variables(body) | set(inner)
            new = _fresh(var, avoid)
            body = apply_substitution(body, {var: Var(new)})
            var = new
        return type(f)(var, apply_substitution(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def unify(a: Atom, b: Atom) -> Optional[Substitution]:
    """Most general unifier of two atoms (occurs check on), or None."""
    if a.pred != b.pred or len(a.args) != len(b.args):
        return None
    s: Substitution = {}
    for x, y in zip(a.args, b.args):
        if not _unify_terms(x, y, s):
            return None
    return _resolve(s)


def match_atom(pattern: Atom, ground: Atom, s: Optional[Substitution] = None) -> Optional[Substitution]:
    """Extend ``s`` so that ``pattern`` instantiates to ``ground``, or None."""
    if pattern.pred != ground.pred or len(pattern.args) != len(ground.args):
        return None
    out = dict(s) if s else {}
    for p, g in zip(pattern.args, ground.args):
        if not match_term(p, g, out):
            return None
    return out


# ---------------------------------------------------------------- DNF

DnfBody = List[List[Literal]]


def to_dnf(f: Formula) -> DnfBody:
    """Disjunctive normal form of a quantifier-free formula.

    ``A -> bot`` is read as the negation of ``A``; any other occurrence of
    ``bot`` and any quantifier is rejected with ValueError.
    """
    return [list(c) for c in _dnf(f, True)]


def _dnf(f, polarity):
    if isinstance(f, Atom):
        return [(Literal(f, polarity),)]
    if isinstance(f, _Quant):
        raise ValueError("to_dnf: quantifiers are not allowed")
    if isinstance(f, Bottom):
        raise ValueError("to_dnf: bot is only allowed as a negation (A -> bot)")
    if is_negation(f):
        return _dnf(f.left, not polarity)
    if isinstance(f, Implies):
        # A -> B  ==  ~A | B
        return _dnf(Or(Not(f.left), f.right), polarity) if polarity else _dnf(
            And(f.left, Not(f.right)), True
        )
    conjunctive = isinstance(f, And) == polarity
    left, right = _dnf(f.left, polarity), _dnf(f.right, polarity)
    if not conjunctive:
        return left + right
    return [l + r for l in left for r in right]


# ---------------------------------------------------------------- matching


def match_premise(conjunct: Sequence[Literal], facts: Iterable[Literal]) -> List[Substitution]:
    """All substitutions mapping every literal of ``conjunct`` into ``facts``.

    Negative literals match only negative facts.
    """
    from .index import FactIndex, join

    idx = facts if isinstance(facts, FactIndex) else FactIndex(facts)
    return list(join(conjunct, idx, {}))


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, _Binary):
            stack += [g.right, g.left]
        elif isinstance(g, _Quant):
            stack.append(g.body)


def formula_size(f: Formula) -> int:
    return sum(1 for _ in iter_subformulas(f))
