"""Concrete syntax: ``.ndkb`` knowledge bases and ``.ndp`` proof documents.

Knowledge bases::

    friends(X,Y) <- like(X,Y) & like(Y,X).     # rule
    sunny(e) | ~sunny(e).                       # disjunctive fact
    ok(X) <- a(X) ; b(X).                       # ';' separates body disjuncts

Proofs::

    goal: (p(a), (imp p(a) q(a)) ; q(a))
    step 1: Axiom from [] gives (p(a), (imp p(a) q(a)) ; p(a), (imp p(a) q(a)))
    step 2: ImpElim from [1] gives (p(a), (imp p(a) q(a)) ; q(a))
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .checker import AXIOM, RULES, Proof, ProofStep, Sequent
from .forward import range_problems
from .index import BUILTIN_ARITY, DEFAULT_BUILTINS
from .kb import DisjunctiveFact, KnowledgeBase, Rule, SourceSpan
from .logic import (
    BOT,
    And,
    Atom,
    Const,
    Exists,
    ForAll,
    Formula,
    Func,
    Implies,
    Literal,
    Or,
    Term,
    Var,
)


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # "error" | "warning"
    message: str
    span: SourceSpan

    def __str__(self):
        return f"{self.span}: {self.severity}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: Sequence[ParseDiagnostic]):
        self.diagnostics = list(diagnostics)
        errors = [d for d in self.diagnostics if d.severity == "error"]
        super().__init__("\n".join(map(str, errors or self.diagnostics)))


# ---------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow><-)
  | (?P<int>-?\d+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<punct>[()\[\],.&|;~:])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, max(len(self.text), 1))


class _Syntax(Exception):
    def __init__(self, message: str, token: Token):
        self.message = message
        self.token = token


def tokenize(text: str, file: str = "<input>") -> Tuple[List[Token], List[ParseDiagnostic]]:
    tokens: List[Token] = []
    diags: List[ParseDiagnostic] = []
    line, line_start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            col = i - line_start + 1
            diags.append(ParseDiagnostic("error", f"unexpected character {text[i]!r}", SourceSpan(file, line, col, 1)))
            i += 1
            continue
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, i - line_start + 1))
        i = m.end()
    last_col = len(text) - line_start + 1
    tokens.append(Token("eof", "", line, last_col))
    return tokens, diags


class _Cursor:
    def __init__(self, tokens: List[Token], pos: int = 0):
        self.tokens = tokens
        self.pos = pos

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "arrow") and t.text == text

    def take(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str, what: str = "") -> Token:
        if not self.at(text):
            raise _Syntax(f"expected '{text}'{what}, found {self.describe()}", self.tok)
        return self.take()

    def describe(self) -> str:
        t = self.tok
        return "end of input" if t.kind == "eof" else f"'{t.text}'"


# ---------------------------------------------------------------- terms and literals


def _term(cur: _Cursor) -> Term:
    t = cur.tok
    if t.kind == "var":
        cur.take()
        return Var(t.text)
    if t.kind == "int":
        cur.take()
        return Const(t.text)
    if t.kind == "ident":
        cur.take()
        if cur.at("("):
            return Func(t.text, _args(cur))
        return Const(t.text)
    raise _Syntax(f"expected a term, found {cur.describe()}", t)


def _args(cur: _Cursor) -> List[Term]:
    cur.expect("(")
    args = [_term(cur)]
    while cur.at(","):
        cur.take()
        args.append(_term(cur))
    cur.expect(")", " to close the argument list")
    return args


def _atom(cur: _Cursor) -> Atom:
    t = cur.tok
    if t.kind != "ident":
        raise _Syntax(f"expected a predicate name, found {cur.describe()}", t)
    cur.take()
    return Atom(t.text, _args(cur) if cur.at("(") else [])


def _literal(cur: _Cursor) -> Tuple[Literal, Token]:
    start = cur.tok
    positive = True
    if cur.at("~"):
        cur.take()
        positive = False
    return Literal(_atom(cur), positive), start


# ---------------------------------------------------------------- knowledge bases


@dataclass
class _Statement:
    heads: List[Tuple[Literal, Token]]
    head_ops: List[Token]
    body: Optional[List[List[Tuple[Literal, Token]]]]
    start: Token
    end: Token


def _statement(cur: _Cursor) -> _Statement:
    start = cur.tok
    heads = [_literal(cur)]
    ops: List[Token] = []
    while cur.at("&") or cur.at("|"):
        ops.append(cur.take())
        heads.append(_literal(cur))
    body = None
    if cur.at("<-"):
        cur.take()
        body = [[_literal(cur)]]
        while cur.at("&") or cur.at(";"):
            sep = cur.take()
            if sep.text == ";":
                body.append([])
            body[-1].append(_literal(cur))
    end = cur.expect(".", " at the end of the statement")
    return _Statement(heads, ops, body, start, end)


def _recover(cur: _Cursor) -> None:
    while cur.tok.kind != "eof" and not cur.at("."):
        cur.take()
    cur.take()


class _Checker:
    """Cross-statement checks: arities, builtins, groundness, safety."""

    def __init__(self, file: str, builtins):
        self.file = file
        self.builtins = builtins
        self.arity: Dict[Tuple[str, str], Tuple[int, Token]] = {}
        self.diags: List[ParseDiagnostic] = []

    def error(self, msg, tok):
        self.diags.append(ParseDiagnostic("error", msg, tok.span(self.file)))

    def warn(self, msg, tok):
        self.diags.append(ParseDiagnostic("warning", msg, tok.span(self.file)))

    def _fix_arity(self, kind, name, n, tok):
        prev = self.arity.get((kind, name))
        if prev is None:
            self.arity[(kind, name)] = (n, tok)
        elif prev[0] != n:
            where = f"line {prev[1].line}"
            self.error(f"arity conflict: {kind} {name} used with {n} arguments, but with {prev[0]} at {where}", tok)

    def _terms(self, t: Term, tok):
        if isinstance(t, Func):
            self._fix_arity("function", t.symbol, len(t.args), tok)
            for a in t.args:
                self._terms(a, tok)

    def literal(self, lit: Literal, tok: Token, place: str) -> bool:
        a = lit.atom
        if a.pred in self.builtins:
            if place != "body":
                self.error(f"builtin {a.pred} cannot appear in a {place}", tok)
                return False
            want = BUILTIN_ARITY.get(a.pred, 2)
            if len(a.args) != want:
                self.error(f"ill-formed builtin: {a.pred} takes {want} arguments, got {len(a.args)}", tok)
                return False
            for arg in a.args:
                if not (isinstance(arg, Var) or (isinstance(arg, Const) and arg.is_int)):
                    self.error(f"ill-formed builtin: {a.pred} argument {arg} is not an integer or variable", tok)
                    return False
            return True
        self._fix_arity("predicate", a.pred, len(a.args), tok)
        for t in a.args:
            self._terms(t, tok)
        return True


def _span(st: _Statement, file: str) -> SourceSpan:
    length = st.end.col - st.start.col + 1 if st.end.line == st.start.line else len(st.start.text)
    return SourceSpan(file, st.start.line, st.start.col, max(length, 1))


def parse_kb(text: str, file: str = "<input>", builtins=DEFAULT_BUILTINS) -> Tuple[KnowledgeBase, List[ParseDiagnostic]]:
    """Parse a knowledge base; raises :class:`ParseError` carrying every diagnostic if any is an error."""
    tokens, diags = tokenize(text, file)
    cur = _Cursor(tokens)
    chk = _Checker(file, builtins)
    chk.diags.extend(diags)
    facts: List[Literal] = []
    dfacts: List[DisjunctiveFact] = []
    rules: List[Rule] = []
    drules: List[Rule] = []
    while cur.tok.kind != "eof":
        try:
            st = _statement(cur)
        except _Syntax as e:
            chk.error(e.message, e.token)
            _recover(cur)
            continue
        span = _span(st, file)
        seps = {t.text for t in st.head_ops}
        ok = True
        if len(seps) > 1:
            chk.error("a head mixes '&' and '|'; use one connective", st.head_ops[0])
            ok = False
        disjunctive = seps == {"|"}
        place = "fact" if st.body is None else "head"
        for lit, tok in st.heads:
            ok = chk.literal(lit, tok, place) and ok
        for conjunct in st.body or ():
            for lit, tok in conjunct:
                ok = chk.literal(lit, tok, "body") and ok
        heads = tuple(lit for lit, _ in st.heads)

        if st.body is None:
            if "&" in seps:
                chk.error("a fact cannot be a conjunction; state each literal separately", st.head_ops[0])
                ok = False
            for lit, tok in st.heads:
                if not lit.is_ground():
                    chk.error(f"fact {lit} is not ground", tok)
                    ok = False
            if len(set(heads)) != len(heads):
                chk.error("disjunctive fact repeats an alternative", st.start)
                ok = False
            if not ok:
                continue
            if len(heads) == 1:
                facts.append(heads[0])
            else:
                dfacts.append(DisjunctiveFact(heads, span=span))
            continue

        if not ok:
            continue
        rule = Rule(heads, tuple(tuple(lit for lit, _ in c) for c in st.body), disjunctive and len(heads) > 1, span)
        problems = range_problems(rule, builtins)
        if problems:
            for v, why in problems.items():
                chk.error(f"unsafe: {v}: {why}", st.start)
            continue
        if rule.existentials:
            chk.warn(f"unsafe: query fragment (existential {', '.join(rule.existentials)})", st.start)
        (drules if rule.disjunctive else rules).append(rule)

    diagnostics = chk.diags
    if any(d.severity == "error" for d in diagnostics):
        raise ParseError(diagnostics)
    kb = KnowledgeBase(tuple(facts), tuple(rules), tuple(dfacts), tuple(drules), builtins)
    return kb, diagnostics


def parse_literal(text: str, file: str = "<goal>") -> Literal:
    """A single literal, as used for command-line goals; a trailing '.' is allowed."""
    tokens, diags = tokenize(text, file)
    if diags:
        raise ParseError(diags)
    cur = _Cursor(tokens)
    try:
        lit, _ = _literal(cur)
        if cur.at("."):
            cur.take()
        if cur.tok.kind != "eof":
            raise _Syntax(f"unexpected {cur.describe()} after the literal", cur.tok)
    except _Syntax as e:
        raise ParseError([ParseDiagnostic("error", e.message, e.token.span(file))]) from None
    return lit


# ---------------------------------------------------------------- proofs

_BINARY = {"and": And, "or": Or, "imp": Implies}
_QUANT = {"forall": ForAll, "exists": Exists}


def _formula(cur: _Cursor) -> Formula:
    t = cur.tok
    if t.kind == "ident" and t.text == "bot":
        cur.take()
        return BOT
    if cur.at("("):
        cur.take()
        op = cur.tok
        if op.kind == "ident" and op.text in _BINARY:
            cur.take()
            left = _formula(cur)
            right = _formula(cur)
            f = _BINARY[op.text](left, right)
        elif op.kind == "ident" and op.text in _QUANT:
            cur.take()
            v = cur.tok
            if v.kind != "var":
                raise _Syntax(f"expected a variable after {op.text}, found {cur.describe()}", v)
            cur.take()
            f = _QUANT[op.text](v.text, _formula(cur))
        else:
            raise _Syntax(f"expected and/or/imp/forall/exists, found {cur.describe()}", op)
        cur.expect(")", f" to close ({op.text} ...)")
        return f
    return _atom(cur)


def _formula_list(cur: _Cursor, stop: str) -> List[Formula]:
    out: List[Formula] = []
    if cur.at(stop):
        return out
    out.append(_formula(cur))
    while cur.at(","):
        cur.take()
        out.append(_formula(cur))
    return out


def _sequent(cur: _Cursor) -> Sequent:
    cur.expect("(", " to open a sequent")
    a = _formula_list(cur, ";")
    cur.expect(";", " between assumptions and conclusions")
    c = _formula_list(cur, ")")
    cur.expect(")", " to close the sequent")
    return Sequent(a, c)


def _keyword(cur: _Cursor, word: str):
    t = cur.tok
    if t.kind != "ident" or t.text != word:
        raise _Syntax(f"expected '{word}', found {cur.describe()}", t)
    cur.take()


def _line_tokens(tokens: List[Token]) -> List[List[Token]]:
    lines: Dict[int, List[Token]] = {}
    for t in tokens:
        if t.kind != "eof":
            lines.setdefault(t.line, []).append(t)
    return [lines[k] for k in sorted(lines)]


def parse_proof(text: str, file: str = "<input>") -> Tuple[Proof, List[ParseDiagnostic]]:
    """Parse a proof document; raises :class:`ParseError` on any error."""
    tokens, diags = tokenize(text, file)
    diags = list(diags)

    def err(msg, tok):
        diags.append(ParseDiagnostic("error", msg, tok.span(file)))

    goal: Optional[Sequent] = None
    steps: List[ProofStep] = []
    for line in _line_tokens(tokens):
        eol = line[-1]
        cur = _Cursor(line + [Token("eof", "", eol.line, eol.col + len(eol.text))])
        try:
            head = cur.tok
            if head.kind == "ident" and head.text == "goal":
                cur.take()
                cur.expect(":")
                if goal is not None:
                    raise _Syntax("duplicate goal line", head)
                goal = _sequent(cur)
            elif head.kind == "ident" and head.text == "step":
                cur.take()
                num = cur.take()
                if num.kind != "int":
                    raise _Syntax(f"expected a step number, found '{num.text}'", num)
                if int(num.text) != len(steps) + 1:
                    raise _Syntax(f"step {num.text} out of sequence; expected step {len(steps) + 1}", num)
                cur.expect(":")
                tag = cur.take()
                if tag.text not in RULES and tag.text != AXIOM:
                    raise _Syntax(f"unknown rule tag '{tag.text}'", tag)
                _keyword(cur, "from")
                cur.expect("[")
                refs: List[int] = []
                while not cur.at("]"):
                    r = cur.take()
                    if r.kind != "int":
                        raise _Syntax(f"expected a step reference, found '{r.text}'", r)
                    k = int(r.text)
                    if not 1 <= k <= len(steps):
                        raise _Syntax(f"unresolved reference: step {k} of {len(steps)} earlier steps", r)
                    refs.append(k - 1)
                    if not cur.at("]"):
                        cur.expect(",")
                cur.expect("]")
                _keyword(cur, "gives")
                out = _sequent(cur)
                witness = None
                if cur.tok.kind == "ident" and cur.tok.text == "witness":
                    cur.take()
                    cur.expect(":")
                    witness = _formula(cur) if tag.text == "OrElim" else _term(cur)
                steps.append(ProofStep(tag.text, tuple(refs), out, witness))
            else:
                raise _Syntax(f"expected 'goal:' or 'step N:', found {cur.describe()}", head)
            if cur.tok.kind != "eof":
                raise _Syntax(f"unexpected {cur.describe()} at end of line", cur.tok)
        except _Syntax as e:
            err(e.message, e.token)
    if goal is None:
        diags.append(ParseDiagnostic("error", "missing goal line", SourceSpan(file, 1, 1, 1)))
    if any(d.severity == "error" for d in diags):
        raise ParseError(diags)
    return Proof(goal, steps), diags


# ---------------------------------------------------------------- serialization


def serialize_kb(kb: KnowledgeBase) -> str:
    facts = sorted([f"{f}." for f in kb.facts] + [str(d) for d in kb.disjunctive_facts])
    rules = sorted(str(r) for r in kb.rules + kb.disjunctive_rules)
    return "".join(line + "\n" for line in facts + rules)


def serialize_proof(proof: Proof) -> str:
    lines = [f"goal: {proof.goal}"]
    for i, s in enumerate(proof.steps, 1):
        refs = ", ".join(str(k + 1) for k in s.inputs)
        line = f"step {i}: {s.rule} from [{refs}] gives {s.output}"
        if s.witness is not None:
            line += f" witness: {s.witness}"
        lines.append(line)
    return "\n".join(lines) + "\n"


def serialize(value, goal: Optional[Literal] = None) -> str:
    """Canonical text of a knowledge base, a proof, or a case tree."""
    from .planning import Leaf, Split, render_trace

    if isinstance(value, KnowledgeBase):
        return serialize_kb(value)
    if isinstance(value, Proof):
        return serialize_proof(value)
    if isinstance(value, (Leaf, Split)):
        return render_trace(value, goal)
    raise TypeError(f"cannot serialize {type(value).__name__}")
