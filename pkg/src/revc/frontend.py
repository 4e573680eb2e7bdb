"""Lexer, parser and desugarer for ``.rvs`` source text.

Parsing produces a sugared tree: core term nodes plus derived forms
(``not``, ``||``, ``if``, ``for``) and symbolic meta-level integers.
:func:`desugar` folds the integers and unrolls loops, yielding core terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from . import terms as T
from .terms import SourceSpan, Term


class FrontendError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None, filename: str | None = None):
        self.message = message
        self.span = span
        self.filename = filename
        super().__init__(self.__str__())

    def __str__(self) -> str:
        where = ""
        if self.span is not None:
            where = f"{self.span.line}:{self.span.column}: "
        if self.filename:
            where = f"{self.filename}:{where}"
        return f"{where}{self.message}"


class ParseError(FrontendError):
    pass


class MetaIntError(FrontendError):
    """A loop bound, index, slice or rotation amount is not a compile-time constant."""


# --- lexer -------------------------------------------------------------------

KEYWORDS = {
    "let", "in", "fun", "not", "clean", "assert", "rot", "for", "do", "done",
    "if", "then", "else", "true", "false", "begin", "end",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<zero>Array\.zeroCreate\b)
  | (?P<num>[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<op>\.\[|\.\.|<-|<>|&&|\|\||->|[()\[\];=@+\-*/%])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # num, ident, kw, op, zero, eof
    text: str
    span: SourceSpan


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            span = SourceSpan(pos, pos + 1, line, pos - line_start + 1)
            raise ParseError(f"unexpected character {source[pos]!r}", span)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            toks.append(Token(kind, text, SourceSpan(pos, m.end(), line, pos - line_start + 1)))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", SourceSpan(n, n, line, n - line_start + 1)))
    return toks


# --- meta-level integers -----------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IntVar:
    name: str
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IntBin:
    op: str
    left: "IExpr"
    right: "IExpr"
    span: SourceSpan | None = field(default=None, compare=False)


IExpr = IntLit | IntVar | IntBin


def eval_int(e: IExpr, env: Mapping[str, int]) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, IntVar):
        if e.name not in env:
            raise MetaIntError(f"'{e.name}' is not a compile-time integer", e.span)
        return env[e.name]
    a, b = eval_int(e.left, env), eval_int(e.right, env)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise MetaIntError("division by zero in integer expression", e.span)
    return a // b if e.op == "/" else a % b


# --- sugared forms -----------------------------------------------------------


@dataclass(frozen=True)
class SNot(Term):
    arg: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SOr(Term):
    left: Term
    right: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SIf(Term):
    cond: Term
    then: Term
    orelse: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SFor(Term):
    var: str
    lo: IExpr
    hi: IExpr
    body: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SIntLet(Term):
    name: str
    value: IExpr
    body: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SIndex(Term):
    reg: Term
    index: IExpr
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SSlice(Term):
    reg: Term
    lo: IExpr
    hi: IExpr
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SRotate(Term):
    amount: IExpr
    reg: Term
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SZeroCreate(Term):
    length: IExpr
    span: SourceSpan | None = field(default=None, compare=False)


SUGAR_TYPES = (SNot, SOr, SIf, SFor, SIntLet, SIndex, SSlice, SRotate, SZeroCreate)


# --- parser ------------------------------------------------------------------


def _join(a: SourceSpan | None, b: SourceSpan | None) -> SourceSpan | None:
    if a is None or b is None:
        return a or b
    return SourceSpan(a.start, max(a.end, b.end), a.line, a.column)


_STOP = {"in", "then", "else", "do", "done", "end", ")", "]", "eof"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0
        # innermost-last stack of binders; True marks a compile-time integer
        self.scopes: list[dict[str, bool]] = []

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("kw", "op") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected '{text}'")
        return self.advance()

    def expect_ident(self) -> Token:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        return self.advance()

    def error(self, msg: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else f"'{t.text}'"
        raise ParseError(f"{msg}, found {found}", t.span)

    def is_int_name(self, name: str) -> bool:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        return False

    def _stop_here(self) -> bool:
        t = self.tok
        return t.kind == "eof" or (t.kind in ("kw", "op") and t.text in _STOP)

    # grammar
    def program(self) -> Term:
        t = self.expr()
        if self.tok.kind != "eof":
            self.error("unexpected token")
        return t

    def expr(self) -> Term:
        first = self.stmt()
        if self.at(";"):
            self.advance()
            if self._stop_here():
                return first  # trailing semicolon
            rest = self.expr()
            return T.Seq(first, rest, _join(first.span, rest.span))
        return first

    def stmt(self) -> Term:
        if self.at("let"):
            return self.let()
        if self.at("fun"):
            start = self.advance().span
            params = [self.expect_ident().text]
            while self.tok.kind == "ident":
                params.append(self.advance().text)
            self.expect("->")
            body = self._scoped_body(params, self.expr)
            for p in reversed(params):
                body = T.Lambda(p, body, _join(start, body.span))
            return body
        if self.at("if"):
            start = self.advance().span
            c = self.expr()
            self.expect("then")
            a = self.stmt()
            self.expect("else")
            b = self.stmt()
            return SIf(c, a, b, _join(start, b.span))
        lhs = self.or_expr()
        if self.at("<-"):
            self.advance()
            rhs = self.stmt()
            return T.Assign(lhs, rhs, _join(lhs.span, rhs.span))
        return lhs

    def _scoped_body(self, names, fn, as_int: bool = False):
        # term binders shadow integer names; integer binders introduce them
        self.scopes.append({n: as_int for n in names})
        try:
            return fn()
        finally:
            self.scopes.pop()

    def let(self) -> Term:
        start = self.advance().span
        name = self.expect_ident().text
        params = []
        while self.tok.kind == "ident":
            params.append(self.advance().text)
        self.expect("=")
        if not params:
            ival = self._try_int_until_in()
            if ival is not None:
                self.expect("in")
                body = self._scoped_body([name], self.expr, as_int=True)
                return SIntLet(name, ival, body, _join(start, body.span))
        if params:
            bound = self._scoped_body(params, self.expr)
            for p in reversed(params):
                bound = T.Lambda(p, bound, _join(start, bound.span))
        else:
            bound = self.expr()
        self.expect("in")
        body = self._scoped_body([name], self.expr)
        return T.Let(name, bound, body, _join(start, body.span))

    def _try_int_until_in(self) -> IExpr | None:
        t = self.tok
        if not (t.kind == "num" or (t.kind == "ident" and self.is_int_name(t.text)) or self.at("(")):
            return None
        save = self.i
        try:
            e = self.int_sum()
        except FrontendError:
            self.i = save
            return None
        if self.at("in"):
            return e
        self.i = save
        return None

    def or_expr(self) -> Term:
        lhs = self.and_expr()
        while self.at("||"):
            self.advance()
            rhs = self.and_expr()
            lhs = SOr(lhs, rhs, _join(lhs.span, rhs.span))
        return lhs

    def and_expr(self) -> Term:
        lhs = self.xor_expr()
        while self.at("&&"):
            self.advance()
            rhs = self.xor_expr()
            lhs = T.And(lhs, rhs, _join(lhs.span, rhs.span))
        return lhs

    def xor_expr(self) -> Term:
        lhs = self.append_expr()
        while self.at("<>"):
            self.advance()
            rhs = self.append_expr()
            lhs = T.Xor(lhs, rhs, _join(lhs.span, rhs.span))
        return lhs

    def append_expr(self) -> Term:
        lhs = self.app_expr()
        if self.at("@"):
            self.advance()
            rhs = self.append_expr()
            return T.Append(lhs, rhs, _join(lhs.span, rhs.span))
        return lhs

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind in ("ident", "num", "zero"):
            return t.kind != "num"
        return t.kind in ("kw", "op") and t.text in ("(", "[", "true", "false", "for", "begin")

    def app_expr(self) -> Term:
        t = self.tok
        if self.at("not"):
            self.advance()
            arg = self.app_expr()
            return SNot(arg, _join(t.span, arg.span))
        if self.at("clean"):
            self.advance()
            arg = self.postfix()
            return T.Clean(arg, _join(t.span, arg.span))
        if self.at("assert"):
            self.advance()
            arg = self.postfix()
            return T.Assert(arg, _join(t.span, arg.span))
        if self.at("rot"):
            self.advance()
            amount = self.int_sum()
            arg = self.postfix()
            return SRotate(amount, arg, _join(t.span, arg.span))
        fn = self.postfix()
        while self._starts_atom():
            arg = self.postfix()
            fn = T.Apply(fn, arg, _join(fn.span, arg.span))
        return fn

    def postfix(self) -> Term:
        t = self.atom()
        while self.at(".["):
            self.advance()
            lo = self.int_sum()
            if self.at(".."):
                self.advance()
                hi = self.int_sum()
                end = self.expect("]").span
                t = SSlice(t, lo, hi, _join(t.span, end))
            else:
                end = self.expect("]").span
                t = SIndex(t, lo, _join(t.span, end))
        return t

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            if self.is_int_name(t.text):
                raise ParseError(f"integer '{t.text}' used where a term is expected", t.span)
            return T.Var(t.text, t.span)
        if t.kind == "zero":
            self.advance()
            n = self.int_atom()
            return SZeroCreate(n, _join(t.span, n.span))
        if self.at("true") or self.at("false"):
            self.advance()
            return T.BoolConst(t.text == "true", t.span)
        if self.at("("):
            self.advance()
            if self.at(")"):
                end = self.advance().span
                return T.Unit(_join(t.span, end))
            inner = self.expr()
            self.expect(")")
            return inner
        if self.at("begin"):
            self.advance()
            inner = self.expr()
            self.expect("end")
            return inner
        if self.at("["):
            self.advance()
            items = []
            while not self.at("]"):
                items.append(self.stmt())
                if not self.at(";"):
                    break
                self.advance()
            end = self.expect("]").span
            return T.RegisterLit(tuple(items), _join(t.span, end))
        if self.at("for"):
            self.advance()
            var = self.expect_ident().text
            self.expect("in")
            lo = self.int_sum()
            self.expect("..")
            hi = self.int_sum()
            self.expect("do")
            body = self._scoped_body([var], self.expr, as_int=True)
            end = self.expect("done").span
            return SFor(var, lo, hi, body, _join(t.span, end))
        if t.kind == "num":
            raise ParseError(f"integer literal {t.text} used where a term is expected", t.span)
        self.error("expected an expression")

    # integer sublanguage
    def int_sum(self) -> IExpr:
        e = self.int_prod()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            r = self.int_prod()
            e = IntBin(op, e, r, _join(e.span, r.span))
        return e

    def int_prod(self) -> IExpr:
        e = self.int_atom()
        while self.at("*") or self.at("/") or self.at("%"):
            op = self.advance().text
            r = self.int_atom()
            e = IntBin(op, e, r, _join(e.span, r.span))
        return e

    def int_atom(self) -> IExpr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return IntLit(int(t.text), t.span)
        if t.kind == "ident":
            if not self.is_int_name(t.text):
                raise MetaIntError(f"'{t.text}' is not a compile-time integer", t.span)
            self.advance()
            return IntVar(t.text, t.span)
        if self.at("("):
            self.advance()
            e = self.int_sum()
            self.expect(")")
            return e
        self.error("expected an integer expression")


def parse_sugared(source: str, filename: str | None = None) -> Term:
    try:
        return _Parser(tokenize(source)).program()
    except FrontendError as e:
        e.filename = filename
        raise


# --- desugaring --------------------------------------------------------------


def _nat(e: IExpr, env: Mapping[str, int], what: str) -> int:
    v = eval_int(e, env)
    if v < 0:
        raise MetaIntError(f"{what} must be non-negative, got {v}", e.span)
    return v


def desugar(t: Term, env: Mapping[str, int] | None = None) -> Term:
    """Eliminate derived forms and fold meta-level integers under ``env``."""
    env = dict(env or {})
    return _desugar(t, env)


def _once(operands: list[Term], build, span, avoid: frozenset[str] = frozenset()) -> Term:
    """``build(*operands)``, with operands that have effects let-bound first.

    The expansions of ``||`` and ``if`` mention an operand twice; binding
    keeps its assignments from running twice. Pure operands stay inline.
    """
    avoid = avoid.union(*(T.free_names(o) for o in operands))
    bound, args = [], []
    for o in operands:
        if T.has_effects(o):
            name = T.fresh_name("sugar", avoid)
            avoid = avoid | {name}
            bound.append((name, o))
            args.append(T.Var(name, o.span))
        else:
            args.append(o)
    out = build(*args)
    for name, o in reversed(bound):
        out = T.Let(name, o, out, span)
    return out


def _desugar(t: Term, env: dict[str, int]) -> Term:
    d = lambda x: _desugar(x, env)  # noqa: E731
    sp = t.span
    if isinstance(t, SNot):
        return T.Xor(T.BoolConst(True, sp), d(t.arg), sp)
    if isinstance(t, SOr):
        a, b = d(t.left), d(t.right)
        return _once([a, b], lambda a, b: T.Xor(T.And(a, b, sp), T.Xor(a, b, sp), sp), sp)
    if isinstance(t, SIf):
        c, a, b = d(t.cond), d(t.then), d(t.orelse)

        def build(c):
            notc = T.Xor(T.BoolConst(True, sp), c, sp)
            return T.Xor(T.And(c, a, sp), T.And(notc, b, sp), sp)

        return _once([c], build, sp, avoid=T.free_names(a) | T.free_names(b))
    if isinstance(t, SFor):
        lo = eval_int(t.lo, env)
        hi = eval_int(t.hi, env)
        out: Term | None = None
        # right-nested so that "for ...; rest" reads like the unrolled text
        for i in range(hi, lo - 1, -1):
            body = _desugar(t.body, {**env, t.var: i})
            out = body if out is None else T.Seq(body, out, sp)
        return out if out is not None else T.Unit(sp)
    if isinstance(t, SIntLet):
        return _desugar(t.body, {**env, t.name: eval_int(t.value, env)})
    if isinstance(t, SIndex):
        return T.Index(d(t.reg), _nat(t.index, env, "index"), sp)
    if isinstance(t, SSlice):
        lo = _nat(t.lo, env, "slice bound")
        hi = _nat(t.hi, env, "slice bound")
        return T.Slice(d(t.reg), lo, hi, sp)
    if isinstance(t, SRotate):
        return T.Rotate(_nat(t.amount, env, "rotation amount"), d(t.reg), sp)
    if isinstance(t, SZeroCreate):
        n = _nat(t.length, env, "register length")
        return T.RegisterLit(tuple(T.BoolConst(False, sp) for _ in range(n)), sp)
    if isinstance(t, (T.Let, T.Lambda)):
        # a term binder shadows any integer of the same name
        name = t.name if isinstance(t, T.Let) else t.param
        inner = {k: v for k, v in env.items() if k != name}
        if isinstance(t, T.Let):
            return T.Let(t.name, d(t.bound), _desugar(t.body, inner), sp)
        return T.Lambda(t.param, _desugar(t.body, inner), sp)
    return T._map_children(t, d)


def parse(source: str, filename: str | None = None) -> Term:
    """Parse and desugar source text into a core term."""
    try:
        return desugar(parse_sugared(source, filename))
    except FrontendError as e:
        e.filename = filename
        raise


def is_core(t: Term) -> bool:
    return not any(isinstance(n, SUGAR_TYPES) for n in T.walk(t))
