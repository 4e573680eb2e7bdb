"""Core term language: AST, substitution and a parenthesizing printer."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field, fields, replace
from typing import Iterator

from .bexp import BExp


@dataclass(frozen=True, slots=True)
class SourceSpan:
    start: int
    end: int
    line: int
    column: int

    def __post_init__(self):
        if self.start > self.end:
            raise ValueError("span start after end")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


def _span():
    return field(default=None, compare=False, repr=False)


class Term:
    """Base class; every concrete term carries an optional source span."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Let(Term):
    name: str
    bound: Term
    body: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Lambda(Term):
    param: str
    body: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Apply(Term):
    fn: Term
    arg: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Seq(Term):
    first: Term
    second: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Var(Term):
    name: str
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Assign(Term):
    target: Term
    value: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class BoolConst(Term):
    value: bool
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Xor(Term):
    left: Term
    right: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class And(Term):
    left: Term
    right: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Clean(Term):
    arg: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Assert(Term):
    arg: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class RegisterLit(Term):
    items: tuple[Term, ...]
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Index(Term):
    reg: Term
    index: int
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Slice(Term):
    reg: Term
    lo: int
    hi: int
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Append(Term):
    left: Term
    right: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Rotate(Term):
    amount: int
    reg: Term
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class Unit(Term):
    span: SourceSpan | None = _span()


# evaluation-time values embedded back into terms by substitution


@dataclass(frozen=True, slots=True)
class LocConst(Term):
    loc: int
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class RegisterVal(Term):
    locs: tuple[int, ...]
    span: SourceSpan | None = _span()


@dataclass(frozen=True, slots=True)
class ExprConst(Term):
    """A Boolean expression over locations, not yet stored (growing expressions)."""

    expr: BExp
    span: SourceSpan | None = _span()


VALUE_TYPES = (LocConst, RegisterVal, ExprConst, Lambda, Unit)


@functools.lru_cache(maxsize=None)
def _field_names(cls) -> tuple[str, ...]:
    return tuple(f.name for f in fields(cls))


def children(t: Term) -> Iterator[Term]:
    for name in _field_names(type(t)):
        v = getattr(t, name)
        if isinstance(v, Term):
            yield v
        elif isinstance(v, tuple) and v and isinstance(v[0], Term):
            yield from v


def free_names(t: Term) -> frozenset[str]:
    if isinstance(t, Var):
        return frozenset({t.name})
    if isinstance(t, Lambda):
        return free_names(t.body) - {t.param}
    if isinstance(t, Let):
        return free_names(t.bound) | (free_names(t.body) - {t.name})
    out: frozenset[str] = frozenset()
    for c in children(t):
        out |= free_names(c)
    return out


def count_free(t: Term, name: str) -> int:
    if isinstance(t, Var):
        return 1 if t.name == name else 0
    if isinstance(t, Lambda):
        return 0 if t.param == name else count_free(t.body, name)
    if isinstance(t, Let):
        inner = 0 if t.name == name else count_free(t.body, name)
        return count_free(t.bound, name) + inner
    return sum(count_free(c, name) for c in children(t))


def has_effects(t: Term) -> bool:
    """Conservative: does evaluating ``t`` possibly assign or free a location?"""
    if isinstance(t, (Assign, Clean)):
        return True
    return any(has_effects(c) for c in children(t))


_fresh_counter = itertools.count()


def fresh_name(base: str, avoid: frozenset[str]) -> str:
    while True:
        cand = f"{base}'{next(_fresh_counter)}"
        if cand not in avoid:
            return cand


def _map_children(t: Term, fn) -> Term:
    changes = {}
    for name in _field_names(type(t)):
        v = getattr(t, name)
        if isinstance(v, Term):
            nv = fn(v)
            if nv is not v:
                changes[name] = nv
        elif isinstance(v, tuple) and v and isinstance(v[0], Term):
            nv = tuple(fn(x) for x in v)
            if any(a is not b for a, b in zip(nv, v)):
                changes[name] = nv
    return replace(t, **changes) if changes else t


def substitute(t: Term, name: str, value: Term) -> Term:
    """Capture-avoiding ``t[name := value]``."""
    fv = free_names(value)
    if not fv:
        return _subst_closed(t, name, value)
    return _subst(t, name, value, fv)


def _subst_closed(t: Term, name: str, value: Term) -> Term:
    # a closed value cannot be captured, so binders only matter for shadowing
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Lambda):
        if t.param == name:
            return t
        body = _subst_closed(t.body, name, value)
        return t if body is t.body else Lambda(t.param, body, t.span)
    if isinstance(t, Let):
        bound = _subst_closed(t.bound, name, value)
        body = t.body if t.name == name else _subst_closed(t.body, name, value)
        return t if bound is t.bound and body is t.body else Let(t.name, bound, body, t.span)
    if isinstance(t, VALUE_TYPES):
        return t
    return _map_children(t, lambda c: _subst_closed(c, name, value))


def _subst(t: Term, name: str, value: Term, fv: frozenset[str]) -> Term:
    if isinstance(t, Var):
        return value if t.name == name else t
    if isinstance(t, Lambda):
        if t.param == name or name not in free_names(t.body):
            return t
        if t.param in fv:
            new = fresh_name(t.param, fv | free_names(t.body))
            body = _subst(t.body, t.param, Var(new, t.span), frozenset({new}))
            return Lambda(new, _subst(body, name, value, fv), t.span)
        return Lambda(t.param, _subst(t.body, name, value, fv), t.span)
    if isinstance(t, Let):
        bound = _subst(t.bound, name, value, fv)
        if t.name == name or name not in free_names(t.body):
            return Let(t.name, bound, t.body, t.span) if bound is not t.bound else t
        if t.name in fv:
            new = fresh_name(t.name, fv | free_names(t.body))
            body = _subst(t.body, t.name, Var(new, t.span), frozenset({new}))
            return Let(new, bound, _subst(body, name, value, fv), t.span)
        return Let(t.name, bound, _subst(t.body, name, value, fv), t.span)
    if isinstance(t, VALUE_TYPES):
        return t
    return _map_children(t, lambda c: _subst(c, name, value, fv))


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


def pretty(t: Term) -> str:
    """Fully parenthesized concrete syntax; parses back to an equal term."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, BoolConst):
        return "true" if t.value else "false"
    if isinstance(t, Unit):
        return "()"
    if isinstance(t, Let):
        return f"(let {t.name} = {pretty(t.bound)} in {pretty(t.body)})"
    if isinstance(t, Lambda):
        return f"(fun {t.param} -> {pretty(t.body)})"
    if isinstance(t, Apply):
        return f"({pretty(t.fn)} {pretty(t.arg)})"
    if isinstance(t, Seq):
        return f"({pretty(t.first)}; {pretty(t.second)})"
    if isinstance(t, Assign):
        return f"({pretty(t.target)} <- {pretty(t.value)})"
    if isinstance(t, Xor):
        return f"({pretty(t.left)} <> {pretty(t.right)})"
    if isinstance(t, And):
        return f"({pretty(t.left)} && {pretty(t.right)})"
    if isinstance(t, Append):
        return f"({pretty(t.left)} @ {pretty(t.right)})"
    if isinstance(t, Clean):
        return f"(clean {pretty(t.arg)})"
    if isinstance(t, Assert):
        return f"(assert {pretty(t.arg)})"
    if isinstance(t, RegisterLit):
        return "[" + "; ".join(pretty(x) for x in t.items) + "]"
    if isinstance(t, Index):
        return f"{pretty(t.reg)}.[{t.index}]"
    if isinstance(t, Slice):
        return f"{pretty(t.reg)}.[{t.lo}..{t.hi}]"
    if isinstance(t, Rotate):
        return f"(rot {t.amount} {pretty(t.reg)})"
    if isinstance(t, LocConst):
        return f"<loc {t.loc}>"
    if isinstance(t, RegisterVal):
        return "<reg " + " ".join(map(str, t.locs)) + ">"
    if isinstance(t, ExprConst):
        return f"<expr {t.expr}>"
    raise TypeError(f"not a term: {t!r}")


def walk(t: Term) -> Iterator[Term]:
    yield t
    for c in children(t):
        yield from walk(c)
