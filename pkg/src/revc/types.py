"""Constraint-based type inference with register sizes.

Terms generate type and integer constraints; the solver unifies equalities,
decomposes subtyping, and then assigns each size variable the smallest natural
number meeting its lower bounds. Register subtyping runs against size: a larger
register may be used wherever a smaller one is required, so for integers
``ISub(a, b)`` means ``a >= b``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Mapping

from . import terms as T
from .terms import SourceSpan, Term


class TypeError_(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.message = message
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


TypeInferenceError = TypeError_


# --- integer expressions -----------------------------------------------------


@dataclass(frozen=True)
class IExp:
    """Linear expression ``const + sum(coeff * var)`` in canonical form."""

    const: int = 0
    coeffs: tuple[tuple[int, int], ...] = ()  # sorted (var, coeff), no zero coeffs

    @staticmethod
    def lit(n: int) -> "IExp":
        return IExp(n, ())

    @staticmethod
    def var(v: int) -> "IExp":
        return IExp(0, ((v, 1),))

    @staticmethod
    def _make(const: int, d: Mapping[int, int]) -> "IExp":
        return IExp(const, tuple(sorted((k, c) for k, c in d.items() if c)))

    def __add__(self, o: "IExp") -> "IExp":
        d = dict(self.coeffs)
        for k, c in o.coeffs:
            d[k] = d.get(k, 0) + c
        return IExp._make(self.const + o.const, d)

    def scale(self, k: int) -> "IExp":
        return IExp._make(self.const * k, {v: c * k for v, c in self.coeffs})

    def __sub__(self, o: "IExp") -> "IExp":
        return self + o.scale(-1)

    @property
    def vars(self) -> frozenset[int]:
        return frozenset(v for v, _ in self.coeffs)

    def is_closed(self) -> bool:
        return not self.coeffs

    def subst(self, env: Mapping[int, "IExp"]) -> "IExp":
        out = IExp.lit(self.const)
        for v, c in self.coeffs:
            out = out + (env[v].scale(c) if v in env else IExp(0, ((v, c),)))
        return out

    def eval(self, env: Mapping[int, int]) -> int:
        return self.const + sum(c * env[v] for v, c in self.coeffs)

    def __str__(self) -> str:
        parts = []
        for v, c in self.coeffs:
            name = f"n{v}"
            parts.append(name if c == 1 else f"-{name}" if c == -1 else f"{c}*{name}")
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts).replace("+ -", "- ")


# --- type expressions --------------------------------------------------------


class TExp:
    __slots__ = ()


@dataclass(frozen=True)
class TVar(TExp):
    id: int

    def __str__(self):
        return f"X{self.id}"


@dataclass(frozen=True)
class TUnit(TExp):
    def __str__(self):
        return "Unit"


@dataclass(frozen=True)
class TBool(TExp):
    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class TReg(TExp):
    size: IExp

    def __str__(self):
        return f"Register {self.size}"


@dataclass(frozen=True)
class TFun(TExp):
    param: TExp
    result: TExp

    def __str__(self):
        p = f"({self.param})" if isinstance(self.param, TFun) else str(self.param)
        return f"{p} -> {self.result}"


UNIT = TUnit()
BOOL = TBool()


def Register(n: int | IExp) -> TReg:
    return TReg(n if isinstance(n, IExp) else IExp.lit(n))


# --- constraints -------------------------------------------------------------


@dataclass(frozen=True)
class TEq:
    left: TExp
    right: TExp
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class TSub:
    """``sub`` may be used where ``sup`` is required."""

    sub: TExp
    sup: TExp
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class IEq:
    left: IExp
    right: IExp
    span: SourceSpan | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ISub:
    """``sub ⊑ sup`` on sizes, i.e. ``sub >= sup`` as integers."""

    sub: IExp
    sup: IExp
    span: SourceSpan | None = field(default=None, compare=False)


Constraint = TEq | TSub | IEq | ISub


class _Fresh:
    def __init__(self):
        self.t = itertools.count()
        self.i = itertools.count()

    def tvar(self) -> TVar:
        return TVar(next(self.t))

    def ivar(self) -> IExp:
        return IExp.var(next(self.i))


# --- constraint generation ---------------------------------------------------


def gen_constraints(ctx: Mapping[str, TExp], t: Term, fresh: _Fresh | None = None) -> tuple[TExp, list[Constraint]]:
    fresh = fresh or _Fresh()
    out: list[Constraint] = []
    ty = _gen(dict(ctx), t, fresh, out)
    return ty, out


def _gen(ctx: dict, t: Term, fr: _Fresh, out: list) -> TExp:
    sp = t.span
    if isinstance(t, T.Let):
        t1 = _gen(ctx, t.bound, fr, out)
        return _gen({**ctx, t.name: t1}, t.body, fr, out)
    if isinstance(t, T.Var):
        if t.name not in ctx:
            raise TypeError_(f"unbound name '{t.name}'", sp)
        return ctx[t.name]
    if isinstance(t, T.Lambda):
        x = fr.tvar()
        body = _gen({**ctx, t.param: x}, t.body, fr, out)
        return TFun(x, body)
    if isinstance(t, T.Apply):
        t1 = _gen(ctx, t.fn, fr, out)
        t2 = _gen(ctx, t.arg, fr, out)
        x1, x2 = fr.tvar(), fr.tvar()
        out.append(TEq(t1, TFun(x1, x2), sp))
        out.append(TSub(t2, x1, t.arg.span or sp))
        return x2
    if isinstance(t, T.Seq):
        t1 = _gen(ctx, t.first, fr, out)
        t2 = _gen(ctx, t.second, fr, out)
        out.append(TEq(t1, UNIT, t.first.span or sp))
        return t2
    if isinstance(t, (T.Xor, T.And)):
        t1 = _gen(ctx, t.left, fr, out)
        t2 = _gen(ctx, t.right, fr, out)
        out.append(TEq(t1, BOOL, t.left.span or sp))
        out.append(TEq(t2, BOOL, t.right.span or sp))
        return BOOL
    if isinstance(t, (T.BoolConst, T.LocConst, T.ExprConst)):
        return BOOL
    if isinstance(t, T.Unit):
        return UNIT
    if isinstance(t, T.Assign):
        t1 = _gen(ctx, t.target, fr, out)
        t2 = _gen(ctx, t.value, fr, out)
        out.append(TEq(t1, BOOL, t.target.span or sp))
        out.append(TEq(t2, BOOL, t.value.span or sp))
        return UNIT
    if isinstance(t, T.Append):
        t1 = _gen(ctx, t.left, fr, out)
        t2 = _gen(ctx, t.right, fr, out)
        x1, x2, x3 = fr.ivar(), fr.ivar(), fr.ivar()
        out.append(TEq(t1, TReg(x1), t.left.span or sp))
        out.append(TEq(t2, TReg(x2), t.right.span or sp))
        out.append(IEq(x3, x1 + x2, sp))
        return TReg(x3)
    if isinstance(t, T.Index):
        t1 = _gen(ctx, t.reg, fr, out)
        x = fr.ivar()
        out.append(TEq(t1, TReg(x), sp))
        # 0-based: index i needs at least i+1 bits
        out.append(ISub(x, IExp.lit(t.index + 1), sp))
        return BOOL
    if isinstance(t, T.Slice):
        if t.lo > t.hi:
            raise TypeError_(f"empty slice {t.lo}..{t.hi}", sp)
        t1 = _gen(ctx, t.reg, fr, out)
        x = fr.ivar()
        out.append(TEq(t1, TReg(x), sp))
        out.append(ISub(x, IExp.lit(t.hi + 1), sp))
        return Register(t.hi - t.lo + 1)
    if isinstance(t, T.RegisterLit):
        for item in t.items:
            ti = _gen(ctx, item, fr, out)
            out.append(TEq(ti, BOOL, item.span or sp))
        return Register(len(t.items))
    if isinstance(t, T.RegisterVal):
        return Register(len(t.locs))
    if isinstance(t, T.Rotate):
        t1 = _gen(ctx, t.reg, fr, out)
        x = fr.ivar()
        out.append(TEq(t1, TReg(x), sp))
        out.append(ISub(x, IExp.lit(1), sp))
        return TReg(x)
    if isinstance(t, (T.Clean, T.Assert)):
        t1 = _gen(ctx, t.arg, fr, out)
        out.append(TEq(t1, BOOL, t.arg.span or sp))
        return UNIT
    raise TypeError_(f"cannot type {type(t).__name__}", sp)


# --- solving -----------------------------------------------------------------


@dataclass
class Bounds:
    lower: list = field(default_factory=list)
    upper: list = field(default_factory=list)

    def __str__(self):
        return f"[{_show_bounds(self.lower, max)} ; {_show_bounds(self.upper, min)}]"


def _show_bounds(items: list, tightest) -> str:
    # constants collapse to the tightest one; symbolic bounds are listed once
    consts, other = [], {}
    for b in items:
        v = b if isinstance(b, int) else (b.const if isinstance(b, IExp) and b.is_closed() else None)
        if v is None:
            other.setdefault(str(b), None)
        else:
            consts.append(v)
    shown = ([str(tightest(consts))] if consts else []) + list(other)
    return ", ".join(shown) or "-"


@dataclass
class BoundMap:
    types: dict[int, Bounds] = field(default_factory=dict)
    ints: dict[int, Bounds] = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [f"X{k} in {v}" for k, v in sorted(self.types.items())]
        out += [f"n{k} in {v}" for k, v in sorted(self.ints.items())]
        return out


@dataclass
class TypeSubst:
    types: dict[int, TExp] = field(default_factory=dict)
    ints: dict[int, int] = field(default_factory=dict)

    def apply(self, t: TExp) -> TExp:
        if isinstance(t, TVar):
            r = self.types.get(t.id)
            return t if r is None else self.apply(r)
        if isinstance(t, TReg):
            s = t.size.subst({k: IExp.lit(v) for k, v in self.ints.items()})
            return TReg(s)
        if isinstance(t, TFun):
            return TFun(self.apply(t.param), self.apply(t.result))
        return t

    def int_value(self, e: IExp) -> int:
        return e.eval(self.ints)


class _Solver:
    def __init__(self, fresh: _Fresh):
        self.fresh = fresh
        self.tsub: dict[int, TExp] = {}  # unification bindings
        self.isub: dict[int, IExp] = {}  # eliminated integer variables
        self.ineqs: list[ISub] = []
        self.deferred: list[TSub] = []
        self.bounds = BoundMap()

    # type-level
    def resolve(self, t: TExp) -> TExp:
        while isinstance(t, TVar) and t.id in self.tsub:
            t = self.tsub[t.id]
        return t

    def zonk(self, t: TExp) -> TExp:
        t = self.resolve(t)
        if isinstance(t, TReg):
            return TReg(self.izonk(t.size))
        if isinstance(t, TFun):
            return TFun(self.zonk(t.param), self.zonk(t.result))
        return t

    def occurs(self, v: int, t: TExp) -> bool:
        t = self.resolve(t)
        if isinstance(t, TVar):
            return t.id == v
        if isinstance(t, TFun):
            return self.occurs(v, t.param) or self.occurs(v, t.result)
        return False

    def bind(self, v: int, t: TExp, span) -> None:
        if self.occurs(v, t):
            raise TypeError_(f"circular type: X{v} occurs in {self.zonk(t)}", span)
        self.tsub[v] = t

    def unify(self, a: TExp, b: TExp, span) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, TVar) and isinstance(b, TVar) and a.id == b.id:
            return
        if isinstance(a, TVar):
            return self.bind(a.id, b, span)
        if isinstance(b, TVar):
            return self.bind(b.id, a, span)
        if type(a) is not type(b):
            raise TypeError_(f"type mismatch: {self.zonk(a)} vs {self.zonk(b)}", span)
        if isinstance(a, TReg):
            return self.ieq(a.size, b.size, span)
        if isinstance(a, TFun):
            self.unify(a.param, b.param, span)
            self.unify(a.result, b.result, span)

    def subtype(self, a: TExp, b: TExp, span) -> bool:
        """Process ``a ⊑ b``; returns False if it must wait (both sides variables)."""
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, TVar) and isinstance(b, TVar):
            return a.id == b.id
        if isinstance(a, TVar) or isinstance(b, TVar):
            v, other = (a, b) if isinstance(a, TVar) else (b, a)
            if isinstance(other, (TUnit, TBool)):
                self.bind(v.id, other, span)
            elif isinstance(other, TReg):
                self.bind(v.id, TReg(self.fresh.ivar()), span)
            else:
                self.bind(v.id, TFun(self.fresh.tvar(), self.fresh.tvar()), span)
            return self.subtype(a, b, span)
        if type(a) is not type(b):
            raise TypeError_(f"{self.zonk(a)} cannot be used as {self.zonk(b)}", span)
        if isinstance(a, TReg):
            self.ineqs.append(ISub(a.size, b.size, span))
        elif isinstance(a, TFun):
            # contravariant parameter, covariant result
            for c in (TSub(b.param, a.param, span), TSub(a.result, b.result, span)):
                if not self.subtype(c.sub, c.sup, span):
                    self.deferred.append(c)
        return True

    # integer-level
    def izonk(self, e: IExp) -> IExp:
        while e.vars & self.isub.keys():
            e = e.subst(self.isub)
        return e

    def ieq(self, a: IExp, b: IExp, span) -> None:
        d = self.izonk(a - b)
        if d.is_closed():
            if d.const != 0:
                raise TypeError_(f"register size mismatch: {self.izonk(a)} vs {self.izonk(b)}", span)
            return
        # eliminate the newest variable with a unit coefficient
        for v, c in sorted(d.coeffs, reverse=True):
            if c in (1, -1):
                rest = IExp._make(d.const, {k: cc for k, cc in d.coeffs if k != v})
                self.isub[v] = rest.scale(-c)
                return
        raise TypeError_(f"unsupported size constraint {d} = 0", span)


def compute_bounds(constraints: list[Constraint], fresh: _Fresh | None = None) -> _Solver:
    """Unify equalities and decompose subtyping into integer bounds."""
    s = _Solver(fresh or _Fresh())
    # equalities first: they fix most shapes before subtyping is decomposed
    for c in constraints:
        if isinstance(c, TEq):
            s.unify(c.left, c.right, c.span)
        elif isinstance(c, IEq):
            s.ieq(c.left, c.right, c.span)
    pending = [c for c in constraints if isinstance(c, TSub)]
    s.ineqs.extend(c for c in constraints if isinstance(c, ISub))
    while pending:
        before = len(s.tsub)
        waiting = [c for c in pending if not s.subtype(c.sub, c.sup, c.span)]
        waiting += s.deferred
        s.deferred = []
        if len(s.tsub) == before and len(waiting) == len(pending):
            break
        pending = waiting
    for c in pending:
        a, b = s.resolve(c.sub), s.resolve(c.sup)
        s.bounds.types.setdefault(a.id, Bounds()).upper.append(b)
        s.bounds.types.setdefault(b.id, Bounds()).lower.append(a)
    # variable-to-variable subtyping that nothing resolved: identify the two
    for c in pending:
        s.unify(c.sub, c.sup, c.span)
    return s


def _solve_ints(s: _Solver) -> dict[int, int]:
    ineqs = []
    for c in s.ineqs:
        d = s.izonk(c.sub - c.sup)  # must be >= 0
        if d.is_closed():
            if d.const < 0:
                raise TypeError_(
                    f"register too small: needs {s.izonk(c.sup)} bits, has {s.izonk(c.sub)}", c.span
                )
            continue
        ineqs.append((d, c.span))
    free = set()
    for d, _ in ineqs:
        free |= d.vars
    for e in list(s.isub.values()):
        free |= s.izonk(e).vars
    for v in free:
        s.bounds.ints.setdefault(v, Bounds())
    for d, _ in ineqs:
        for v, c in d.coeffs:
            rest = IExp._make(d.const, {k: cc for k, cc in d.coeffs if k != v})
            if c > 0:
                s.bounds.ints[v].lower.append(rest.scale(-1))
            else:
                s.bounds.ints[v].upper.append(rest)
    val = {v: 0 for v in free}
    # sizes of eliminated variables must also be natural numbers
    for v, e in s.isub.items():
        z = s.izonk(e)
        if not z.is_closed():
            ineqs.append((z, None))
    limit = 1000 + 100 * len(ineqs) * max(1, len(val))
    for _ in range(limit):
        changed = False
        for d, span in ineqs:
            cur = d.eval(val)
            if cur >= 0:
                continue
            pos = [(v, c) for v, c in d.coeffs if c > 0]
            if not pos:
                raise TypeError_(f"size constraint {d} >= 0 cannot be satisfied", span)
            # raise the oldest variable with a positive coefficient
            v, c = min(pos)
            val[v] += (-cur + c - 1) // c
            changed = True
        if not changed:
            return val
    raise TypeError_("size constraints do not converge")


def solve(constraints: list[Constraint], fresh: _Fresh | None = None) -> TypeSubst:
    s = compute_bounds(constraints, fresh)
    ints = _solve_ints(s)
    for v, e in s.isub.items():
        z = s.izonk(e)
        n = z.eval(ints) if all(k in ints for k in z.vars) else None
        if n is None:
            for k in z.vars:
                ints.setdefault(k, 0)
            n = z.eval(ints)
        if n < 0:
            raise TypeError_(f"negative register size for n{v}")
        ints[v] = n
    types = {}
    for v in s.tsub:
        types[v] = s.zonk(TVar(v))
    sub = TypeSubst(types, ints)
    sub.solver = s  # for --dump-types
    return sub


def _default(t: TExp, sub: TypeSubst, notes: list[str]) -> TExp:
    if isinstance(t, TVar):
        notes.append(f"unconstrained type X{t.id} defaults to Bool")
        return BOOL
    if isinstance(t, TReg):
        z = t.size
        if not z.is_closed():
            for v in z.vars:
                if v not in sub.ints:
                    notes.append(f"unconstrained size n{v} defaults to 0")
                    sub.ints[v] = 0
            z = IExp.lit(z.eval(sub.ints))
        return TReg(z)
    if isinstance(t, TFun):
        return TFun(_default(t.param, sub, notes), _default(t.result, sub, notes))
    return t


@dataclass
class Signature:
    params: tuple[TExp, ...]
    result: TExp
    notes: tuple[str, ...] = ()
    bounds: BoundMap | None = None

    def __iter__(self):
        return iter(self.params)

    def __len__(self):
        return len(self.params)

    def __getitem__(self, i):
        return self.params[i]

    def __str__(self):
        return " -> ".join(str(p) for p in (*self.params, self.result))


def infer_type(t: Term) -> tuple[TExp, TypeSubst, list[str]]:
    fresh = _Fresh()
    ty, cs = gen_constraints({}, t, fresh)
    sub = solve(cs, fresh)
    notes: list[str] = []
    closed = _default(sub.apply(sub.solver.zonk(ty)), sub, notes)
    return closed, sub, notes


def infer_signature(t: Term, warn: bool = True) -> Signature:
    ty, sub, notes = infer_type(t)
    params = []
    while isinstance(ty, TFun):
        params.append(ty.param)
        ty = ty.result
    for p in params:
        if not isinstance(p, (TBool, TReg)):
            raise TypeError_(f"program parameters must be Bool or registers, got {p}", t.span)
    if warn:
        for n in dict.fromkeys(notes):
            warnings.warn(n, stacklevel=2)
    return Signature(tuple(params), ty, tuple(dict.fromkeys(notes)), sub.solver.bounds)


def param_width(p) -> int | None:
    """None for a Boolean parameter, the register size otherwise."""
    if isinstance(p, TBool) or p is None:
        return None
    if isinstance(p, TReg):
        if not p.size.is_closed():
            raise TypeError_(f"register size {p.size} is not closed")
        return p.size.const
    if isinstance(p, int):
        return p
    raise TypeError_(f"unsupported parameter type {p}")
