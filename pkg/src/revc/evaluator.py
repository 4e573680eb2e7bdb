"""Big-step evaluation parameterized by an interpretation, and whole-program compilation.

Boolean subterms evaluate to expressions over locations (``ExprConst``) and are
only stored when they must be: on assignment, when bound to a name that is used
more than once (or whose scope has effects), when entering a register literal,
and before an effectful right operand is evaluated.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

from . import bexp as bx
from . import terms as T
from .bexp import BExp
from .circuit import Gate, Toffoli, mods, simulate_columns, uses
from .synth import AncHeap, Cleanup, compile_bexp_clean
from .terms import SourceSpan, Term


class EvalError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None, filename: str | None = None):
        self.message = message
        self.span = span
        self.filename = filename
        super().__init__(message)

    def __str__(self) -> str:
        where = f"{self.span}: " if self.span else ""
        if self.filename:
            where = f"{self.filename}:{where}" if where else f"{self.filename}: "
        return f"{where}{self.message}"


class AssertionFailed(EvalError):
    pass


class CleanFailed(EvalError):
    pass


class SizeLimitExceeded(EvalError):
    pass


# --- interpretations ---------------------------------------------------------


class Interpretation(Protocol):
    def fresh_loc(self) -> int: ...

    def alloc_inputs(self, count: int) -> list[int]: ...

    def assign(self, loc: int, b: BExp) -> None: ...

    def clean(self, loc: int, span: SourceSpan | None) -> None: ...

    def check_clean(self, b: BExp, span: SourceSpan | None) -> None: ...

    def check_assert(self, b: BExp, span: SourceSpan | None) -> None: ...


class _LocCounter:
    def __init__(self):
        self.next_loc = 0

    def fresh_loc(self) -> int:
        l = self.next_loc
        self.next_loc += 1
        return l


def _unbound(loc: int):
    raise EvalError(f"location {loc} is unbound (never assigned, or used after clean)")


class StdInterp(_LocCounter):
    """Concrete bits: the reference semantics."""

    def __init__(self, inputs: Sequence[int] = ()):
        super().__init__()
        self.heap: dict[int, int] = {}
        self._pending = list(inputs)
        self._consumed = 0

    def _read(self, loc: int) -> int:
        v = self.heap.get(loc)
        if v is None:
            _unbound(loc)
        return v

    def alloc_inputs(self, count: int) -> list[int]:
        if self._consumed + count > len(self._pending):
            raise EvalError(f"expected at least {self._consumed + count} input bits, got {len(self._pending)}")
        locs = []
        for _ in range(count):
            l = self.fresh_loc()
            self.heap[l] = self._pending[self._consumed] & 1
            self._consumed += 1
            locs.append(l)
        return locs

    def assign(self, loc: int, b: BExp) -> None:
        self.heap[loc] = bx.eval_bexp(b, self._read)

    def clean(self, loc: int, span=None) -> None:
        if self._read(loc) != 0:
            raise CleanFailed(f"cleaned location {loc} holds 1", span)
        del self.heap[loc]

    def check_clean(self, b: BExp, span=None) -> None:
        if bx.eval_bexp(b, self._read):
            raise CleanFailed("cleaned expression evaluates to 1", span)

    def check_assert(self, b: BExp, span=None) -> None:
        if not bx.eval_bexp(b, self._read):
            raise AssertionFailed("assertion evaluates to 0", span)

    def value(self, loc: int) -> int:
        return self._read(loc)


class BExpInterp(_LocCounter):
    """Deferred evaluation: each location stores an expression over input variables."""

    def __init__(self, node_cap: int = 10**6):
        super().__init__()
        self.heap: dict[int, BExp] = {}
        self.node_cap = node_cap
        self.n_inputs = 0

    def _read(self, loc: int) -> BExp:
        v = self.heap.get(loc)
        if v is None:
            _unbound(loc)
        return v

    def alloc_inputs(self, count: int) -> list[int]:
        locs = []
        for _ in range(count):
            l = self.fresh_loc()
            self.heap[l] = bx.Var(self.n_inputs)
            self.n_inputs += 1
            locs.append(l)
        return locs

    def expand(self, b: BExp) -> BExp:
        return bx.simplify(bx.substitute(b, self._read))

    def assign(self, loc: int, b: BExp) -> None:
        e = self.expand(b)
        if self.node_cap is not None and bx.size(e) > self.node_cap:
            raise SizeLimitExceeded(
                f"expression at location {loc} exceeds {self.node_cap} nodes; use default mode"
            )
        self.heap[loc] = e

    def clean(self, loc: int, span=None) -> None:
        self._read(loc)
        del self.heap[loc]

    def check_clean(self, b: BExp, span=None) -> None:
        pass

    def check_assert(self, b: BExp, span=None) -> None:
        pass

    def value(self, loc: int, init: Sequence[int]) -> int:
        return bx.eval_bexp(self._read(loc), lambda i: init[i])


class CircuitInvariantError(AssertionError):
    pass


class CircInterp(_LocCounter):
    """Locations map to circuit bits; assignment emits gates.

    ``zeros`` tracks mapped bits known to hold 0 (fresh constants), which lets
    an assignment onto such a bit compile in place instead of allocating.
    """

    def __init__(self, cleanup: Cleanup | str = Cleanup.LAZY, debug: bool = False):
        super().__init__()
        self.cleanup = Cleanup(cleanup)
        self.subs: dict[int, int] = {}
        self.heap = AncHeap()
        self.gates: list[Gate] = []
        self.zeros: set[int] = set()
        self.inputs: list[int] = []
        self.debug = debug

    def bit(self, loc: int) -> int:
        v = self.subs.get(loc)
        if v is None:
            _unbound(loc)
        return v

    def alloc_inputs(self, count: int) -> list[int]:
        locs = []
        for _ in range(count):
            l = self.fresh_loc()
            self.heap, i = self.heap.pop_min()
            self.subs[l] = i
            self.inputs.append(i)
            locs.append(l)
        return locs

    def assign(self, loc: int, b: BExp) -> None:
        def to_bit(l):
            i = self.bit(l)
            return bx.FALSE if i in self.zeros else bx.Var(i)

        b1 = bx.simplify(bx.substitute(b, to_bit))
        t = self.subs.get(loc)
        if t is not None and t in self.zeros:
            res = compile_bexp_clean(self.heap, t, b1, self.cleanup)
            value_zero = b1 == bx.FALSE
        else:
            b2 = bx.factor_as(b1, t) if t is not None else None
            if b2 is not None:
                res = compile_bexp_clean(self.heap, t, b2, self.cleanup)
                value_zero = False
            else:
                # always a fresh bit: reusing an input bit for a bare copy would alias two locations
                heap, t = self.heap.pop_min()
                res = compile_bexp_clean(heap, t, b1, self.cleanup)
                self.subs[loc] = t
                value_zero = b1 == bx.FALSE
        self.heap = res.heap
        self.gates.extend(res.circ)
        self.zeros -= mods(res.circ)
        if value_zero:
            self.zeros.add(t)
        else:
            self.zeros.discard(t)
        if self.debug:
            self.check_invariants()

    def clean(self, loc: int, span=None) -> None:
        i = self.bit(loc)
        del self.subs[loc]
        self.zeros.discard(i)
        self.heap = self.heap.insert(i)

    def check_clean(self, b: BExp, span=None) -> None:
        pass

    def check_assert(self, b: BExp, span=None) -> None:
        pass

    def check_invariants(self, samples: int = 64, seed: int = 0) -> None:
        """Simulate on random inputs: pooled and known-zero bits must read 0.

        Pool bits are only guaranteed zero for programs whose clean directives
        are correct; callers should enable this on verified programs.
        """
        if set(self.subs.values()) & self.heap.pool:
            raise CircuitInvariantError("a live location maps into the ancilla pool")
        rng = random.Random(seed)
        mask = (1 << samples) - 1
        cols = {i: rng.getrandbits(samples) for i in self.inputs}
        out = simulate_columns(self.gates, cols, mask)
        bad = [i for i in (*self.heap.pool, *self.zeros) if out.get(i, 0)]
        if bad:
            raise CircuitInvariantError(f"bits {sorted(bad)} should be zero")


# --- the evaluator -----------------------------------------------------------


def _is_value(t: Term) -> bool:
    return isinstance(t, T.VALUE_TYPES)


class Evaluator:
    def __init__(self, interp):
        self.interp = interp
        # optional hook seeing every argument value before a call
        self._before_call = getattr(interp, "before_call", None)

    # value coercions
    def to_bexp(self, v: Term, span) -> BExp:
        if isinstance(v, T.ExprConst):
            return v.expr
        if isinstance(v, T.LocConst):
            return bx.Var(v.loc)
        raise EvalError(f"expected a Boolean, got {_describe(v)}", span)

    def flush(self, v: Term, span) -> int:
        """Store a Boolean value in a location (a bare location is returned as is)."""
        if isinstance(v, T.LocConst):
            return v.loc
        b = self.to_bexp(v, span)
        if isinstance(b, bx.Var):
            return b.index
        l = self.interp.fresh_loc()
        self.interp.assign(l, b)
        return l

    def _normalize(self, v: Term) -> Term:
        if isinstance(v, T.ExprConst) and isinstance(v.expr, bx.Var):
            return T.LocConst(v.expr.index)
        return v

    def bind(self, v: Term, body: Term, name: str, span) -> Term:
        v = self._normalize(v)
        if isinstance(v, T.ExprConst):
            # constants too: a let-bound Boolean is a mutable location
            if T.count_free(body, name) > 1 or T.has_effects(body):
                v = T.LocConst(self.flush(v, span))
        return T.substitute(body, name, v)

    def eval(self, t: Term) -> Term:
        while True:
            if isinstance(t, T.Seq):
                self.eval(t.first)
                t = t.second
                continue
            if isinstance(t, T.Let):
                v = self.eval(t.bound)
                t = self.bind(v, t.body, t.name, t.span)
                continue
            if isinstance(t, T.Apply):
                f = self.eval(t.fn)
                if not isinstance(f, T.Lambda):
                    raise EvalError(f"cannot apply {_describe(f)}", t.span)
                a = self.eval(t.arg)
                if self._before_call is not None:
                    self._before_call(a)
                t = self.bind(a, f.body, f.param, t.span)
                continue
            return self._eval_step(t)

    def _eval_step(self, t: Term) -> Term:
        sp = t.span
        if _is_value(t):
            return self._normalize(t)
        if isinstance(t, T.BoolConst):
            return T.ExprConst(bx.const(t.value))
        if isinstance(t, T.Var):
            raise EvalError(f"unbound name '{t.name}'", sp)
        if isinstance(t, (T.Xor, T.And)):
            b1 = self.to_bexp(self.eval(t.left), t.left.span or sp)
            if not isinstance(b1, bx.Var) and not bx.is_const(b1) and T.has_effects(t.right):
                b1 = bx.Var(self.flush(T.ExprConst(b1), sp))
            b2 = self.to_bexp(self.eval(t.right), t.right.span or sp)
            node = bx.Xor if isinstance(t, T.Xor) else bx.And
            return T.ExprConst(node(b1, b2))
        if isinstance(t, T.Assign):
            target = self.eval(t.target)
            if not isinstance(target, T.LocConst):
                raise EvalError(f"assignment target must be a location, got {_describe(target)}", sp)
            b = self.to_bexp(self.eval(t.value), t.value.span or sp)
            self.interp.assign(target.loc, b)
            return T.Unit()
        if isinstance(t, T.RegisterLit):
            locs = []
            for item in t.items:
                v = self.eval(item)
                locs.append(self.flush(v, item.span or sp))
            return T.RegisterVal(tuple(locs))
        if isinstance(t, T.Index):
            locs = self._reg(t.reg, sp)
            if t.index >= len(locs):
                raise EvalError(f"index {t.index} out of range for register of size {len(locs)}", sp)
            return T.LocConst(locs[t.index])
        if isinstance(t, T.Slice):
            locs = self._reg(t.reg, sp)
            if t.lo > t.hi or t.hi >= len(locs):
                raise EvalError(f"slice {t.lo}..{t.hi} out of range for register of size {len(locs)}", sp)
            return T.RegisterVal(locs[t.lo : t.hi + 1])
        if isinstance(t, T.Append):
            a = self._reg(t.left, sp)
            b = self._reg(t.right, sp)
            return T.RegisterVal(a + b)
        if isinstance(t, T.Rotate):
            locs = self._reg(t.reg, sp)
            n = len(locs)
            if n == 0:
                raise EvalError("cannot rotate an empty register", sp)
            k = t.amount % n
            return T.RegisterVal(locs[k:] + locs[:k])
        if isinstance(t, T.Clean):
            v = self._normalize(self.eval(t.arg))
            if isinstance(v, T.LocConst):
                self.interp.clean(v.loc, sp)
            elif isinstance(v, T.RegisterVal):
                for l in v.locs:
                    self.interp.clean(l, sp)
            else:
                self.interp.check_clean(self.to_bexp(v, sp), sp)
            return T.Unit()
        if isinstance(t, T.Assert):
            b = self.to_bexp(self.eval(t.arg), sp)
            self.interp.check_assert(b, sp)
            return T.Unit()
        raise EvalError(f"cannot evaluate {type(t).__name__}", sp)

    def _reg(self, t: Term, span) -> tuple[int, ...]:
        v = self.eval(t)
        if not isinstance(v, T.RegisterVal):
            raise EvalError(f"expected a register, got {_describe(v)}", t.span or span)
        return v.locs

    def output_locs(self, v: Term, span=None) -> list[int]:
        v = self._normalize(v)
        if isinstance(v, T.RegisterVal):
            return list(v.locs)
        if isinstance(v, T.Unit):
            return []
        if isinstance(v, (T.LocConst, T.ExprConst)):
            return [self.flush(v, span)]
        raise EvalError(f"program result must be a Boolean or register, got {_describe(v)}", span)


def _describe(v: Term) -> str:
    if isinstance(v, T.RegisterVal):
        return f"a register of size {len(v.locs)}"
    if isinstance(v, (T.LocConst, T.ExprConst)):
        return "a Boolean"
    if isinstance(v, T.Lambda):
        return "a function"
    if isinstance(v, T.Unit):
        return "unit"
    return type(v).__name__


def eval_term(interp, t: Term):
    """Evaluate ``t`` under a copy of ``interp``; returns ``(value, new_interp)``."""
    import copy

    d = copy.deepcopy(interp)
    with _deep_recursion():
        v = Evaluator(d).eval(t)
    return v, d


def assign_std(heap: StdInterp, loc: int, b: BExp) -> StdInterp:
    import copy

    h = copy.deepcopy(heap)
    h.next_loc = max(h.next_loc, loc + 1)
    h.assign(loc, b)
    return h


def assign_bexp(heap: BExpInterp, loc: int, b: BExp) -> BExpInterp:
    import copy

    h = copy.deepcopy(heap)
    h.next_loc = max(h.next_loc, loc + 1)
    h.assign(loc, b)
    return h


def assign_circ(cs: CircInterp, loc: int, b: BExp) -> CircInterp:
    import copy

    c = copy.deepcopy(cs)
    c.next_loc = max(c.next_loc, loc + 1)
    c.assign(loc, b)
    return c


class _deep_recursion:
    # unrolled programs nest deeply; evaluation and substitution recurse on the tree
    def __init__(self, limit: int = 20000):
        self.limit = limit

    def __enter__(self):
        self.saved = sys.getrecursionlimit()
        sys.setrecursionlimit(max(self.saved, self.limit))

    def __exit__(self, *exc):
        sys.setrecursionlimit(self.saved)


# --- whole programs ----------------------------------------------------------


@dataclass(frozen=True)
class Stats:
    bits: int
    gates: int
    toffolis: int

    def as_dict(self) -> dict:
        return {"bits": self.bits, "gates": self.gates, "toffolis": self.toffolis}


@dataclass(frozen=True)
class CompiledUnit:
    circ: tuple[Gate, ...]
    input_bits: tuple[int, ...]
    output_bits: tuple[int, ...]
    clean_bits: tuple[int, ...] = ()
    mode: str = "default"
    cleanup: str = "lazy"
    signature: tuple = field(default=(), compare=False)
    # (location, bit): the bit ends holding that location's final value
    held: tuple[tuple[int, int], ...] = ()
    # input bits the circuit never changes
    preserved: tuple[int, ...] = ()

    @property
    def stats(self) -> Stats:
        u = uses(self.circ) | set(self.input_bits) | set(self.output_bits)
        bits = 1 + max(u) if u else 0
        tof = sum(isinstance(g, Toffoli) for g in self.circ)
        return Stats(bits, len(self.circ), tof)

    def run(self, inputs: Sequence[int]) -> list[int]:
        from .circuit import simulate_dense

        if len(inputs) != len(self.input_bits):
            raise ValueError(f"expected {len(self.input_bits)} input bits, got {len(inputs)}")
        state = 0
        for b, v in zip(self.input_bits, inputs):
            if v & 1:
                state |= 1 << b
        out = simulate_dense(self.circ, state)
        return [out >> b & 1 for b in self.output_bits]


def _widths(signature) -> list[int | None]:
    from .types import param_width

    return [param_width(p) for p in signature]


def _apply_inputs(ev: Evaluator, t: Term, signature) -> Term:
    v = ev.eval(t)
    for w in _widths(signature):
        if not isinstance(v, T.Lambda):
            raise EvalError("program takes fewer parameters than its signature lists", t.span)
        locs = ev.interp.alloc_inputs(1 if w is None else w)
        arg = T.LocConst(locs[0]) if w is None else T.RegisterVal(tuple(locs))
        v = ev.eval(T.substitute(v.body, v.param, arg))
    return v


def _signature(t: Term, signature):
    if signature is None:
        from .types import infer_signature

        signature = infer_signature(t)
    return tuple(signature)


def input_size(signature) -> int:
    return sum(1 if w is None else w for w in _widths(signature))


def run_program(t: Term, inputs: Sequence[int], signature=None) -> list[int]:
    """Reference interpreter: outputs under the standard interpretation."""
    sig = _signature(t, signature)
    need = input_size(sig)
    if len(inputs) != need:
        raise EvalError(f"program expects {need} input bits, got {len(inputs)}")
    interp = StdInterp(inputs)
    ev = Evaluator(interp)
    with _deep_recursion():
        v = _apply_inputs(ev, t, sig)
        locs = ev.output_locs(v)
    return [interp.value(l) for l in locs]


def eval_bexp_program(t: Term, signature=None, node_cap: int | None = 10**6) -> tuple[list[BExp], int]:
    """Output expressions over input variables, and the number of input bits."""
    sig = _signature(t, signature)
    interp = BExpInterp(node_cap)
    ev = Evaluator(interp)
    with _deep_recursion():
        v = _apply_inputs(ev, t, sig)
        locs = ev.output_locs(v)
    return [interp.heap[l] for l in locs], interp.n_inputs


def esop_size_estimate(b: BExp) -> int:
    """Tree size of ``distribute_ands(b)`` computed without building it."""

    def leaf(n):
        return (1, 1)  # (products, nodes)

    def node(n, l, r):
        (pl, sl), (pr, sr) = l, r
        if isinstance(n, bx.Xor):
            return (pl + pr, sl + sr + 1)
        # every product of l pairs with every product of r
        return (pl * pr, sl * pr + sr * pl + pl * pr)

    return bx._fold(b, leaf, node)[1]


def compile_program(
    t: Term,
    mode: str = "default",
    cleanup: Cleanup | str = Cleanup.LAZY,
    signature=None,
    node_cap: int = 10**6,
    debug: bool = False,
) -> CompiledUnit:
    sig = _signature(t, signature)
    cleanup = Cleanup(cleanup)
    if mode == "default":
        interp = CircInterp(cleanup, debug=debug)
        ev = Evaluator(interp)
        with _deep_recursion():
            v = _apply_inputs(ev, t, sig)
            locs = ev.output_locs(v)
        outs = tuple(interp.bit(l) for l in locs)
        return CompiledUnit(tuple(interp.gates), tuple(interp.inputs), outs,
                            tuple(sorted(interp.heap.pool)), mode, cleanup.value, sig,
                            held=tuple(sorted(interp.subs.items())))
    if mode != "space":
        raise ValueError(f"unknown mode {mode!r}")
    exprs, n_in = eval_bexp_program(t, sig, node_cap)
    heap = AncHeap(frozenset(), n_in)
    gates: list[Gate] = []
    outs: list[int] = []
    for e in exprs:
        e = bx.simplify(e)
        if isinstance(e, bx.Var) and e.index not in outs:
            outs.append(e.index)
            continue
        if esop_size_estimate(e) > node_cap:
            raise SizeLimitExceeded(f"ESOP form exceeds {node_cap} nodes; use default mode")
        e = bx.to_esop(e)
        heap, targ = heap.pop_min()
        res = compile_bexp_clean(heap, targ, e, cleanup)
        heap = res.heap
        gates.extend(res.circ)
        outs.append(targ)
    return CompiledUnit(tuple(gates), tuple(range(n_in)), tuple(outs),
                        tuple(sorted(heap.pool)), mode, cleanup.value, sig,
                        preserved=tuple(range(n_in)))


def observe(interp, locs: Sequence[int], init: Sequence[int]) -> list[int]:
    """Read ``locs`` of any interpretation at input state ``init``."""
    if isinstance(interp, StdInterp):
        return [interp.value(l) for l in locs]
    if isinstance(interp, BExpInterp):
        return [interp.value(l, init) for l in locs]
    if isinstance(interp, CircInterp):
        from .circuit import simulate_dense

        state = sum((v & 1) << b for b, v in zip(interp.inputs, init))
        out = simulate_dense(interp.gates, state)
        return [out >> interp.bit(l) & 1 for l in locs]
    raise TypeError(type(interp).__name__)


Runner = Callable[[Sequence[int]], list[int]]
