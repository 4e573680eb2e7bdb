"""Reduced ordered BDDs, assertion/clean checking and translation validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import bexp as bx
from .bexp import BExp
from .circuit import Cnot, Gate, Not, Toffoli, uses
from .evaluator import EvalError, Evaluator, _apply_inputs, _deep_recursion, _signature, _widths
from .terms import LocConst, RegisterVal, SourceSpan, Term

FALSE, TRUE = 0, 1
_TERMINAL_LEVEL = math.inf
# cut variables sit below all inputs, grouped by bit position
_CUT_BASE = 1 << 40
_CUT_SPAN = 1 << 24


class BddLimitExceeded(RuntimeError):
    pass


class BddManager:
    """Hash-consed ROBDD store without complement edges.

    ``order`` lists variable indices from the root level downwards; variables
    not listed are placed after it in ascending index order.
    """

    def __init__(self, order: Sequence[int] = (), node_limit: int = 10**7):
        self.node_limit = node_limit
        self._level: dict[int, int] = {v: i for i, v in enumerate(order)}
        if len(self._level) != len(order):
            raise ValueError("variable order lists a variable twice")
        self._n_listed = len(order)
        self._var_at: dict[int, int] = {i: v for v, i in self._level.items()}
        # node store; ids 0 and 1 are the terminals
        self.level = [_TERMINAL_LEVEL, _TERMINAL_LEVEL]
        self.lo = [0, 1]
        self.hi = [0, 1]
        self._unique: dict[tuple[int, int, int], int] = {}
        self._cache: dict[tuple[str, int, int], int] = {}

    def __len__(self) -> int:
        return len(self.level)

    def level_of(self, var: int) -> int:
        lv = self._level.get(var)
        if lv is None:
            if var < 0:
                raise ValueError(f"negative variable index {var}")
            # unlisted variables go below every listed one, ascending by index
            lv = self._n_listed + var
            self._level[var] = lv
            self._var_at[lv] = var
        return lv

    def var_at(self, level: int) -> int:
        return self._var_at[level]

    def mk(self, level: int, lo: int, hi: int) -> int:
        if lo == hi:
            return lo
        key = (level, lo, hi)
        n = self._unique.get(key)
        if n is None:
            n = len(self.level)
            if n >= self.node_limit:
                raise BddLimitExceeded(f"BDD exceeds {self.node_limit} nodes")
            self.level.append(level)
            self.lo.append(lo)
            self.hi.append(hi)
            self._unique[key] = n
        return n

    def var(self, index: int) -> int:
        return self.mk(self.level_of(index), FALSE, TRUE)

    def cut_var(self, position: int) -> int:
        """A fresh variable with a negative index, placed with others at ``position``."""
        self._n_cuts = getattr(self, "_n_cuts", 0) + 1
        if self._n_cuts >= _CUT_SPAN:
            raise BddLimitExceeded("too many cut variables")
        index = -self._n_cuts
        lv = _CUT_BASE + position * _CUT_SPAN + self._n_cuts
        self._level[index] = lv
        self._var_at[lv] = index
        return self.mk(lv, FALSE, TRUE)

    def const(self, value: int | bool) -> int:
        return TRUE if value else FALSE

    def apply(self, op: str, a: int, b: int) -> int:
        if op == "xor":
            return self.xor(a, b)
        if op == "and":
            return self.and_(a, b)
        raise ValueError(f"unknown BDD operation {op!r}")

    def xor(self, a: int, b: int) -> int:
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if a == b:
            return FALSE
        if a > b:
            a, b = b, a
        if a == TRUE and b == TRUE:
            return FALSE
        key = ("xor", a, b)
        r = self._cache.get(key)
        if r is None:
            r = self._split(self.xor, a, b)
            self._cache[key] = r
        return r

    def and_(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a > b:
            a, b = b, a
        key = ("and", a, b)
        r = self._cache.get(key)
        if r is None:
            r = self._split(self.and_, a, b)
            self._cache[key] = r
        return r

    def _split(self, fn, a: int, b: int) -> int:
        la, lb = self.level[a], self.level[b]
        top = min(la, lb)
        a0, a1 = (self.lo[a], self.hi[a]) if la == top else (a, a)
        b0, b1 = (self.lo[b], self.hi[b]) if lb == top else (b, b)
        return self.mk(top, fn(a0, b0), fn(a1, b1))

    def neg(self, a: int) -> int:
        return self.xor(a, TRUE)

    def evaluate(self, node: int, assignment) -> int:
        """Value of ``node`` when variable ``v`` takes ``assignment(v)`` (or ``[v]``)."""
        get = assignment if callable(assignment) else assignment.__getitem__
        while node > TRUE:
            node = self.hi[node] if get(self.var_at(self.level[node])) else self.lo[node]
        return node

    def satisfying(self, node: int, value: int = 1) -> dict[int, int] | None:
        """The lexicographically smallest path to terminal ``value``.

        Variables off the path are omitted; callers treat them as 0.
        """
        want = TRUE if value else FALSE
        if node <= TRUE:
            return {} if node == want else None
        other = FALSE if want == TRUE else TRUE
        path: dict[int, int] = {}
        while node > TRUE:
            # in a reduced diagram every internal node reaches both terminals
            v = self.var_at(self.level[node])
            if self.lo[node] != other:
                path[v] = 0
                node = self.lo[node]
            else:
                path[v] = 1
                node = self.hi[node]
        return path

    def support(self, node: int) -> set[int]:
        seen, out, stack = set(), set(), [node]
        while stack:
            n = stack.pop()
            if n <= TRUE or n in seen:
                continue
            seen.add(n)
            out.add(self.var_at(self.level[n]))
            stack += (self.lo[n], self.hi[n])
        return out

    def count_nodes(self, roots: Iterable[int]) -> int:
        seen, stack = set(), list(roots)
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if n > TRUE:
                stack += (self.lo[n], self.hi[n])
        return len(seen)

    def check_invariants(self) -> None:
        for n in range(2, len(self.level)):
            assert self.lo[n] != self.hi[n], f"node {n} is redundant"
            assert self.level[n] < self.level[self.lo[n]], f"node {n} breaks the order"
            assert self.level[n] < self.level[self.hi[n]], f"node {n} breaks the order"


def bdd_of_bexp(m: BddManager, b: BExp, env=None) -> int:
    """BDD of ``b``; ``env`` maps a variable index to the BDD it stands for."""
    look = (lambda i: m.var(i)) if env is None else (env if callable(env) else env.__getitem__)

    def leaf(n):
        if isinstance(n, bx.Var):
            return look(n.index)
        return TRUE if n.value else FALSE

    def node(n, l, r):
        return m.xor(l, r) if isinstance(n, bx.Xor) else m.and_(l, r)

    return bx._fold(b, leaf, node)


# --- program checking ------------------------------------------------------


@dataclass(frozen=True)
class Check:
    kind: str  # "assert" or "clean"
    span: SourceSpan | None
    passed: bool
    counterexample: tuple[int, ...] | None = None
    # failed only after call arguments were abstracted; may be spurious
    inconclusive: bool = False

    def format(self, filename: str = "<input>") -> str:
        where = f"{filename}:{self.span}" if self.span else filename
        line = f"{'PASS' if self.passed else 'FAIL'} {self.kind} {where}"
        if self.inconclusive:
            line += " (inconclusive under modular checking)"
        if self.counterexample is not None:
            bits = " ".join(f"x{i}={v}" for i, v in enumerate(self.counterexample))
            line += f" counterexample: {bits}" if bits else " counterexample: (no inputs)"
        return line


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    modular: bool = False

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self, filename: str = "<input>") -> list[str]:
        return [c.format(filename) for c in self.checks] + [f"FAIL {n}" for n in self.notes]


class BddInterp:
    """Heap of BDDs over the program inputs; checks are recorded, never raised."""

    def __init__(self, manager: BddManager, modular: bool = False):
        self.m = manager
        self.heap: dict[int, int] = {}
        self.next_loc = 0
        self.n_inputs = 0
        self.report = Report()
        self.modular = modular
        if modular:
            self.before_call = self._cut_arguments

    def _cut_arguments(self, v: Term) -> None:
        # Forget what an argument holds: checks in the callee then cover
        # every possible argument value, so a pass stays a pass.
        if isinstance(v, LocConst):
            locs = (v.loc,)
        elif isinstance(v, RegisterVal):
            locs = v.locs
        else:
            return
        seen = set()
        for pos, l in enumerate(locs):
            if l not in seen and l in self.heap:
                seen.add(l)
                self.heap[l] = self.m.cut_var(pos)

    def fresh_loc(self) -> int:
        l = self.next_loc
        self.next_loc += 1
        return l

    def _read(self, loc: int) -> int:
        v = self.heap.get(loc)
        if v is None:
            raise EvalError(f"location {loc} is unbound (never assigned, or used after clean)")
        return v

    def alloc_inputs(self, count: int) -> list[int]:
        locs = []
        for _ in range(count):
            l = self.fresh_loc()
            self.heap[l] = self.m.var(self.n_inputs)
            self.n_inputs += 1
            locs.append(l)
        return locs

    def bdd(self, b: BExp) -> int:
        return bdd_of_bexp(self.m, b, self._read)

    def assign(self, loc: int, b: BExp) -> None:
        self.heap[loc] = self.bdd(b)

    def _record(self, kind: str, node: int, want: int, span) -> None:
        if node == want:
            self.report.checks.append(Check(kind, span, True))
            return
        path = self.m.satisfying(node, 1 - want)
        cex = tuple(path.get(i, 0) for i in range(self.n_inputs))
        cut = self.modular and any(v < 0 for v in self.m.support(node))
        self.report.checks.append(Check(kind, span, False, cex, inconclusive=cut))

    def clean(self, loc: int, span=None) -> None:
        self._record("clean", self._read(loc), FALSE, span)
        del self.heap[loc]

    def check_clean(self, b: BExp, span=None) -> None:
        self._record("clean", self.bdd(b), FALSE, span)

    def check_assert(self, b: BExp, span=None) -> None:
        self._record("assert", self.bdd(b), TRUE, span)

    def value(self, loc: int) -> int:
        return self._read(loc)


def interleaved_order(widths: Sequence[int | None]) -> list[int]:
    """Input variables ordered bit position first, then parameter.

    Adders over two registers stay linear in size under this order, where
    the plain ascending order is exponential.
    """
    offsets, off = [], 0
    for w in widths:
        offsets.append(off)
        off += 1 if w is None else w
    keyed = []
    for p, (o, w) in enumerate(zip(offsets, widths)):
        for i in range(1 if w is None else w):
            keyed.append(((i, p), o + i))
    return [v for _, v in sorted(keyed)]


def _program_bdds(t: Term, signature, manager: BddManager | None, node_limit: int,
                  modular: bool = False):
    sig = _signature(t, signature)
    m = manager or BddManager(interleaved_order(_widths(sig)), node_limit)
    interp = BddInterp(m, modular)
    ev = Evaluator(interp)
    with _deep_recursion():
        v = _apply_inputs(ev, t, sig)
        locs = ev.output_locs(v)
    return interp, [interp.heap[l] for l in locs]


def check_program(t: Term, signature=None, manager: BddManager | None = None,
                  node_limit: int = 10**7, modular: bool | None = None,
                  exact_budget: int = 10**6) -> Report:
    """Every assert must be constantly 1 and every cleaned value constantly 0.

    With ``modular=None`` the exact check runs first, within ``exact_budget``
    nodes; if that is exhausted the program is rechecked with call arguments
    abstracted to fresh variables.
    """
    if modular is None:
        try:
            interp, _ = _program_bdds(t, signature, manager, min(node_limit, exact_budget))
            return interp.report
        except BddLimitExceeded:
            modular = True
            manager = None
    interp, _ = _program_bdds(t, signature, manager, node_limit, modular)
    if modular:
        interp.report.modular = True
    return interp.report


# --- translation validation --------------------------------------------------


def simulate_symbolic(m: BddManager, circ: Iterable[Gate], init: dict[int, int]) -> dict[int, int]:
    """Run ``circ`` on BDD-valued bits; bits missing from ``init`` start at 0."""
    bits = dict(init)
    get = lambda i: bits.get(i, FALSE)  # noqa: E731
    for g in circ:
        if isinstance(g, Not):
            bits[g.target] = m.neg(get(g.target))
        elif isinstance(g, Cnot):
            bits[g.target] = m.xor(get(g.target), get(g.control))
        elif isinstance(g, Toffoli):
            bits[g.target] = m.xor(get(g.target), m.and_(get(g.control1), get(g.control2)))
        else:
            raise TypeError(f"not a gate: {g!r}")
    return bits


def validate_circuit(m: BddManager, expected: Sequence[int], circ: Sequence[Gate],
                     input_bits: Sequence[int], output_bits: Sequence[int],
                     clean_bits: Sequence[int] = (), held: dict[int, int] | None = None) -> Report:
    """Compare circuit outputs with ``expected`` BDDs; ``clean_bits`` must end at 0.

    ``held`` maps further bits to the BDD they must end with.
    """
    report = Report()
    if len(expected) != len(output_bits):
        report.notes.append(f"output width: program {len(expected)}, circuit {len(output_bits)}")
        return report
    n_in = len(input_bits)
    bits = simulate_symbolic(m, circ, {b: m.var(j) for j, b in enumerate(input_bits)})

    def cex(diff: int) -> tuple[int, ...]:
        path = m.satisfying(diff, 1)
        return tuple(path.get(i, 0) for i in range(n_in))

    for k, (want, b) in enumerate(zip(expected, output_bits)):
        got = bits.get(b, FALSE)
        if got != want:
            report.checks.append(Check(f"output {k} (bit {b})", None, False, cex(m.xor(got, want))))
    for b in clean_bits:
        got = bits.get(b, FALSE)
        if got != FALSE:
            report.checks.append(Check(f"ancilla bit {b}", None, False, cex(got)))
    for b, want in (held or {}).items():
        got = bits.get(b, FALSE)
        if got != want:
            report.checks.append(Check(f"bit {b}", None, False, cex(m.xor(got, want))))
    if not report.checks:
        report.checks.append(Check("translation", None, True))
    return report


def validate_translation(t: Term, unit, signature=None, node_limit: int = 10**7,
                         clean_bits: Sequence[int] | None = None) -> tuple[bool, Report]:
    """Symbolically simulate ``unit`` and compare with the program's output BDDs.

    ``unit`` is a CompiledUnit or a CircuitFile; the program side runs under
    the BDD interpretation, so both sides share one canonical manager.
    ``clean_bits`` adds bits that must end at 0 (a circuit file does not say).
    """
    interp, expected = _program_bdds(t, signature or getattr(unit, "signature", None) or None, None, node_limit)
    clean = tuple(getattr(unit, "clean_bits", ())) + tuple(clean_bits or ())
    inputs = unit.input_bits if hasattr(unit, "input_bits") else unit.inputs
    outputs = unit.output_bits if hasattr(unit, "output_bits") else unit.outputs
    circ = unit.circ if hasattr(unit, "circ") else unit.gates
    if len(inputs) != interp.n_inputs:
        r = Report(notes=[f"input width: program {interp.n_inputs}, circuit {len(inputs)}"])
        return False, r
    m = interp.m
    held = {b: m.var(j) for j, b in enumerate(inputs) if b in set(getattr(unit, "preserved", ()))}
    notes = []
    for loc, b in getattr(unit, "held", ()):
        if loc in interp.heap:
            held[b] = interp.heap[loc]
        else:
            # both sides run the same evaluator, so location numbers agree
            notes.append(f"circuit maps location {loc}, which the program does not hold")
    report = validate_circuit(m, expected, circ, inputs, outputs, clean, held)
    report.notes += notes
    return report.ok, report


# --- mutation testing ----------------------------------------------------------


def mutants(circ: Sequence[Gate], rng, count: int, width: int | None = None) -> list[tuple[Gate, ...]]:
    """``count`` single-gate mutants: a gate is deleted or one operand is moved."""
    if not circ:
        return []
    width = width or (1 + max(uses(circ)))
    out = []
    while len(out) < count:
        k = rng.randrange(len(circ))
        g = circ[k]
        if rng.random() < 0.5:
            out.append(tuple(circ[:k]) + tuple(circ[k + 1:]))
            continue
        ops = [g.target] if isinstance(g, Not) else (
            [g.control, g.target] if isinstance(g, Cnot) else [g.control1, g.control2, g.target])
        j = rng.randrange(len(ops))
        choices = [b for b in range(width) if b not in ops]
        if not choices:
            continue
        ops[j] = rng.choice(choices)
        ng = type(g)(*ops)
        out.append(tuple(circ[:k]) + (ng,) + tuple(circ[k + 1:]))
    return out
