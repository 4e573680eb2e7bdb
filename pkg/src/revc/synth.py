"""Compile Boolean expressions onto target bits with a shared ancilla heap."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from . import bexp as bx
from .bexp import BExp
from .circuit import Cnot, Gate, Not, Toffoli, uncompute


class Cleanup(str, Enum):
    EAGER = "eager"
    LAZY = "lazy"


class ContractError(ValueError):
    """A synthesis precondition (disjoint target, variables and pool) was violated."""


@dataclass(frozen=True)
class AncHeap:
    pool: frozenset[int] = frozenset()
    fresh: int = 0

    def __post_init__(self):
        if any(i >= self.fresh or i < 0 for i in self.pool):
            raise ContractError(f"pooled indices must lie below fresh={self.fresh}: {sorted(self.pool)}")

    def pop_min(self) -> tuple["AncHeap", int]:
        if self.pool:
            i = min(self.pool)
            return AncHeap(self.pool - {i}, self.fresh), i
        return AncHeap(self.pool, self.fresh + 1), self.fresh

    def insert(self, i: int) -> "AncHeap":
        if i in self.pool:
            raise ContractError(f"bit {i} is already in the pool")
        if i >= self.fresh or i < 0:
            raise ContractError(f"bit {i} was never allocated from this heap (fresh={self.fresh})")
        return AncHeap(self.pool | {i}, self.fresh)

    def insert_all(self, items: Iterable[int]) -> "AncHeap":
        ah = self
        for i in items:
            ah = ah.insert(i)
        return ah

    def __contains__(self, i: int) -> bool:
        return i in self.pool


def pop_min(ah: AncHeap) -> tuple[AncHeap, int]:
    return ah.pop_min()


@dataclass(frozen=True)
class SynthResult:
    heap: AncHeap
    result: int
    ancillas: tuple[int, ...]
    circ: tuple[Gate, ...]

    @property
    def toffolis(self) -> int:
        return sum(isinstance(g, Toffoli) for g in self.circ)


def _check_disjoint(ah: AncHeap, targ: int | None, b: BExp) -> None:
    vs = bx.variables(b)
    clash = vs & ah.pool
    if clash:
        raise ContractError(f"expression variables {sorted(clash)} are in the ancilla pool")
    if targ is not None:
        if targ in vs:
            raise ContractError(f"target bit {targ} occurs in the expression")
        if targ in ah.pool:
            raise ContractError(f"target bit {targ} is in the ancilla pool")


def _and_gate(r1: int, r2: int, targ: int) -> Gate:
    # x & x = x; a Toffoli with a repeated control would not be well formed
    return Cnot(r1, targ) if r1 == r2 else Toffoli(r1, r2, targ)


def _compile(ah: AncHeap, targ: int, b: BExp, out: list[Gate]) -> tuple[AncHeap, list[int]]:
    if isinstance(b, bx.Var):
        out.append(Cnot(b.index, targ))
        return ah, []
    if isinstance(b, bx.Xor):
        ah, anc1 = _compile(ah, targ, b.left, out)
        ah, anc2 = _compile(ah, targ, b.right, out)
        return ah, anc1 + anc2
    if isinstance(b, bx.And):
        ah, r1, anc1 = _oop(ah, b.left, out)
        ah, r2, anc2 = _oop(ah, b.right, out)
        out.append(_and_gate(r1, r2, targ))
        return ah, anc1 + anc2
    if b == bx.TRUE:
        out.append(Not(targ))
    return ah, []


def _oop(ah: AncHeap, b: BExp, out: list[Gate]) -> tuple[AncHeap, int, list[int]]:
    if isinstance(b, bx.Var):
        return ah, b.index, []
    ah, a = ah.pop_min()
    ah, anc = _compile(ah, a, b, out)
    return ah, a, [a, *anc]


def compile_bexp(ah: AncHeap, targ: int, b: BExp) -> SynthResult:
    """Circuit computing ``targ ^= b`` on states whose pooled bits are zero.

    Ancillas holding conjunct values are left dirty and reported in ``ancillas``.
    """
    _check_disjoint(ah, targ, b)
    out: list[Gate] = []
    ah2, anc = _compile(ah, targ, b, out)
    return SynthResult(ah2, targ, tuple(anc), tuple(out))


def compile_bexp_oop(ah: AncHeap, b: BExp) -> SynthResult:
    """Compute ``b`` into a bit of its own; a bare variable needs no circuit."""
    _check_disjoint(ah, None, b)
    if isinstance(b, bx.Var):
        return SynthResult(ah, b.index, (), ())
    ah, a = ah.pop_min()
    out: list[Gate] = []
    ah2, anc = _compile(ah, a, b, out)
    return SynthResult(ah2, a, tuple(anc), tuple(out))


def _compile_eager(ah: AncHeap, targ: int, b: BExp, out: list[Gate]) -> AncHeap:
    if isinstance(b, bx.Xor):
        ah = _compile_eager(ah, targ, b.left, out)
        return _compile_eager(ah, targ, b.right, out)
    if isinstance(b, bx.And):
        mark = len(out)
        ah, r1, a1 = _oop_eager(ah, b.left, out)
        ah, r2, a2 = _oop_eager(ah, b.right, out)
        sub = out[mark:]
        out.append(_and_gate(r1, r2, targ))
        out.extend(uncompute(sub, {targ}))
        return ah.insert_all(a1 + a2)
    ah, _ = _compile(ah, targ, b, out)
    return ah


def _oop_eager(ah: AncHeap, b: BExp, out: list[Gate]) -> tuple[AncHeap, int, list[int]]:
    if isinstance(b, bx.Var):
        return ah, b.index, []
    ah, a = ah.pop_min()
    return _compile_eager(ah, a, b, out), a, [a]


def compile_bexp_clean(ah: AncHeap, targ: int, b: BExp, strategy: Cleanup | str = Cleanup.LAZY) -> SynthResult:
    """Compute ``targ ^= b`` and return every ancilla to the pool, zeroed.

    Lazy cleanup uncomputes once per XOR-summand of ``b``; eager cleanup
    uncomputes the conjunct circuits right after each Toffoli.
    """
    strategy = Cleanup(strategy)
    _check_disjoint(ah, targ, b)
    out: list[Gate] = []
    if strategy is Cleanup.EAGER:
        ah = _compile_eager(ah, targ, b, out)
        return SynthResult(ah, targ, (), tuple(out))
    for term in bx.products(b):
        mark = len(out)
        ah, anc = _compile(ah, targ, term, out)
        if anc:
            out.extend(uncompute(out[mark:], {targ}))
            ah = ah.insert_all(anc)
    return SynthResult(ah, targ, (), tuple(out))


def compile_bexp_clean_oop(ah: AncHeap, b: BExp, strategy: Cleanup | str = Cleanup.LAZY) -> SynthResult:
    ah, a = ah.pop_min()
    return compile_bexp_clean(ah, a, b, strategy)


def ancilla_count(b: BExp, strategy: Cleanup | str = Cleanup.LAZY) -> int:
    """Distinct ancillas touched when compiling ``b`` cleanly onto a fresh target."""
    vs = bx.variables(b)
    base = 1 + max(vs, default=-1)
    targ = base
    res = compile_bexp_clean(AncHeap(frozenset(), base + 1), targ, b, strategy)
    return res.heap.fresh - (base + 1)
