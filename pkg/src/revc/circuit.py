"""Reversible circuits over NOT, CNOT and Toffoli gates.

A circuit is a plain tuple of gates on natural-number bit indices. States are
sparse (``BState``: missing bits read 0); :func:`simulate_dense` runs the same
semantics on a packed integer and must agree with :func:`eval_circ`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


@dataclass(frozen=True, slots=True)
class Not:
    target: int

    @property
    def controls(self) -> tuple[int, ...]:
        return ()

    def __str__(self) -> str:
        return f"not {self.target}"


@dataclass(frozen=True, slots=True)
class Cnot:
    control: int
    target: int

    @property
    def controls(self) -> tuple[int, ...]:
        return (self.control,)

    def __str__(self) -> str:
        return f"cnot {self.control} {self.target}"


@dataclass(frozen=True, slots=True)
class Toffoli:
    control1: int
    control2: int
    target: int

    @property
    def controls(self) -> tuple[int, ...]:
        return (self.control1, self.control2)

    def __str__(self) -> str:
        return f"tof {self.control1} {self.control2} {self.target}"


Gate = Not | Cnot | Toffoli
Circuit = tuple  # tuple[Gate, ...]


def gate_bits(g: Gate) -> tuple[int, ...]:
    return (*g.controls, g.target)


class BState(dict):
    """Total bit state: a dict of overrides where absent indices are 0."""

    def __missing__(self, key):
        return 0

    def get(self, key, default=0):
        return super().get(key, default)

    def bits(self, indices: Iterable[int]) -> list[int]:
        return [self[i] for i in indices]


def apply_gate(g: Gate, s: Mapping[int, int]) -> BState:
    out = BState(s)
    _apply_in_place(g, out)
    return out


def _apply_in_place(g: Gate, s: BState) -> None:
    if isinstance(g, Not):
        s[g.target] = s[g.target] ^ 1
    elif isinstance(g, Cnot):
        s[g.target] = s[g.target] ^ s[g.control]
    else:
        s[g.target] = s[g.target] ^ (s[g.control1] & s[g.control2])


def eval_circ(circ: Iterable[Gate], s: Mapping[int, int] | None = None) -> BState:
    out = BState(s or {})
    for g in circ:
        _apply_in_place(g, out)
    return out


def simulate_dense(circ: Iterable[Gate], state: int) -> int:
    """Run ``circ`` on a packed state (bit i of the int is bit i of the circuit)."""
    for g in circ:
        if isinstance(g, Not):
            state ^= 1 << g.target
        elif isinstance(g, Cnot):
            if state >> g.control & 1:
                state ^= 1 << g.target
        elif state >> g.control1 & 1 and state >> g.control2 & 1:
            state ^= 1 << g.target
    return state


def simulate_columns(circ: Iterable[Gate], columns: dict[int, int], mask: int) -> dict[int, int]:
    """Bit-sliced simulation: ``columns[i]`` packs bit i across many input states."""
    cols = dict(columns)
    get = cols.get
    for g in circ:
        t = g.target
        if isinstance(g, Not):
            cols[t] = get(t, 0) ^ mask
        elif isinstance(g, Cnot):
            cols[t] = get(t, 0) ^ get(g.control, 0)
        else:
            cols[t] = get(t, 0) ^ (get(g.control1, 0) & get(g.control2, 0))
    return cols


def uses(circ: Iterable[Gate]) -> set[int]:
    return {b for g in circ for b in gate_bits(g)}


def mods(circ: Iterable[Gate]) -> set[int]:
    return {g.target for g in circ}


def controls(circ: Iterable[Gate]) -> set[int]:
    return {c for g in circ for c in g.controls}


def well_formed(circ: Iterable[Gate]) -> bool:
    return all(len(set(gate_bits(g))) == len(gate_bits(g)) for g in circ)


def uncompute(circ: Sequence[Gate], targets: Iterable[int]) -> tuple[Gate, ...]:
    """Restricted inverse: reverse ``circ`` and drop gates whose target is in ``targets``."""
    a = set(targets)
    return tuple(g for g in reversed(circ) if g.target not in a)


def width(circ: Iterable[Gate]) -> int:
    u = uses(circ)
    return 1 + max(u) if u else 0


def toffoli_count(circ: Iterable[Gate]) -> int:
    return sum(1 for g in circ if isinstance(g, Toffoli))


# --- text format -----------------------------------------------------------

HEADER = "# revc circuit v1"


@dataclass(frozen=True)
class CircuitFile:
    gates: tuple[Gate, ...]
    bits: int
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    comments: tuple[str, ...] = field(default=(), compare=False)


class CircuitFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def dumps(cf: CircuitFile) -> str:
    lines = [HEADER]
    lines.extend(f"# {c}" for c in cf.comments)
    lines.append(f"bits: {cf.bits}")
    lines.append("inputs:" + "".join(f" {i}" for i in cf.inputs))
    lines.append("outputs:" + "".join(f" {i}" for i in cf.outputs))
    lines.extend(str(g) for g in cf.gates)
    return "\n".join(lines) + "\n"


_ARITY = {"not": 1, "cnot": 2, "tof": 3}
_CTOR = {"not": Not, "cnot": Cnot, "tof": Toffoli}
_HEADER_RE = re.compile(r"^(bits|inputs|outputs):(.*)$")


def loads(text: str) -> CircuitFile:
    bits: int | None = None
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    gates: list[Gate] = []
    comments: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line != HEADER:
                comments.append(line[1:].strip())
            continue
        m = _HEADER_RE.match(line)
        if m:
            key, rest = m.group(1), m.group(2).split()
            try:
                nums = tuple(int(x) for x in rest)
            except ValueError:
                raise CircuitFormatError(lineno, f"expected integers after '{key}:'") from None
            if key == "bits":
                if len(nums) != 1:
                    raise CircuitFormatError(lineno, "'bits:' takes exactly one integer")
                bits = nums[0]
            elif key == "inputs":
                inputs = nums
            else:
                outputs = nums
            continue
        op, *args = line.split()
        if op not in _ARITY:
            raise CircuitFormatError(lineno, f"unknown gate '{op}'")
        if len(args) != _ARITY[op]:
            raise CircuitFormatError(lineno, f"'{op}' takes {_ARITY[op]} operands")
        try:
            idx = [int(a) for a in args]
        except ValueError:
            raise CircuitFormatError(lineno, "gate operands must be decimal integers") from None
        if any(i < 0 for i in idx):
            raise CircuitFormatError(lineno, "negative bit index")
        if len(set(idx)) != len(idx):
            raise CircuitFormatError(lineno, f"'{op}' refers to the same bit twice")
        gates.append(_CTOR[op](*idx))
    if bits is None:
        bits = max(width(gates), 1 + max((*inputs, *outputs), default=-1))
    for i in (*inputs, *outputs, *uses(gates)):
        if i >= bits:
            raise CircuitFormatError(0, f"bit {i} outside declared width {bits}")
    return CircuitFile(tuple(gates), bits, inputs, outputs, tuple(comments))


# the two-ancilla NOR circuit: bits 0,1 inputs, 2 scratch, 3 result
NOR_EXAMPLE: tuple[Gate, ...] = (
    Toffoli(0, 1, 2),
    Cnot(2, 0),
    Cnot(1, 0),
    Cnot(0, 3),
    Cnot(1, 0),
    Cnot(2, 0),
    Toffoli(0, 1, 2),
    Not(3),
)
