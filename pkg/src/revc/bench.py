"""Benchmark corpus: bundled sources, size instantiation and reference oracles."""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Callable, Sequence

from .frontend import parse
from .terms import Term

Bits = Sequence[int]

_SIZE_HEADER = re.compile(r"^let n = \d+ in$", re.MULTILINE)


def to_int(bits: Bits) -> int:
    """Little-endian: bit 0 is the least significant."""
    return sum((b & 1) << i for i, b in enumerate(bits))


def to_bits(x: int, n: int) -> list[int]:
    return [x >> i & 1 for i in range(n)]


def _add_oracle(n: int) -> Callable[[Bits], list[int]]:
    def f(bits: Bits) -> list[int]:
        a, b = to_int(bits[:n]), to_int(bits[n:2 * n])
        return to_bits((a + b) % (1 << n), n)

    return f


def _ma4_oracle(bits: Bits) -> list[int]:
    a, b, c = bits[0:4], bits[4:8], bits[8:12]
    return [int(x + y + z >= 2) for x, y, z in zip(a, b, c)]


def _nor_oracle(bits: Bits) -> list[int]:
    return [int(not (bits[0] or bits[1]))]


@dataclass(frozen=True)
class Benchmark:
    name: str
    file: str
    size: int | None = None
    oracle: Callable[[Bits], list[int]] | None = None

    @property
    def label(self) -> str:
        return self.name if self.size is None else f"{self.name} {self.size}"

    def source(self) -> str:
        text = resources.files(__package__).joinpath("benchmarks").joinpath(self.file).read_text()
        if self.size is None:
            return text
        text, hits = _SIZE_HEADER.subn(f"let n = {self.size} in", text, count=1)
        if not hits:
            raise ValueError(f"{self.file} has no size header")
        return text

    def term(self) -> Term:
        return _parsed(self)


@lru_cache(maxsize=None)
def _parsed(b: Benchmark) -> Term:
    return parse(b.source(), b.file)


def _family(name: str, sizes, oracle_for) -> list[Benchmark]:
    return [Benchmark(name, f"{name}.rvs", n, oracle_for(n)) for n in sizes]


BENCHMARKS: list[Benchmark] = [
    *_family("carryRippleAdder", (2, 4, 8, 32), _add_oracle),
    *_family("cucarroAdder", (2, 4, 8, 32), _add_oracle),
    *_family("modAdd", (2, 4, 32), _add_oracle),
    Benchmark("ma4", "ma4.rvs", None, _ma4_oracle),
    Benchmark("sha2", "sha2.rvs", 2, None),
    Benchmark("nor", "nor.rvs", None, _nor_oracle),
]


def get(label: str) -> Benchmark:
    """Look up ``"modAdd 32"``, ``"modAdd-32"`` or ``"ma4"``."""
    name, _, size = label.replace("-", " ").replace("_", " ").partition(" ")
    matches = [b for b in BENCHMARKS if b.name == name]
    if not matches:
        raise KeyError(f"unknown benchmark {label!r}; known: {', '.join(b.label for b in BENCHMARKS)}")
    if not size.strip():
        if len(matches) > 1:
            raise KeyError(f"{name} needs a size, one of {[b.size for b in matches]}")
        return matches[0]
    n = int(size)
    for b in matches:
        if b.size == n:
            return b
    proto = matches[0]
    if proto.size is None:
        raise KeyError(f"{name} takes no size")
    # the adder families accept any width
    return Benchmark(proto.name, proto.file, n, _add_oracle(n) if proto.oracle else None)


# Stats recorded from this compiler (lazy cleanup). ``None`` means space
# mode stops at the expression size cap. A larger number is a regression.
RECORDED: dict[tuple[str, str], tuple[int, int, int] | None] = {
    ("carryRippleAdder 2", "default"): (7, 6, 1),
    ("carryRippleAdder 4", "default"): (16, 24, 5),
    ("carryRippleAdder 8", "default"): (32, 60, 13),
    ("carryRippleAdder 32", "default"): (128, 276, 61),
    ("cucarroAdder 2", "default"): (5, 8, 2),
    ("cucarroAdder 4", "default"): (9, 20, 6),
    ("cucarroAdder 8", "default"): (17, 44, 14),
    ("cucarroAdder 32", "default"): (65, 188, 62),
    ("modAdd 2", "default"): (5, 8, 2),
    ("modAdd 4", "default"): (9, 20, 6),
    ("modAdd 32", "default"): (65, 188, 62),
    ("ma4", "default"): (17, 24, 8),
    ("sha2 2", "default"): (577, 3592, 1188),
    ("nor", "default"): (3, 4, 1),
    ("carryRippleAdder 2", "space"): (6, 5, 1),
    ("carryRippleAdder 4", "space"): (14, 43, 35),
    ("carryRippleAdder 8", "space"): (30, 2351, 2335),
    ("carryRippleAdder 32", "space"): None,
    ("cucarroAdder 2", "space"): (6, 13, 3),
    ("cucarroAdder 4", "space"): (14, 481, 443),
    ("cucarroAdder 8", "space"): (30, 83689, 83547),
    ("cucarroAdder 32", "space"): None,
    ("modAdd 2", "space"): (6, 13, 3),
    ("modAdd 4", "space"): (14, 481, 443),
    ("modAdd 32", "space"): None,
    ("ma4", "space"): (16, 12, 12),
    ("sha2 2", "space"): None,
    ("nor", "space"): (3, 4, 1),
}
