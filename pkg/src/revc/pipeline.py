"""Source-to-result entry points shared by the command line and the HTTP service."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import bench
from .circuit import CircuitFile, dumps, simulate_dense
from .evaluator import AssertionFailed, CleanFailed, CompiledUnit, EvalError, compile_program, run_program
from .frontend import FrontendError, parse
from .types import Signature, TypeError_, infer_signature, param_width
from .verify import BddLimitExceeded, Report, check_program, validate_translation

# Problems with the user's program or inputs; the CLI maps these to exit 1.
UserError = (FrontendError, TypeError_, EvalError, ValueError, KeyError, BddLimitExceeded)
# Runtime check failures; exit 2.
CheckFailure = (AssertionFailed, CleanFailed)


@dataclass
class Program:
    source: str
    filename: str
    term: object
    signature: Signature

    @property
    def widths(self) -> list[int]:
        return [1 if w is None else w for w in map(param_width, self.signature.params)]

    @property
    def input_bits(self) -> int:
        return sum(self.widths)


def load_source(source: str, filename: str = "<input>") -> Program:
    t = parse(source, filename)
    try:
        sig = infer_signature(t, warn=False)
    except TypeError_ as e:
        raise TypeError_(f"{filename}:{e}" if e.span else f"{filename}: {e.message}") from None
    return Program(source, filename, t, sig)


_SIZED = re.compile(r"^([A-Za-z]+?)[-_ ]?(\d+)$")


def resolve(path_or_name: str) -> tuple[str, str]:
    """Source text and display name for a file path or a bundled benchmark.

    Benchmarks are named like ``modAdd-32``, ``modAdd32`` or ``ma4``.
    """
    p = Path(path_or_name)
    if p.exists():
        return p.read_text(), str(p)
    name = p.name[:-4] if p.name.endswith(".rvs") else p.name
    try:
        b = bench.get(name)
    except KeyError:
        m = _SIZED.match(name)
        if not m:
            raise FileNotFoundError(f"no such file or bundled benchmark: {path_or_name}") from None
        try:
            b = bench.get(f"{m.group(1)} {m.group(2)}")
        except KeyError:
            raise FileNotFoundError(f"no such file or bundled benchmark: {path_or_name}") from None
    return b.source(), b.file


def load(path_or_name: str) -> Program:
    text, name = resolve(path_or_name)
    return load_source(text, name)


def parse_bits(text: str, width: int | None = None) -> list[int]:
    """``"0110"`` is read first bit first; ``"0x1f"`` is a little-endian integer of ``width`` bits."""
    s = text.strip().replace("_", "")
    if s.lower().startswith("0x"):
        if width is None:
            raise ValueError("a hex input needs a known width; give one value per parameter")
        v = int(s, 16)
        if v >> width:
            raise ValueError(f"{text} does not fit in {width} bits")
        return [v >> i & 1 for i in range(width)]
    if not s or set(s) - {"0", "1"}:
        raise ValueError(f"not a bit string: {text!r}")
    return [int(c) for c in s]


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(b & 1) for b in bits)


def program_inputs(prog: Program, values: Sequence[str]) -> list[int]:
    """One value per parameter, or a single string covering every input bit."""
    if len(values) == len(prog.widths) and len(values) > 1:
        bits = []
        for v, w in zip(values, prog.widths):
            got = parse_bits(v, w)
            if len(got) != w:
                raise ValueError(f"parameter of width {w} given {len(got)} bits")
            bits += got
        return bits
    bits = []
    for v in values:
        bits += parse_bits(v, prog.input_bits if len(values) == 1 else None)
    if len(bits) != prog.input_bits:
        raise ValueError(f"program expects {prog.input_bits} input bits, got {len(bits)}")
    return bits


def run(prog: Program, bits: Sequence[int]) -> list[int]:
    try:
        return run_program(prog.term, bits, prog.signature)
    except EvalError as e:
        e.filename = e.filename or prog.filename
        raise


def compile_(prog: Program, mode: str = "default", cleanup: str = "lazy") -> CompiledUnit:
    return compile_program(prog.term, mode=mode, cleanup=cleanup, signature=prog.signature)


def circuit_file(unit: CompiledUnit, comments: Sequence[str] = ()) -> CircuitFile:
    return CircuitFile(unit.circ, max(unit.stats.bits, 1), unit.input_bits, unit.output_bits, tuple(comments))


def circuit_text(unit: CompiledUnit, name: str = "") -> str:
    s = unit.stats
    notes = [f"{name} mode={unit.mode} cleanup={unit.cleanup}".strip(),
             f"stats {json.dumps(s.as_dict())}"]
    return dumps(circuit_file(unit, notes))


def simulate(cf: CircuitFile, bits: Sequence[int]) -> list[int]:
    if len(bits) != len(cf.inputs):
        raise ValueError(f"circuit declares {len(cf.inputs)} inputs, got {len(bits)} bits")
    state = sum((v & 1) << b for b, v in zip(cf.inputs, bits))
    out = simulate_dense(cf.gates, state)
    return [out >> b & 1 for b in cf.outputs]


def check(prog: Program, circuit: CircuitFile | CompiledUnit | None = None) -> Report:
    report = check_program(prog.term, prog.signature)
    if circuit is not None:
        _, tv = validate_translation(prog.term, circuit, prog.signature)
        report.checks += tv.checks
        report.notes += tv.notes
    return report
