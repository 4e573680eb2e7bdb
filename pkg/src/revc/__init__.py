"""revc: compile irreversible Boolean programs to reversible Toffoli circuits."""

from .evaluator import CompiledUnit, Stats, compile_program, run_program
from .frontend import parse
from .synth import Cleanup
from .types import infer_signature

__version__ = "0.1.0"

__all__ = [
    "Cleanup",
    "CompiledUnit",
    "Stats",
    "compile_program",
    "infer_signature",
    "parse",
    "run_program",
]
