"""A lambda calculus with ordered typestate and borrowing.

Resources are indexed by elements of an ordered partial monoid, typing
contexts are bunched trees with a DAG semantics, typechecking is
bidirectional and deterministic, and evaluation tracks per-resource
operation traces against each resource's declared envelope.
"""

from . import opm, regex  # registers the built-in OPM instances
from .checker import CheckedProgram, Checker, TypeCheckError, check_program
from .interp import Config, RunResult, run, runtime_oracle, step
from .opm import get_opm, known_opms
from .surface import ParseError, parse

__all__ = [
    "CheckedProgram",
    "Checker",
    "Config",
    "ParseError",
    "RunResult",
    "TypeCheckError",
    "check_program",
    "get_opm",
    "known_opms",
    "parse",
    "run",
    "runtime_oracle",
    "step",
]
