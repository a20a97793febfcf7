"""Exact and asymptotic walk counts in digraphs and regular languages."""

from .digraph import Digraph, build_digraph, count_walks, from_matrix
from .errors import InputError, NumericalError, RegexSyntaxError
from .regex import AutomatonSystem, compile_regex, parse_regex, structure_function
from .spectral import decompose, dominant_term, structure_closed_form

__version__ = "0.1.0"

__all__ = [
    "AutomatonSystem",
    "Digraph",
    "InputError",
    "NumericalError",
    "RegexSyntaxError",
    "build_digraph",
    "compile_regex",
    "count_walks",
    "decompose",
    "dominant_term",
    "from_matrix",
    "parse_regex",
    "structure_closed_form",
    "structure_function",
]
