"""Recursive programs, their canonical forms, and intensional equivalence."""

from .syntax import ExtendedProgram, Signature, format_program, parse_program
from .reduction import canonical_form, normalize, size
from .congruence import congruent, globally_equivalent
from .intension import intensionally_equivalent

__all__ = [
    "ExtendedProgram",
    "Signature",
    "canonical_form",
    "congruent",
    "format_program",
    "globally_equivalent",
    "intensionally_equivalent",
    "normalize",
    "parse_program",
    "size",
]
