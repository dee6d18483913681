"""Spectra of weighted Schreier graphs of Thompson's group F."""

from .dyadic import DyadicRational
from .errors import DiagnosticError, DomainError, InvariantViolation, PreconditionError, SpectraError

__all__ = [
    "DyadicRational",
    "DiagnosticError",
    "DomainError",
    "InvariantViolation",
    "PreconditionError",
    "SpectraError",
]
