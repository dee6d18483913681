"""Exception hierarchy shared by all modules."""


class SpectraError(Exception):
    """Base class for library errors."""


class DomainError(SpectraError, ValueError):
    """An argument lies outside the domain of an operation."""


class PreconditionError(SpectraError, ValueError):
    """An operation was asked for a result its inputs cannot guarantee."""


class InvariantViolation(SpectraError, RuntimeError):
    """A proven structural property failed numerically (signals a bug)."""


class DiagnosticError(SpectraError, RuntimeError):
    """Two independent numerical routes disagree beyond tolerance."""
