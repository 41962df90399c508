"""Semantic exception hierarchy shared across the package."""

__all__ = [
    "HypoparamError",
    "DomainError",
    "BracketError",
    "EvaluationError",
    "InternalConsistencyError",
]


class HypoparamError(Exception):
    """Base class for all package-specific errors."""


class DomainError(HypoparamError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class BracketError(HypoparamError, ValueError):
    """A root bracket does not enclose a sign change."""


class EvaluationError(HypoparamError, ArithmeticError):
    """A user-supplied callable produced a non-finite or non-numeric value."""


class InternalConsistencyError(HypoparamError, ArithmeticError):
    """Two redundant computation routes disagreed beyond tolerance."""
