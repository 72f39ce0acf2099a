"""Exception and warning types shared across the package."""

from __future__ import annotations


class PbExtremalError(Exception):
    """Base class for errors raised by pbextremal."""


class DomainError(PbExtremalError, ValueError):
    """Input outside the documented domain of an operation."""


class Infeasible(PbExtremalError):
    """No parameter vector satisfies the prescribed constraints.

    ``provably_empty`` is True when a necessary feasibility condition on
    the targets fails, so the constraint set is certainly empty; it is
    False when the structured search simply found no admissible solution
    ("no structure admissible").
    """

    def __init__(self, reason, provably_empty=False, diagnostics=None):
        super().__init__(reason)
        self.reason = reason
        self.provably_empty = provably_empty
        self.diagnostics = dict(diagnostics or {})


class NumericalQualityWarning(UserWarning):
    """A result needed repair (clamping/renormalisation) beyond routine rounding."""
