"""Exception and warning types raised by genairy."""

from __future__ import annotations


class GenAiryError(Exception):
    """Base class for all errors raised by this package."""


class PotentialSpecError(GenAiryError, ValueError):
    """A potential specification string or parameter is invalid."""


class BracketError(GenAiryError, ValueError):
    """A root-finding bracket does not enclose a sign change."""


class BelowThresholdError(GenAiryError, ValueError):
    """The spectral parameter is too small for the turning-point analysis."""


class OverflowGuardError(GenAiryError, ValueError):
    """The dense kernel discretization would overflow double precision."""


class ConvergenceError(GenAiryError, RuntimeError):
    """An iterative method stopped before reaching its tolerance."""


class ResolutionError(GenAiryError, RuntimeError):
    """A discretization failed its self-consistency check under refinement."""


class IntegrationWarning(UserWarning):
    """Adaptive quadrature hit its depth limit; the best estimate is returned."""
