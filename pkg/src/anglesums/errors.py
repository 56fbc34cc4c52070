"""Exception types shared across the package."""


class AngleSumsError(Exception):
    """Base class for all errors raised by this package."""


class ToleranceNotMet(AngleSumsError):
    """Adaptive quadrature exhausted its panel budget before reaching the tolerance."""


class PhiOverflow(AngleSumsError, OverflowError):
    """``Phi(iz)`` requested for ``|z|`` beyond the direct-evaluation range."""


class DegenerateInput(AngleSumsError, ValueError):
    """Point set or image is not full-dimensional."""


class GeneralPositionViolation(AngleSumsError):
    """A subspace/cone intersection is too close to degenerate to certify."""


class GPViolation(AngleSumsError):
    """Random-walk partial sums fail the general-position surrogate test."""

    def __init__(self, message: str, indices=None, trial=None):
        super().__init__(message)
        self.indices = indices
        self.trial = trial


class InternalInconsistency(AngleSumsError, ArithmeticError):
    """Two equivalent closed forms disagree beyond their error bounds."""
