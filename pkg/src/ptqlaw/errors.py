"""Exception hierarchy and warning categories."""

from __future__ import annotations


class PtqLawError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PtqLawError):
    """Invalid input: a precondition or type/range invariant was violated."""


class DomainError(ValidationError):
    """A mathematically undefined evaluation was requested.

    Raised when a masked-in logarithmic factor has an argument <= 1, so the
    corresponding power-law term would have a non-positive base.
    """


class FitError(PtqLawError):
    """The optimizer could not proceed.

    Carries the iteration index at which the failure occurred.
    """

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration


class DegenerateDesignError(FitError):
    """The fit design matrix is rank deficient.

    ``factors`` names the masked-in factor(s) responsible, e.g. a factor that
    is constant across all observations.
    """

    def __init__(self, message: str, factors: tuple = ()):
        super().__init__(message)
        self.factors = tuple(factors)


class UndefinedRSquaredError(PtqLawError):
    """R-squared is undefined because the observed accuracies have zero variance."""


class DatasetError(ValidationError):
    """A dataset file or record failed validation.

    ``row`` is the 1-based physical line number (the header is line 1) and
    ``column`` the offending field name, when known.
    """

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class PredictionRangeWarning(UserWarning):
    """A predicted accuracy fell outside [0, 1].

    The power law is an empirical fit with no built-in ceiling; out-of-range
    predictions are returned as-is and flagged with this warning.
    """


class ExtrapolationWarning(UserWarning):
    """A prediction was requested outside the ranges the law was fitted on."""
