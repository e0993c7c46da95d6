"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument is outside the mathematical domain of the operation."""


class ExtrapolationError(DomainError):
    """A query time falls outside the range of a tabulated drift."""


class NumericsError(RuntimeError):
    """A numerical routine failed to reach its target tolerance.

    Carries the best available estimate and the tolerance actually achieved,
    so callers can decide whether a partial result is usable.
    """

    def __init__(self, message, estimate=None, achieved_tol=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_tol = achieved_tol


class UnsupportedSchemeError(ValueError):
    """The operation requires a path generated by a different scheme."""


class InsufficientDataError(ValueError):
    """Too few usable data points for a fit."""


class ConfigError(ValueError):
    """A configuration document is malformed; message names the key path."""
