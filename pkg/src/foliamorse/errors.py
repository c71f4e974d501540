"""Exception taxonomy shared across the package."""


class FoliationError(Exception):
    """Base class for all package errors."""


class InputError(FoliationError, ValueError):
    """Malformed input: dimension mismatch, bad parameters, unparseable config."""


class ModelError(FoliationError, ValueError):
    """A model violates its construction invariants (non-real Morse data, etc.)."""


class SingularPointError(FoliationError):
    """Tangent data requested at the singular point (or numerically at it)."""


class DegenerateDistributionError(FoliationError):
    """Tangent generators span less than the leaf dimension at this point."""

    def __init__(self, message, rank=None):
        super().__init__(message)
        self.rank = rank


class NearCriticalError(FoliationError):
    """All first-integral partials are below threshold; no chart pivot exists."""


class PreconditionError(FoliationError):
    """An operation was called off its domain (e.g. point not on the polar set)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateContactError(FoliationError):
    """A count that requires nondegenerate contacts met a degenerate one."""

    def __init__(self, message, points=None):
        super().__init__(message)
        self.points = points or []
