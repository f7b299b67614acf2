"""Exception hierarchy for the simulation lab."""


class DmlSimError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(DmlSimError):
    """Covariance matrix is not positive definite (invalid correlation parameter)."""


class RankDeficient(DmlSimError):
    """Design matrix has collinear columns; OLS coefficients are not identified."""


class TooFewObservations(DmlSimError):
    """More parameters than observations; OLS cannot be computed."""


class ZeroVariance(DmlSimError):
    """Standard error underflowed (perfect fit)."""


class LengthMismatch(DmlSimError):
    """Paired vectors have different lengths."""


class ConstantColumn(DmlSimError):
    """A column has zero standard deviation and cannot be standardized."""


class DegenerateResponse(DmlSimError):
    """Response vector has zero variance; penalty level is undefined."""


class DegenerateResiduals(DmlSimError):
    """First-stage treatment residuals have zero variance."""


class EmptyInput(DmlSimError):
    """Operation requires a non-empty vector."""


class TooFew(DmlSimError):
    """Not enough values for the requested statistic."""


class MissingSeries(DmlSimError):
    """Requested per-replication series was not recorded in the report."""


class ParseError(DmlSimError):
    """Malformed configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(DmlSimError):
    """Configuration violates a scenario invariant."""
