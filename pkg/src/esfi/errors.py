"""Exception types shared across the package."""


class EsfiError(Exception):
    """Base class for all package-specific errors."""


class DomainError(EsfiError, ValueError):
    """An input violates a documented precondition or invariant."""


class IntegrationError(EsfiError, RuntimeError):
    """The ODE solver could not complete the requested interval.

    ``last_good_time`` is the last time the solution was still valid.
    """

    def __init__(self, message, last_good_time=None):
        super().__init__(message)
        self.last_good_time = last_good_time


class NotYetStableError(EsfiError, RuntimeError):
    """A stable cumulative value was requested before the forwarding
    compartments decayed; carries the residual active fraction."""

    def __init__(self, residual_fraction):
        super().__init__(
            "forwarding compartments still active at the end of the "
            f"trajectory (residual fraction {residual_fraction:.3e} of peak)"
        )
        self.residual_fraction = residual_fraction


class AnalysisError(EsfiError, RuntimeError):
    """An analysis run (fit, sensitivity sweep) failed to produce a result."""


class ParseError(EsfiError, ValueError):
    """A dataset file could not be parsed; names the offending location."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column
