"""Exception hierarchy shared across the toolkit.

Each class carries a stable numeric code so the CLI can map failures to
distinct exit statuses and machine-readable error objects.
"""


class EffpredError(Exception):
    """Base class for all toolkit errors."""

    code = 1

    def __init__(self, message, **context):
        super().__init__(message)
        self.context = context

    def as_dict(self):
        return {"code": self.code, "message": str(self), "context": self.context}


class FormatError(EffpredError):
    """A record does not conform to the container layout being written."""

    code = 3


class ValidationError(EffpredError):
    """An input value violates a documented invariant."""

    code = 4


class CorruptionError(EffpredError):
    """A file is structurally damaged (e.g. truncated mid-record)."""

    code = 5


class UnsupportedFormatError(EffpredError):
    """Magic bytes or version do not match what this reader supports."""

    code = 6


class CapacityError(EffpredError):
    """A requested sample is larger than the pool it draws from."""

    code = 7


class DegenerateInputError(EffpredError):
    """An input for which the requested statistic is undefined (zero vector,
    flat task, ...)."""

    code = 8


class ConsistencyError(EffpredError):
    """Cross-file references do not line up (e.g. a sampled id with no
    stored gradient)."""

    code = 9


class SingularFitError(EffpredError):
    """Regression design matrix is singular (all predictor values equal)."""

    code = 10


class DomainError(EffpredError):
    """A numeric argument is outside the function's domain."""

    code = 11


class NumericError(EffpredError):
    """A computation produced a non-finite result."""

    code = 12
