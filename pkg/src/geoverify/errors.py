"""Exception hierarchy shared by all geoverify modules."""


class GeoVerifyError(Exception):
    """Base class for every error raised by the package."""


class ExprError(GeoVerifyError):
    """Malformed expression text (syntax, unknown symbols, bad exponents)."""


class DomainError(GeoVerifyError):
    """An expression was evaluated outside the domain of one of its functions."""


class UnboundParameterError(GeoVerifyError):
    pass


class DegenerateMetricError(GeoVerifyError):
    pass


class SpecError(GeoVerifyError):
    """A metric spec (or its JSON form) violates the schema or its invariants."""


class PreconditionError(GeoVerifyError):
    """A constructor or operation was called with data violating its preconditions."""


class ModelMismatchError(GeoVerifyError):
    """A sampled series cannot be described by the requested blow-up model."""
