"""Exception types shared across the library."""


class KsnormError(Exception):
    """Base class for library errors."""


class DomainError(KsnormError):
    """An argument lies outside the documented domain of an operation."""


class EvaluationError(KsnormError):
    """A field returned non-finite values on more than a negligible set."""


class CapabilityError(KsnormError):
    """The requested operation needs a capability the input lacks (e.g. derivatives)."""


class NonConvergenceError(KsnormError):
    """An iterative computation failed to converge within its budget."""
