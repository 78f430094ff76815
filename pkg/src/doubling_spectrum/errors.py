"""Exception hierarchy shared by all modules.

Every domain failure derives from :class:`DomainError`; the CLI maps those
to exit code 1 and argument problems to exit code 2.
"""


class DomainError(Exception):
    """Base class for failures that stem from the mathematics, not usage."""


class InsufficientPrecision(DomainError):
    pass


class SizeLimit(DomainError):
    pass


class Undefined(DomainError):
    pass


class NonRationalInput(DomainError):
    pass


class HypothesisViolated(DomainError):
    pass


class QuadratureFailure(DomainError):
    pass


class EmptySystem(DomainError):
    pass


class PowerIterationStall(DomainError):
    pass


class GridTooNarrow(DomainError):
    pass


class WindowViolation(DomainError):
    pass


class PreconditionViolated(DomainError):
    pass


class ParseError(ValueError):
    """Raised for malformed user input (usage error, not a domain error)."""
