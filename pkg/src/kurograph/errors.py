"""Exception hierarchy shared by all kurograph modules."""


class KurographError(Exception):
    """Base class for every error raised by kurograph."""


class DomainError(KurographError, ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(KurographError, ValueError):
    """The inputs violate a documented precondition."""


class UnsupportedOperation(KurographError):
    """The operation is not available for this kind of object."""


class ModelAssumptionError(PreconditionError):
    """A frequency density violates the even/unimodal/analytic assumptions."""


class DegenerateKernelError(KurographError):
    """All computed eigenvalues sit below the numerical floor."""


class NumericalError(KurographError):
    """A numerical procedure failed (divergence, non-convergence, non-finite state).

    Extra diagnostic values are kept in ``details`` so callers can report them.
    """

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class ConfigError(KurographError):
    """Configuration parsing failed. ``errors`` holds every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
