# bounds/exceptions.py


class BoundsError(Exception):
    """Base class for every failure raised by the bounds toolkit."""


class DomainError(BoundsError, ValueError):
    """An argument lies outside the operation's domain."""

    def __init__(self, message, interval=None):
        self.interval = interval
        if interval is not None:
            lo, hi = interval
            message = f"{message} (admissible interval: ({lo!r}, {hi!r}))"
        super().__init__(message)


class InvalidSpecError(DomainError):
    """A record violates its own invariants."""


class LambertWDomainError(DomainError):
    pass


class DegenerateInputError(BoundsError):
    """The bound formula is indeterminate for these inputs."""


class DegenerateVarianceError(DegenerateInputError):
    def __init__(self, index):
        self.index = index
        super().__init__(
            f"Variable {index} has zero standard deviation; the refined bound "
            f"diverges as sigma -> 0. Clamp sigma to 1e-9 * s_i before calling."
        )


class DegenerateAllocationError(DegenerateInputError):
    pass


class IterationFailure(BoundsError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, last_iterate, residual):
        self.last_iterate = last_iterate
        self.residual = residual
        super().__init__(f"{message} (last iterate {last_iterate!r}, residual {residual!r})")


class ExperimentError(BoundsError):
    pass
