# bounds/domain.py
import math
from dataclasses import dataclass

from django.db import models

from .exceptions import InvalidSpecError


class Method(models.TextChoices):
    HOEFFDING = 'hoeffding', 'Hoeffding'
    BENNETT = 'bennett', 'Bennett'
    BERNSTEIN = 'bernstein', 'Bernstein'
    REFINED = 'refined', 'Refined'


class BoundSide(models.TextChoices):
    CEILING = 'ceiling', 'Ceiling'
    FLOOR = 'floor', 'Floor'

    @property
    def opposite(self):
        return BoundSide.FLOOR if self is BoundSide.CEILING else BoundSide.CEILING


class Tail(models.TextChoices):
    UPPER = 'upper', 'Upper'
    LOWER = 'lower', 'Lower'


def _require_finite(name, value):
    if not math.isfinite(value):
        raise InvalidSpecError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class VariableSpec:
    """Known summary of one random variable: mean, deviation and a one-sided range bound."""

    mu: float
    sigma: float
    bound_value: float
    bound_side: BoundSide

    def __post_init__(self):
        _require_finite('mu', self.mu)
        _require_finite('sigma', self.sigma)
        _require_finite('bound_value', self.bound_value)
        if self.sigma < 0:
            raise InvalidSpecError(f"sigma must be non-negative, got {self.sigma!r}")
        side = BoundSide(self.bound_side)
        object.__setattr__(self, 'bound_side', side)
        if side is BoundSide.CEILING and self.bound_value < self.mu:
            raise InvalidSpecError(f"ceiling {self.bound_value!r} lies below the mean {self.mu!r}")
        if side is BoundSide.FLOOR and self.bound_value > self.mu:
            raise InvalidSpecError(f"floor {self.bound_value!r} lies above the mean {self.mu!r}")

    @property
    def variance(self):
        return self.sigma * self.sigma

    @property
    def spread(self):
        """Distance from the mean to the bounded side (s_i)."""
        if self.bound_side is BoundSide.CEILING:
            return self.bound_value - self.mu
        return self.mu - self.bound_value


@dataclass(frozen=True)
class RangeSpec:
    lo: float
    hi: float

    def __post_init__(self):
        _require_finite('lo', self.lo)
        _require_finite('hi', self.hi)
        if self.lo > self.hi:
            raise InvalidSpecError(f"range lower end {self.lo!r} exceeds upper end {self.hi!r}")

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class BoundResult:
    """
    A computed tail bound.

    ``raw_log_probability`` keeps the unclamped log bound so callers can
    compare methods in log space; ``log_probability`` and ``probability``
    are clamped to a valid probability. ``degenerate`` flags results where
    the deviation is impossible and the formula itself is indeterminate.
    """

    method: Method
    log_probability: float
    probability: float
    raw_log_probability: float
    lambda_: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        object.__setattr__(self, 'method', Method(self.method))

    @classmethod
    def from_log(cls, method, raw_log, lambda_=None):
        clamped = min(0.0, raw_log)
        return cls(
            method=Method(method),
            log_probability=clamped,
            probability=min(1.0, math.exp(clamped)),
            raw_log_probability=raw_log,
            lambda_=lambda_,
        )

    @classmethod
    def trivial(cls, method):
        """The bound for t = 0: every deviation of at least zero may happen."""
        return cls.from_log(method, 0.0, lambda_=None if method == Method.HOEFFDING else 0.0)

    @classmethod
    def impossible(cls, method):
        return cls(
            method=Method(method),
            log_probability=-math.inf,
            probability=0.0,
            raw_log_probability=-math.inf,
            lambda_=None,
            degenerate=True,
        )


@dataclass(frozen=True)
class PointFailure:
    """A grid point that could not be evaluated; sweeps keep going past it."""

    index: int
    value: float
    message: str
