# portfolio/domain.py
import math
from dataclasses import dataclass

from bounds.domain import BoundSide, VariableSpec
from bounds.exceptions import InvalidSpecError


@dataclass(frozen=True)
class Investment:
    """An asset with expected payoff, payoff deviation and minimum payoff, all in currency units."""

    name: str
    mu: float
    sigma: float
    floor: float

    def __post_init__(self):
        if not self.name:
            raise InvalidSpecError('investment name must not be empty')
        for field in ('mu', 'sigma', 'floor'):
            if not math.isfinite(getattr(self, field)):
                raise InvalidSpecError(f"{self.name}: {field} must be finite")
        if not self.sigma > 0:
            raise InvalidSpecError(f"{self.name}: sigma must be positive, got {self.sigma!r}")
        if self.floor > self.mu:
            raise InvalidSpecError(f"{self.name}: floor {self.floor!r} lies above the mean {self.mu!r}")

    @property
    def spread(self):
        return self.mu - self.floor

    def as_variable(self):
        return VariableSpec(self.mu, self.sigma, self.floor, BoundSide.FLOOR)


@dataclass(frozen=True)
class AllocationResult:
    tau: float
    weights: tuple
    lambdas: tuple
    phi_bound: float
    log_phi: float

    def __post_init__(self):
        if len(self.weights) != len(self.lambdas):
            raise InvalidSpecError('weights and lambdas must have the same length')
