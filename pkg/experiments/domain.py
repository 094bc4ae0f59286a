# experiments/domain.py
from dataclasses import dataclass, field

from django.db import models

from bounds.domain import Method
from bounds.exceptions import InvalidSpecError


class ExperimentKind(models.TextChoices):
    HOMOGENEOUS = 'homogeneous', 'Homogeneous sweep'
    HETEROGENEOUS = 'heterogeneous', 'Heterogeneous random instances'
    VALIDATE = 'validate', 'Monte Carlo validation'


@dataclass(frozen=True)
class ExperimentRecord:
    """
    One synthetic instance and the log-bounds every method gives for it.

    ``variables`` and ``ranges`` keep the drawn instance for in-process
    consumers (the Monte Carlo oracle); they are not part of the emitted
    record and do not take part in comparisons.
    """

    instance_id: int
    n: int
    z: float
    t: float
    log_bounds: dict
    seed: int
    variables: tuple = field(default=(), compare=False, repr=False)
    ranges: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        log_bounds = {Method(method): value for method, value in self.log_bounds.items()}
        missing = set(Method) - set(log_bounds)
        if missing:
            raise InvalidSpecError(f"record {self.instance_id} lacks bounds for {sorted(missing)}")
        if any(value > 0 for value in log_bounds.values()):
            raise InvalidSpecError(f"record {self.instance_id} holds an unclamped log-bound")
        if self.n < 1 or not self.z > 0 or not self.t > 0:
            raise InvalidSpecError(f"record {self.instance_id} has invalid n, z or t")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidSpecError(f"seed {self.seed!r} is not a 64-bit unsigned integer")
        object.__setattr__(self, 'log_bounds', log_bounds)


@dataclass(frozen=True)
class TwoPointDistribution:
    """
    Law with mass ``p_hi`` at ``mu + up`` and mass ``p_lo`` at ``mu - down``.

    Atoms are held as spreads about ``mu`` and ``p_lo`` is not derived as
    ``1 - p_hi``; either mass may round to 1 when the other is below machine
    epsilon.
    """

    mu: float
    up: float
    down: float
    p_hi: float
    p_lo: float

    def __post_init__(self):
        if not self.up > 0 or not self.down > 0 or not 0 < self.p_hi <= 1 or not 0 < self.p_lo <= 1:
            raise InvalidSpecError(f"invalid two-point law {self!r}")
        if abs(self.p_hi + self.p_lo - 1.0) > 1e-12:
            raise InvalidSpecError(f"masses of {self!r} do not sum to 1")

    @property
    def hi(self):
        return self.mu + self.up

    @property
    def lo(self):
        return self.mu - self.down

    @property
    def mean(self):
        return self.mu + (self.p_hi * self.up - self.p_lo * self.down)

    @property
    def variance(self):
        return self.p_hi * self.up ** 2 + self.p_lo * self.down ** 2


@dataclass(frozen=True)
class ValidationOutcome:
    instance_id: int
    n: int
    z: float
    t: float
    method: Method
    bound: float
    estimate: float
    std_error: float
    applicable: bool = True

    @property
    def violated(self):
        return self.applicable and self.estimate > self.bound + 3.0 * self.std_error


@dataclass(frozen=True)
class ValidationReport:
    outcomes: tuple

    @property
    def checked(self):
        return sum(1 for outcome in self.outcomes if outcome.applicable)

    @property
    def violations(self):
        return [outcome for outcome in self.outcomes if outcome.violated]

    @property
    def instances(self):
        return len({outcome.instance_id for outcome in self.outcomes})

    def summary(self):
        count = len(self.violations)
        return f"{count} violation{'' if count == 1 else 's'}"
