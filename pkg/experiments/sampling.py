"""
Seeding and the Monte Carlo validity oracle.

Every random draw comes from a Philox generator whose key is derived from
the run seed and the instance id, so an instance can be regenerated on its
own and trials can run in any order or on any worker.
"""
import logging
import math

import numpy as np

from bounds.classical import require_side
from bounds.domain import BoundSide
from bounds.exceptions import DomainError, InvalidSpecError

from .domain import TwoPointDistribution

logger = logging.getLogger(__name__)

# Independent streams hanging off one run seed.
STREAM_INSTANCE = 0
STREAM_DESIGN = 1
STREAM_MONTE_CARLO = 2

MIN_MONTE_CARLO_TRIALS = 1000
# rows x variables drawn at once
_CHUNK_CELLS = 1 << 20


def derive_trial_seed(seed, instance_id, stream=STREAM_INSTANCE):
    """64-bit seed for one instance, derived from the run seed."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, instance_id))
    return int(sequence.generate_state(1, np.uint64)[0])


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


def stream_rng(seed, instance_id, stream):
    return make_rng(derive_trial_seed(seed, instance_id, stream))


def make_two_point(mu, sigma, ceiling):
    """The two-atom law with the given mean, deviation and ceiling, one atom sitting on the ceiling."""
    if not sigma > 0:
        raise InvalidSpecError(f"sigma must be positive, got {sigma!r}")
    if not ceiling > mu:
        raise InvalidSpecError(f"ceiling {ceiling!r} must lie above the mean {mu!r}")
    s = ceiling - mu
    variance = sigma * sigma
    total = variance + s * s
    return TwoPointDistribution(mu=mu, up=s, down=variance / s, p_hi=variance / total, p_lo=s * s / total)


def monte_carlo_tail(variables, t, trials, seed, instance_id=0):
    """
    Estimate Pr(mean(X) - mean(mu) >= t) with every X_i drawn from its two-point law.

    Returns ``(estimate, std_error)`` with the binomial standard error.
    """
    variables = require_side(variables, BoundSide.CEILING)
    if trials < MIN_MONTE_CARLO_TRIALS:
        raise DomainError(f"at least {MIN_MONTE_CARLO_TRIALS} trials are required, got {trials!r}")

    laws = [make_two_point(v.mu, v.sigma, v.bound_value) for v in variables]
    up = np.array([law.up for law in laws])
    down = np.array([-law.down for law in laws])
    p_hi = np.array([law.p_hi for law in laws])

    rng = stream_rng(seed, instance_id, STREAM_MONTE_CARLO)
    n = len(variables)
    chunk = max(1, _CHUNK_CELLS // n)
    hits = 0
    remaining = trials
    while remaining:
        rows = min(chunk, remaining)
        deviations = np.where(rng.random((rows, n)) < p_hi, up, down).mean(axis=1)
        hits += int(np.count_nonzero(deviations >= t))
        remaining -= rows

    estimate = hits / trials
    std_error = math.sqrt(estimate * (1.0 - estimate) / trials)
    logger.debug(f"Instance {instance_id}: {hits}/{trials} tail hits at t={t!r}")
    return estimate, std_error
