"""
Probability that a fixed portfolio under-performs a total payoff threshold.

The total falls to the threshold exactly when the average payoff falls
``t = (sum(mu) - threshold) / n`` below its mean, so every method is a
lower-tail bound on the average.
"""
import logging
import math

from bounds.classical import hoeffding_upper, lower_tail
from bounds.domain import BoundSide, Method, RangeSpec
from bounds.exceptions import DomainError
from bounds.lambertw import DEFAULT_W_CONFIG

logger = logging.getLogger(__name__)


def imputed_ranges(variables):
    """
    Complete one-sided specs into two-sided ranges for Hoeffding.

    The missing end is set to its most optimistic value: two deviations away
    from the known bound, but never on the wrong side of the mean.
    """
    ranges = []
    for spec in variables:
        if spec.bound_side is BoundSide.FLOOR:
            ranges.append(RangeSpec(spec.bound_value, max(spec.bound_value + 2.0 * spec.sigma, spec.mu)))
        else:
            ranges.append(RangeSpec(min(spec.bound_value - 2.0 * spec.sigma, spec.mu), spec.bound_value))
    return ranges


def threshold_interval(investments):
    """Open interval of total thresholds the refined bound accepts."""
    return (
        math.fsum(inv.floor for inv in investments),
        math.fsum(inv.mu for inv in investments),
    )


def underperformance_bound(investments, total_threshold, method, polish=False, w_cfg=DEFAULT_W_CONFIG):
    investments = list(investments)
    if not investments:
        raise DomainError('at least one investment is required')
    method = Method(method)
    interval = threshold_interval(investments)
    n = len(investments)
    t = (interval[1] - total_threshold) / n
    if not t > 0:
        raise DomainError(
            f"total threshold {total_threshold!r} is not below the expected total payoff",
            interval=interval,
        )

    logger.debug(f"Assessing {n} investments against {total_threshold!r}: t={t!r}, method={method.label}")
    variables = [inv.as_variable() for inv in investments]
    try:
        if method == Method.HOEFFDING:
            return hoeffding_upper(imputed_ranges(variables), t)
        return lower_tail(method, variables, t, polish=polish, w_cfg=w_cfg)
    except DomainError as exc:
        raise DomainError(
            f"total threshold {total_threshold!r} is out of range for {method.label}",
            interval=interval,
        ) from exc
