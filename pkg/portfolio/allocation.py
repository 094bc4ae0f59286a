"""
Budget allocation that minimizes the refined bound on under-performance.

Each investment's factor in the bound on Pr(total payoff <= tau) is
minimized on its own, which gives one multiplier ``lambda_i`` per asset; the
budget share of asset i is ``lambda_i / sum(lambda)``.
"""
import logging
import math

from bounds.domain import PointFailure
from bounds.exceptions import BoundsError, DegenerateAllocationError, DomainError
from bounds.lambertw import DEFAULT_W_CONFIG
from bounds.refined import lambda_star_single, mgf_majorant_log

from .domain import AllocationResult

logger = logging.getLogger(__name__)


def _require_investments(investments):
    investments = list(investments)
    if not investments:
        raise DomainError('at least one investment is required')
    return investments


def tau_interval(investments):
    """Open interval (max floor, min mean) of admissible targets."""
    investments = _require_investments(investments)
    return max(inv.floor for inv in investments), min(inv.mu for inv in investments)


def tau_grid(investments, points):
    """``points`` targets evenly spaced inside the admissible interval, endpoints excluded."""
    if points < 1:
        raise DomainError(f"a sweep needs at least one point, got {points!r}")
    lo, hi = tau_interval(investments)
    if not lo < hi:
        raise DomainError('the admissible target interval is empty', interval=(lo, hi))
    step = (hi - lo) / points
    return [lo + (k + 0.5) * step for k in range(points)]


def tau_from_deviation(investments, t):
    """Target lying ``t`` below the smallest mean."""
    lo, hi = tau_interval(investments)
    if not 0 < t < hi - lo:
        raise DomainError(f"deviation t={t!r} is out of range", interval=(0.0, hi - lo))
    return hi - t


def allocation_lambda(inv, tau, w_cfg=DEFAULT_W_CONFIG):
    if not inv.floor < tau < inv.mu:
        raise DomainError(f"{inv.name}: target tau={tau!r} is out of range", interval=(inv.floor, inv.mu))
    return lambda_star_single(inv.spread, inv.sigma * inv.sigma, inv.mu - tau, w_cfg)


def allocate(investments, tau, w_cfg=DEFAULT_W_CONFIG):
    investments = _require_investments(investments)
    lo, hi = tau_interval(investments)
    if not lo < tau < hi:
        raise DomainError(f"target tau={tau!r} is out of range", interval=(lo, hi))

    lambdas = [allocation_lambda(inv, tau, w_cfg) for inv in investments]
    total = math.fsum(lambdas)
    if not total > 0:
        raise DegenerateAllocationError(f"every multiplier is zero at tau={tau!r}")

    log_phi = math.fsum(
        mgf_majorant_log(inv.spread, inv.sigma * inv.sigma, lam) - lam * (inv.mu - tau)
        for inv, lam in zip(investments, lambdas)
    )
    return AllocationResult(
        tau=tau,
        weights=tuple(lam / total for lam in lambdas),
        lambdas=tuple(lambdas),
        phi_bound=math.exp(min(0.0, log_phi)),
        log_phi=log_phi,
    )


def allocate_point(investments, index, tau, w_cfg=DEFAULT_W_CONFIG):
    """``allocate`` for one sweep point, turning a failure into a ``PointFailure``."""
    try:
        return allocate(investments, tau, w_cfg)
    except BoundsError as exc:
        logger.warning(f"Sweep point {index} (tau={tau!r}) failed: {exc}")
        return PointFailure(index=index, value=tau, message=str(exc))


def allocation_sweep(investments, tau_grid, w_cfg=DEFAULT_W_CONFIG):
    investments = _require_investments(investments)
    return [allocate_point(investments, index, tau, w_cfg) for index, tau in enumerate(tau_grid)]
