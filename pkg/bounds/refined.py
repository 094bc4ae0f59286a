"""
Refined Bennett-type bound built on the Lambert W function.

The Chernoff argument bounds each centered variable's moment generating
function by ``(sigma^2/s^2)(e^{lambda s} - 1 - lambda s) + 1``. The product of
those majorants times ``e^{-lambda n t}`` is a valid bound for every
``lambda >= 0``; this module picks ``lambda`` in closed form. For a single
variable the minimizer is exact and involves ``W(exp(.))``. For several
variables the per-variable minimizers (each taking its share
``t_i = t s_i / s_bar`` of the deviation) are averaged with curvature weights
``s_i^2 / (1 - exp(-s_i^2 / sigma_i^2))``.
"""
import logging
import math
from dataclasses import dataclass

from scipy.optimize import minimize_scalar

from .classical import reflect, require_side
from .domain import BoundResult, BoundSide, Method
from .exceptions import DegenerateInputError, DegenerateVarianceError, DomainError, IterationFailure
from .lambertw import DEFAULT_W_CONFIG, lambert_w_exp

logger = logging.getLogger(__name__)

# e^{lambda s} is evaluated directly up to this exponent
_OVERFLOW_EXPONENT = 700.0
_SERIES_CUTOFF = 1e-2
_POLISH_XATOL = 1e-10
# closed-form gaps below this share of the log terms are left to Newton
_CANCELLATION = 1e-4


def _expm1mx(u):
    """e^u - 1 - u."""
    if abs(u) < _SERIES_CUTOFF:
        return math.fsum(u ** k / math.factorial(k) for k in range(2, 10))
    return math.expm1(u) - u


def mgf_majorant_log(s_i, sigma2_i, lambda_):
    """ln[(sigma^2 / s^2)(e^{lambda s} - 1 - lambda s) + 1]."""
    if not lambda_ >= 0:
        raise DomainError(f"lambda must be non-negative, got {lambda_!r}")
    q = sigma2_i / (s_i * s_i)
    u = lambda_ * s_i
    if u > _OVERFLOW_EXPONENT:
        return math.log(q) + u + math.log1p((1.0 / q - 1.0 - u) * math.exp(-u))
    excess = _expm1mx(u)
    if excess == 0:
        return 0.0
    log_scaled = math.log(q) + math.log(excess)
    if log_scaled > _OVERFLOW_EXPONENT:
        # q (e^u - 1 - u) alone would overflow
        return log_scaled + math.log1p(math.exp(-log_scaled))
    return math.log1p(q * excess)


@dataclass(frozen=True)
class RefinedContext:
    s_list: tuple
    sigma2_list: tuple
    t: float
    s_bar: float

    def __post_init__(self):
        if not self.s_list or len(self.s_list) != len(self.sigma2_list):
            raise DomainError('s_list and sigma2_list must be non-empty and of equal length')
        if any(not s > 0 for s in self.s_list):
            raise DomainError('every s_i must be positive')
        if any(not v > 0 for v in self.sigma2_list):
            raise DomainError('every sigma_i^2 must be positive')
        mean = math.fsum(self.s_list) / len(self.s_list)
        if abs(mean - self.s_bar) > 1e-12 * mean:
            raise DomainError(f"s_bar {self.s_bar!r} is not the mean of s_list ({mean!r})")
        if not 0 < self.t < self.s_bar:
            raise DomainError(f"deviation t={self.t!r} is out of range", interval=(0.0, self.s_bar))

    @classmethod
    def build(cls, s_list, sigma2_list, t):
        s_list = tuple(float(s) for s in s_list)
        return cls(
            s_list=s_list,
            sigma2_list=tuple(float(v) for v in sigma2_list),
            t=float(t),
            s_bar=math.fsum(s_list) / len(s_list) if s_list else 0.0,
        )

    @property
    def n(self):
        return len(self.s_list)


def b_lambda_log(ctx, lambda_):
    """Log of the bound obtained at a fixed ``lambda``; valid for every lambda >= 0."""
    majorants = (mgf_majorant_log(s, v, lambda_) for s, v in zip(ctx.s_list, ctx.sigma2_list))
    return -lambda_ * ctx.n * ctx.t + math.fsum(majorants)


def lambda_star_single(s_i, sigma2_i, t_i, w_cfg=DEFAULT_W_CONFIG):
    """
    Exact minimizer of ``mgf_majorant_log(s, sigma^2, lambda) - lambda t``.

    The closed form is ``1/t + s/sigma^2 - 1/s - W(exp(a))/s`` with
    ``a = s/t + s^2/sigma^2 - 1 + ln((s - t)/t)``. Since ``W + ln W = a``
    this collapses to ``(ln W(exp(a)) - ln((s - t)/t)) / s``, which avoids
    subtracting large nearly equal terms. When even those two logs nearly agree
    (sigma^2 far above s^2, so lambda is tiny) the stationarity equation is
    solved by Newton's method instead.
    """
    if not 0 < t_i < s_i:
        raise DomainError(f"t_i={t_i!r} must lie strictly between 0 and s_i", interval=(0.0, s_i))
    if not sigma2_i > 0:
        raise DomainError(f"sigma_i^2 must be positive, got {sigma2_i!r}")

    log_odds = math.log((s_i - t_i) / t_i)
    exponent = s_i / t_i - 1.0 + s_i * s_i / sigma2_i + log_odds
    w = lambert_w_exp(exponent, w_cfg)
    gap = math.log(w) - log_odds
    if gap <= _CANCELLATION * max(1.0, abs(log_odds)):
        return _stationary_newton(s_i, sigma2_i, t_i, w_cfg)
    return gap / s_i


def _stationary_newton(s_i, sigma2_i, t_i, w_cfg):
    """Root of the log-majorant's slope minus t_i, from the right of the root at t_i / sigma^2."""
    q = sigma2_i / (s_i * s_i)
    lambda_ = t_i / sigma2_i
    for _ in range(w_cfg.max_iterations):
        u = lambda_ * s_i
        excess = q * s_i * math.expm1(u) - t_i * (q * _expm1mx(u) + 1.0)
        step = excess / (q * s_i * (s_i * math.exp(u) - t_i * math.expm1(u)))
        lambda_ -= step
        if abs(step) <= w_cfg.relative_tolerance * lambda_:
            return lambda_
    raise IterationFailure('stationarity solve did not converge', last_iterate=lambda_, residual=excess)


def curvature_cap(s_i, sigma2_i):
    """Supremum over lambda of the second derivative of the log-majorant, s^2 / (1 - e^{-s^2/sigma^2})."""
    return s_i * s_i / -math.expm1(-s_i * s_i / sigma2_i)


def lambda_star_combined(ctx, w_cfg=DEFAULT_W_CONFIG):
    shares = [ctx.t * (s / ctx.s_bar) for s in ctx.s_list]
    lambdas = [
        lambda_star_single(s, v, t_i, w_cfg)
        for s, v, t_i in zip(ctx.s_list, ctx.sigma2_list, shares)
    ]
    if len(set(lambdas)) == 1:
        return lambdas[0]
    weights = [curvature_cap(s, v) for s, v in zip(ctx.s_list, ctx.sigma2_list)]
    return math.fsum(w * lam for w, lam in zip(weights, lambdas)) / math.fsum(weights)


def _polish(ctx, lambda_, log_bound):
    upper = 10.0 * lambda_ if lambda_ > 0 else 10.0 / ctx.s_bar
    result = minimize_scalar(
        lambda x: b_lambda_log(ctx, x),
        bounds=(0.0, upper),
        method='bounded',
        options={'xatol': _POLISH_XATOL},
    )
    if result.fun < log_bound:
        logger.debug(f"Polish improved the log bound from {log_bound!r} to {result.fun!r}")
        return float(result.x), float(result.fun)
    return lambda_, log_bound


def refined_upper(variables, t, polish=False, w_cfg=DEFAULT_W_CONFIG):
    variables = require_side(variables, BoundSide.CEILING)
    s_list = [spec.spread for spec in variables]
    s_bar = math.fsum(s_list) / len(s_list)
    if not 0 < t < s_bar:
        raise DomainError(f"deviation t={t!r} is out of range for the refined bound", interval=(0.0, s_bar))
    for index, spec in enumerate(variables):
        if spec.sigma == 0:
            raise DegenerateVarianceError(index)
        if spec.spread == 0:
            raise DegenerateInputError(f"Variable {index} has its ceiling at its mean but sigma={spec.sigma!r}")

    ctx = RefinedContext.build(s_list, [spec.variance for spec in variables], t)
    lambda_ = lambda_star_combined(ctx, w_cfg)
    log_bound = b_lambda_log(ctx, lambda_)
    if polish:
        lambda_, log_bound = _polish(ctx, lambda_, log_bound)
    return BoundResult.from_log(Method.REFINED, log_bound, lambda_=lambda_)


def refined_lower(variables, t, polish=False, w_cfg=DEFAULT_W_CONFIG):
    variables = require_side(variables, BoundSide.FLOOR)
    return refined_upper(reflect(variables), t, polish=polish, w_cfg=w_cfg)


def refined_homogeneous(mu, sigma, ceiling, n, t, w_cfg=DEFAULT_W_CONFIG):
    """Refined bound for n identically specified variables, evaluated without a context."""
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n!r}")
    s = ceiling - mu
    if not sigma > 0:
        raise DegenerateVarianceError(0)
    lambda_ = lambda_star_single(s, sigma * sigma, t, w_cfg)
    log_bound = n * (mgf_majorant_log(s, sigma * sigma, lambda_) - lambda_ * t)
    return BoundResult.from_log(Method.REFINED, log_bound, lambda_=lambda_)
