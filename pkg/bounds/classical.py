"""
Classical concentration bounds for the average of independent variables.

Hoeffding works from two-sided ranges. Bennett and Bernstein work from
ceiling-sided ``VariableSpec``s (mean, deviation, ceiling) and allow the
means and ceilings to differ between variables. Lower-tail bounds are never
written out separately: ``lower_tail`` reflects floor-sided specs into
ceiling-sided ones and reuses the upper-tail code.
"""
import logging
import math

from .domain import BoundResult, BoundSide, Method, VariableSpec
from .exceptions import DegenerateInputError, DomainError
from .lambertw import DEFAULT_W_CONFIG

logger = logging.getLogger(__name__)

_SERIES_CUTOFF = 1e-2


def bennett_h(x):
    """h(x) = (1 + x) ln(1 + x) - x for x >= 0."""
    if x < _SERIES_CUTOFF:
        # sum_{k>=2} (-1)^k x^k / (k (k - 1)); the closed form cancels here
        return math.fsum((-1) ** k * x ** k / (k * (k - 1)) for k in range(2, 11))
    return (1.0 + x) * math.log1p(x) - x


def bernstein_g(x):
    """g(x) = 3x^2 / (2x + 6), a lower bound on h for x >= 0."""
    return 3.0 * x * x / (2.0 * x + 6.0)


def _check_deviation(t):
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"deviation t must be finite and non-negative, got {t!r}")
    return float(t)


def require_side(variables, side):
    """Materialize ``variables`` and check every spec is bounded on ``side``."""
    variables = list(variables)
    if not variables:
        raise DomainError('at least one variable is required')
    for index, spec in enumerate(variables):
        if spec.bound_side is not side:
            raise DomainError(
                f"variable {index} is {spec.bound_side.label.lower()}-sided, "
                f"this bound needs {side.label.lower()}s"
            )
    return variables


def hoeffding_upper(ranges, t):
    ranges = list(ranges)
    if not ranges:
        raise DomainError('at least one range is required')
    t = _check_deviation(t)
    if t == 0:
        return BoundResult.trivial(Method.HOEFFDING)

    width_sq = math.fsum(r.width ** 2 for r in ranges)
    if width_sq == 0:
        logger.warning(f"All {len(ranges)} ranges are degenerate; a deviation of {t!r} cannot occur")
        return BoundResult.impossible(Method.HOEFFDING)

    n = len(ranges)
    return BoundResult.from_log(Method.HOEFFDING, -2.0 * n * n * t * t / width_sq)


def _bennett_family(variables, t, shape, method):
    variables = require_side(variables, BoundSide.CEILING)
    t = _check_deviation(t)
    if t == 0:
        return BoundResult.trivial(method)

    n = len(variables)
    v = math.fsum(spec.variance for spec in variables) / n
    s = max(spec.spread for spec in variables)
    if v == 0:
        logger.warning(f"All variances are zero; a deviation of {t!r} cannot occur ({method.label})")
        return BoundResult.impossible(method)
    if s == 0:
        raise DegenerateInputError(
            f"Every ceiling equals its mean while the average variance is {v!r}; "
            f"the inputs are inconsistent"
        )

    x = t * s / v
    raw_log = -n * (v / (s * s)) * shape(x)
    lambda_ = math.log1p(x) / s if method == Method.BENNETT else None
    return BoundResult.from_log(method, raw_log, lambda_=lambda_)


def bennett_upper(variables, t):
    """exp(-n v/s^2 h(ts/v)) with s = max_i (M_i - mu_i) and v the mean variance."""
    return _bennett_family(variables, t, bennett_h, Method.BENNETT)


def bernstein_upper(variables, t):
    return _bennett_family(variables, t, bernstein_g, Method.BERNSTEIN)


def reflect(variables):
    """Map X_i to -X_i: floors become ceilings and the tails swap."""
    return [
        VariableSpec(
            mu=-spec.mu,
            sigma=spec.sigma,
            bound_value=-spec.bound_value,
            bound_side=spec.bound_side.opposite,
        )
        for spec in variables
    ]


def upper_tail(method, variables, t, polish=False, w_cfg=DEFAULT_W_CONFIG):
    method = Method(method)
    if method == Method.BENNETT:
        return bennett_upper(variables, t)
    if method == Method.BERNSTEIN:
        return bernstein_upper(variables, t)
    if method == Method.REFINED:
        from .refined import refined_upper
        return refined_upper(variables, t, polish=polish, w_cfg=w_cfg)
    raise DomainError(f"{method.label} needs two-sided ranges, not one-sided variable specs")


def lower_tail(method, variables, t, polish=False, w_cfg=DEFAULT_W_CONFIG):
    """Bound Pr(mean(X) - mean(mu) <= -t) from floor-sided specs."""
    variables = require_side(variables, BoundSide.FLOOR)
    return upper_tail(method, reflect(variables), t, polish=polish, w_cfg=w_cfg)
