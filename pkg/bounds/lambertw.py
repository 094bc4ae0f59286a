"""
Principal branch of Lambert's W function for non-negative arguments.

Two entry points are provided. ``lambert_w(x)`` solves ``w * exp(w) = x``
directly. ``lambert_w_exp(x)`` returns ``W(exp(x))`` by solving
``w + ln(w) = x`` without ever forming ``exp(x)``, which is what the bound
formulas need: their W arguments are exponentials of quantities that easily
exceed the double-precision range.

Both use Halley-type updates and stop on the residual of the defining
equation. If an update leaves the admissible region (non-finite or
non-positive iterate, or an overflow) the solve falls back to bisection on
the log form of the equation.
"""
import logging
import math
from dataclasses import dataclass

from scipy.optimize import bisect

from .exceptions import InvalidSpecError, IterationFailure, LambertWDomainError

logger = logging.getLogger(__name__)

# Below this, W(exp(x)) == exp(x) to double precision (W(y) = y - y**2 + ...).
_UNDERFLOW_EXPONENT = -700.0
_BISECT_RTOL = 4 * 2.220446049250313e-16


@dataclass(frozen=True)
class WConfig:
    relative_tolerance: float = 1e-12
    max_iterations: int = 100

    def __post_init__(self):
        if not self.relative_tolerance > 0:
            raise InvalidSpecError(f"relative_tolerance must be positive, got {self.relative_tolerance!r}")
        if self.max_iterations < 1:
            raise InvalidSpecError(f"max_iterations must be at least 1, got {self.max_iterations!r}")


DEFAULT_W_CONFIG = WConfig()


def _halley_step(f, df, w):
    # Shared shape of every update: W - f / (f' - (W + 2) f / (2W + 2))
    return w - f / (df - (w + 2.0) * f / (2.0 * w + 2.0))


def _log_form_residual(w, x):
    return w + math.log(w) - x


def _bisect_log_form(x):
    """Solve w + ln(w) = x by bisection; the root is W(exp(x))."""
    if x >= 1.0:
        lo, hi = 1.0, x
    else:
        lo, hi = math.exp(x - 1.0), 1.0
    if lo == hi:
        return lo
    return bisect(
        _log_form_residual, lo, hi, args=(x,),
        xtol=1e-300, rtol=_BISECT_RTOL, maxiter=2000,
    )


def lambert_w(x, cfg=DEFAULT_W_CONFIG):
    """W(x) for x >= 0, principal branch."""
    if not math.isfinite(x) or x < 0:
        raise LambertWDomainError(f"lambert_w needs a finite non-negative argument, got {x!r}")
    if x == 0:
        return 0.0

    tolerance = cfg.relative_tolerance * x
    w = math.log1p(x)
    residual = math.inf
    for iteration in range(cfg.max_iterations + 1):
        try:
            ew = math.exp(w)
        except OverflowError:
            break
        residual = w * ew - x
        if abs(residual) <= tolerance:
            return w
        if iteration == cfg.max_iterations:
            raise IterationFailure('lambert_w did not converge', w, residual)
        w = _halley_step(residual, (w + 1.0) * ew, w)
        if not math.isfinite(w) or w < 0:
            break

    logger.warning(f"lambert_w({x!r}) left the Halley basin, falling back to bisection")
    return _bisect_log_form(math.log(x))


def lambert_w_exp(x, cfg=DEFAULT_W_CONFIG):
    """W(exp(x)) for any finite x, computed without evaluating exp(x)."""
    if not math.isfinite(x):
        raise LambertWDomainError(f"lambert_w_exp needs a finite argument, got {x!r}")
    if x < _UNDERFLOW_EXPONENT:
        return math.exp(x)

    tolerance = cfg.relative_tolerance * max(abs(x), 1.0)
    # x - ln x is the leading asymptotic term; below 1, log1p(e^x) stays within 25% of the root
    w = x - math.log(x) if x >= 1.0 else math.log1p(math.exp(x))

    residual = math.inf
    for iteration in range(cfg.max_iterations + 1):
        if w > 0:
            residual = _log_form_residual(w, x)
            if abs(residual) <= tolerance:
                return w
        if iteration == cfg.max_iterations:
            raise IterationFailure('lambert_w_exp did not converge', w, residual)
        try:
            if x >= 0:
                # f = W - exp(x - W); exp(x - W) = W at the root, so f' ~ W + 1
                w = _halley_step(w - math.exp(x - w), w + 1.0, w)
            else:
                # f = W exp(W - x) - 1, f' = (W + 1) exp(W - x)
                f = math.expm1(math.log(w) + w - x)
                w = _halley_step(f, (w + 1.0) * (f + 1.0) / w, w)
        except (OverflowError, ValueError):
            break
        if not math.isfinite(w) or w <= 0:
            break

    logger.warning(f"lambert_w_exp({x!r}) left the Halley basin, falling back to bisection")
    return _bisect_log_form(x)
