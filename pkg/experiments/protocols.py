"""
Synthetic comparisons between the four bounds.

``homogeneous_sweep`` traces the bounds of a single variable with ceiling 1
(Hoeffding also gets the floor -1) along a grid of deviations.
``heterogeneous_trials`` draws random instances with their own ranges,
means and deviations, and ``validate_bounds`` checks every bound against a
Monte Carlo estimate on the extremal two-point law.
"""
import logging
import math

from bounds.classical import bennett_upper, bernstein_upper, hoeffding_upper
from bounds.domain import BoundSide, Method, PointFailure, RangeSpec, VariableSpec
from bounds.exceptions import DomainError, ExperimentError
from bounds.lambertw import DEFAULT_W_CONFIG
from bounds.refined import refined_homogeneous, refined_upper

from .domain import ExperimentRecord, ValidationOutcome, ValidationReport
from .sampling import (
    MIN_MONTE_CARLO_TRIALS,
    STREAM_DESIGN,
    derive_trial_seed,
    make_rng,
    make_two_point,
    monte_carlo_tail,
    stream_rng,
)

logger = logging.getLogger(__name__)

HOMOGENEOUS_CEILING = 1.0
HOMOGENEOUS_FLOOR = -1.0
DEFAULT_SWEEP_POINTS = 200
DEFAULT_NS = (1, 10, 100)
DEFAULT_ZS = (1.0, 2.0, 10.0, 100.0)
DEFAULT_TRIALS = 1000
DEFAULT_MAX_REJECTIONS = 1000


def compute_log_bounds(variables, ranges, t, w_cfg=DEFAULT_W_CONFIG):
    """Clamped log-bounds of all four methods for one upper-tail instance."""
    return {
        Method.HOEFFDING: hoeffding_upper(ranges, t).log_probability,
        Method.BENNETT: bennett_upper(variables, t).log_probability,
        Method.BERNSTEIN: bernstein_upper(variables, t).log_probability,
        Method.REFINED: refined_upper(variables, t, w_cfg=w_cfg).log_probability,
    }


def homogeneous_log_bounds(mu, sigma, t, w_cfg=DEFAULT_W_CONFIG):
    """``compute_log_bounds`` for the single-variable design; the refined bound skips the context."""
    variables = [VariableSpec(mu, sigma, HOMOGENEOUS_CEILING, BoundSide.CEILING)]
    return {
        Method.HOEFFDING: hoeffding_upper([RangeSpec(HOMOGENEOUS_FLOOR, HOMOGENEOUS_CEILING)], t).log_probability,
        Method.BENNETT: bennett_upper(variables, t).log_probability,
        Method.BERNSTEIN: bernstein_upper(variables, t).log_probability,
        Method.REFINED: refined_homogeneous(mu, sigma, HOMOGENEOUS_CEILING, 1, t, w_cfg).log_probability,
    }


def homogeneous_grid(mu, points=DEFAULT_SWEEP_POINTS):
    if points < 1:
        raise DomainError(f"a sweep needs at least one point, got {points!r}")
    step = (HOMOGENEOUS_CEILING - mu) / points
    return [(k + 0.5) * step for k in range(points)]


def homogeneous_sweep(mu, sigma, t_grid=None, points=DEFAULT_SWEEP_POINTS, w_cfg=DEFAULT_W_CONFIG):
    if not HOMOGENEOUS_FLOOR <= mu < HOMOGENEOUS_CEILING:
        raise DomainError(f"mu={mu!r} is out of range", interval=(HOMOGENEOUS_FLOOR, HOMOGENEOUS_CEILING))
    half_width = (HOMOGENEOUS_CEILING - HOMOGENEOUS_FLOOR) / 2
    if not 0 < sigma <= half_width:
        raise DomainError(f"sigma={sigma!r} is out of range", interval=(0.0, half_width))
    if t_grid is None:
        t_grid = homogeneous_grid(mu, points)

    z = half_width / sigma
    records = []
    for index, t in enumerate(t_grid):
        if not 0 < t < HOMOGENEOUS_CEILING - mu:
            message = f"t={t!r} lies outside (0, {HOMOGENEOUS_CEILING - mu!r})"
            logger.warning(f"Homogeneous sweep point {index}: {message}")
            records.append(PointFailure(index=index, value=t, message=message))
            continue
        records.append(ExperimentRecord(
            instance_id=index,
            n=1,
            z=z,
            t=t,
            log_bounds=homogeneous_log_bounds(mu, sigma, t, w_cfg),
            seed=0,
        ))
    return records


def draw_instance(n, z, rng, max_rejections=DEFAULT_MAX_REJECTIONS):
    """
    Draw ceilings, floors, means, deviations and a deviation t.

    M_i = |N(0,1)|, L_i = -|N(0,1)|, mu_i ~ U[L_i, M_i],
    sigma_i ~ U[0, (M_i - L_i) / (2z)] and t = U[0,1] * mean(M_i - mu_i).
    Draws with a zero deviation, a mean on its ceiling or t outside
    (0, mean(M_i - mu_i)) are rejected and redrawn.
    """
    rejections = 0
    while True:
        ceilings = abs(rng.standard_normal(n))
        floors = -abs(rng.standard_normal(n))
        mus = rng.uniform(floors, ceilings)
        sigmas = rng.uniform(0.0, (ceilings - floors) / (2.0 * z))
        spreads = ceilings - mus
        if (sigmas > 0).all() and (spreads > 0).all():
            s_bar = math.fsum(spreads.tolist()) / n
            t = float(rng.uniform()) * s_bar
            if 0 < t < s_bar:
                break
        rejections += 1
        logger.debug(f"Rejected a degenerate draw ({rejections} so far)")
        if rejections >= max_rejections:
            raise ExperimentError(f"gave up after {rejections} rejected draws (n={n}, z={z})")

    variables = tuple(
        VariableSpec(float(mu), float(sigma), float(ceiling), BoundSide.CEILING)
        for mu, sigma, ceiling in zip(mus, sigmas, ceilings)
    )
    ranges = tuple(RangeSpec(float(lo), float(hi)) for lo, hi in zip(floors, ceilings))
    return variables, ranges, t


def _check_design(n, z):
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n!r}")
    if not z >= 1:
        raise DomainError(f"z must be at least 1, got {z!r}")


def run_heterogeneous_trial(n, z, seed, instance_id, w_cfg=DEFAULT_W_CONFIG, max_rejections=DEFAULT_MAX_REJECTIONS):
    _check_design(n, z)
    trial_seed = derive_trial_seed(seed, instance_id)
    variables, ranges, t = draw_instance(n, z, make_rng(trial_seed), max_rejections)
    return ExperimentRecord(
        instance_id=instance_id,
        n=n,
        z=float(z),
        t=t,
        log_bounds=compute_log_bounds(variables, ranges, t, w_cfg),
        seed=trial_seed,
        variables=variables,
        ranges=ranges,
    )


def heterogeneous_trials(n, z, trials, seed, first_id=0, w_cfg=DEFAULT_W_CONFIG,
                         max_rejections=DEFAULT_MAX_REJECTIONS):
    _check_design(n, z)
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials!r}")
    return [
        run_heterogeneous_trial(n, z, seed, first_id + k, w_cfg, max_rejections)
        for k in range(trials)
    ]


def design_points(ns=DEFAULT_NS, zs=DEFAULT_ZS, trials=DEFAULT_TRIALS):
    """``(n, z, first_id)`` for every cell of the grid, ids never overlapping."""
    points = []
    first_id = 0
    for n in ns:
        for z in zs:
            points.append((n, z, first_id))
            first_id += trials
    return points


def heterogeneous_grid(ns=DEFAULT_NS, zs=DEFAULT_ZS, trials=DEFAULT_TRIALS, seed=42, w_cfg=DEFAULT_W_CONFIG,
                       max_rejections=DEFAULT_MAX_REJECTIONS):
    records = []
    for n, z, first_id in design_points(ns, zs, trials):
        records.extend(heterogeneous_trials(n, z, trials, seed, first_id, w_cfg, max_rejections))
    logger.info(f"Drew {len(records)} heterogeneous instances over {len(ns)}x{len(zs)} designs")
    return records


def win_rates(records):
    """Share of records where the refined log-bound is strictly below each classical one."""
    records = list(records)
    if not records:
        raise DomainError('win rates need at least one record')
    rates = {}
    for method in (Method.HOEFFDING, Method.BENNETT, Method.BERNSTEIN):
        wins = sum(1 for r in records if r.log_bounds[Method.REFINED] < r.log_bounds[method])
        rates[method] = wins / len(records)
    return rates


def validate_instance(seed, instance_id, trials, max_n, w_cfg=DEFAULT_W_CONFIG,
                      max_rejections=DEFAULT_MAX_REJECTIONS):
    """Monte Carlo check of all four bounds on one random instance."""
    design = stream_rng(seed, instance_id, STREAM_DESIGN)
    n = int(design.integers(1, max_n + 1))
    z = float(design.choice(DEFAULT_ZS))
    record = run_heterogeneous_trial(n, z, seed, instance_id, w_cfg, max_rejections)
    estimate, std_error = monte_carlo_tail(record.variables, record.t, trials, seed, instance_id)

    # Hoeffding only holds if the two-point law stays above the drawn floors.
    within_floors = all(
        make_two_point(v.mu, v.sigma, v.bound_value).lo >= r.lo
        for v, r in zip(record.variables, record.ranges)
    )
    outcomes = [
        ValidationOutcome(
            instance_id=instance_id,
            n=n,
            z=z,
            t=record.t,
            method=method,
            bound=math.exp(log_bound),
            estimate=estimate,
            std_error=std_error,
            applicable=within_floors or method != Method.HOEFFDING,
        )
        for method, log_bound in record.log_bounds.items()
    ]
    return outcomes


def validate_bounds(instances, trials, seed, max_n=10, w_cfg=DEFAULT_W_CONFIG,
                    max_rejections=DEFAULT_MAX_REJECTIONS):
    if instances < 1 or max_n < 1:
        raise DomainError('validation needs at least one instance and max_n >= 1')
    if trials < MIN_MONTE_CARLO_TRIALS:
        raise DomainError(f"at least {MIN_MONTE_CARLO_TRIALS} trials are required, got {trials!r}")
    outcomes = []
    for instance_id in range(instances):
        outcomes.extend(validate_instance(seed, instance_id, trials, max_n, w_cfg, max_rejections))
    report = ValidationReport(outcomes=tuple(outcomes))
    logger.info(f"Validated {report.instances} instances: {report.summary()}")
    return report
