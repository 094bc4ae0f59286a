import math

import numpy as np
from django.test import SimpleTestCase
from scipy.special import lambertw as scipy_lambertw

from .classical import (
    bennett_h,
    bennett_upper,
    bernstein_g,
    bernstein_upper,
    hoeffding_upper,
    lower_tail,
    reflect,
)
from .domain import BoundResult, BoundSide, Method, RangeSpec, VariableSpec
from .exceptions import (
    DegenerateInputError,
    DegenerateVarianceError,
    DomainError,
    InvalidSpecError,
    IterationFailure,
    LambertWDomainError,
)
from .lambertw import WConfig, lambert_w, lambert_w_exp
from .refined import (
    RefinedContext,
    b_lambda_log,
    curvature_cap,
    lambda_star_combined,
    lambda_star_single,
    mgf_majorant_log,
    refined_homogeneous,
    refined_lower,
    refined_upper,
)
from .serializers import BoundResultSerializer, VariableSpecSerializer

CEILING = BoundSide.CEILING
FLOOR = BoundSide.FLOOR

W_OF_ONE = 0.5671432904097838
W_OF_E_SQUARED = 1.5571455989976113


def ceiling(mu, sigma, bound):
    return VariableSpec(mu, sigma, bound, CEILING)


def floor(mu, sigma, bound):
    return VariableSpec(mu, sigma, bound, FLOOR)


def toy_floors():
    return [floor(30, 25, 25), floor(100, 20, 5)]


def majorant_slope(s, sigma2, lambda_):
    q = sigma2 / (s * s)
    u = lambda_ * s
    return q * s * math.expm1(u) / (q * (math.expm1(u) - u) + 1.0)


class LambertWTests(SimpleTestCase):

    def test_known_values(self):
        self.assertAlmostEqual(lambert_w(1.0), W_OF_ONE, places=14)
        self.assertAlmostEqual(lambert_w(math.e ** 2), W_OF_E_SQUARED, places=13)
        self.assertEqual(lambert_w(0.0), 0.0)
        self.assertAlmostEqual(lambert_w(math.e), 1.0, places=14)

    def test_exp_form_known_values(self):
        self.assertEqual(lambert_w_exp(1.0), 1.0)
        self.assertAlmostEqual(lambert_w_exp(2.0), W_OF_E_SQUARED, places=13)
        self.assertAlmostEqual(lambert_w_exp(0.0), W_OF_ONE, places=14)

    def test_exp_form_never_overflows(self):
        for x in (100.0, 1e3, 1e6, 1e12):
            w = lambert_w_exp(x)
            self.assertTrue(math.isfinite(w))
            self.assertLess(abs(w + math.log(w) - x), 1e-10 * x)
        self.assertAlmostEqual(lambert_w_exp(100.0), 95.44148, places=4)

    def test_exp_form_deep_negative(self):
        self.assertEqual(lambert_w_exp(-710.0), math.exp(-710.0))
        w = lambert_w_exp(-50.0)
        self.assertAlmostEqual(w / math.exp(-50.0), 1.0, places=12)

    def test_direct_residual_and_scipy_agreement(self):
        rng = np.random.default_rng(11)
        points = np.concatenate([rng.uniform(0, 10, 5000), 10 ** rng.uniform(-8, 12, 5000)])
        for x in points:
            x = float(x)
            w = lambert_w(x)
            self.assertLess(abs(w * math.exp(w) - x), 1e-10 * max(x, 1.0))
            self.assertAlmostEqual(w, scipy_lambertw(x).real, delta=1e-10 * max(w, 1e-300) + 1e-300)

    def test_exp_form_residual_and_agreement_with_direct(self):
        rng = np.random.default_rng(12)
        for x in rng.uniform(-600, 600, 10000):
            x = float(x)
            w = lambert_w_exp(x)
            self.assertGreater(w, 0)
            self.assertLess(abs(w + math.log(w) - x), 1e-10 * max(abs(x), 1.0))
            if -600 < x < 700:
                direct = lambert_w(math.exp(x))
                self.assertLess(abs(w - direct), 1e-9 * w)

    def test_increasing(self):
        grid = np.concatenate([np.linspace(0, 1e3, 5001), 10 ** np.linspace(3.1, 12, 500)])
        direct = [lambert_w(float(x)) for x in grid]
        for lower, upper in zip(direct, direct[1:]):
            self.assertLess(lower, upper)
        exp_form = [lambert_w_exp(float(x)) for x in np.linspace(-600, 600, 6001)]
        for lower, upper in zip(exp_form, exp_form[1:]):
            self.assertLess(lower, upper)

    def test_inverts_w_exp_w(self):
        rng = np.random.default_rng(13)
        for w in rng.uniform(0, 50, 5000):
            w = float(w)
            self.assertLess(abs(lambert_w(w * math.exp(w)) - w), 1e-10 * max(w, 1e-300))

    def test_domain_errors(self):
        for bad in (-1.0, -1e-300, math.inf, math.nan):
            with self.assertRaises(LambertWDomainError):
                lambert_w(bad)
        with self.assertRaises(LambertWDomainError):
            lambert_w_exp(math.nan)
        with self.assertRaises(DomainError):
            lambert_w(-1.0)

    def test_iteration_failure_carries_last_iterate(self):
        cfg = WConfig(relative_tolerance=1e-300, max_iterations=1)
        with self.assertRaises(IterationFailure) as ctx:
            lambert_w(5.0, cfg)
        self.assertTrue(math.isfinite(ctx.exception.last_iterate))
        self.assertTrue(math.isfinite(ctx.exception.residual))

    def test_invalid_config(self):
        with self.assertRaises(InvalidSpecError):
            WConfig(relative_tolerance=0.0)
        with self.assertRaises(InvalidSpecError):
            WConfig(max_iterations=0)


class DomainTypeTests(SimpleTestCase):

    def test_variable_spec_side_consistency(self):
        with self.assertRaises(InvalidSpecError):
            ceiling(1.0, 1.0, 0.5)
        with self.assertRaises(InvalidSpecError):
            floor(1.0, 1.0, 1.5)
        with self.assertRaises(InvalidSpecError):
            ceiling(0.0, -1.0, 1.0)
        with self.assertRaises(InvalidSpecError):
            ceiling(math.nan, 1.0, 1.0)

    def test_variable_spec_accepts_string_side(self):
        spec = VariableSpec(0.0, 1.0, 2.0, 'ceiling')
        self.assertIs(spec.bound_side, CEILING)
        self.assertEqual(spec.spread, 2.0)
        self.assertEqual(floor(3.0, 1.0, 1.0).spread, 2.0)

    def test_range_spec(self):
        self.assertEqual(RangeSpec(-1.0, 3.0).width, 4.0)
        with self.assertRaises(InvalidSpecError):
            RangeSpec(2.0, 1.0)

    def test_bound_result_clamps(self):
        result = BoundResult.from_log(Method.BENNETT, 0.3, lambda_=0.1)
        self.assertEqual(result.log_probability, 0.0)
        self.assertEqual(result.probability, 1.0)
        self.assertEqual(result.raw_log_probability, 0.3)

        result = BoundResult.from_log('refined', -2.0)
        self.assertIs(result.method, Method.REFINED)
        self.assertAlmostEqual(result.probability, math.exp(-2.0))

    def test_bound_side_opposite(self):
        self.assertIs(CEILING.opposite, FLOOR)
        self.assertIs(FLOOR.opposite, CEILING)


class ClassicalBoundTests(SimpleTestCase):

    def test_bennett_h_small_argument(self):
        x = 1e-6
        self.assertAlmostEqual(bennett_h(x) / (x * x / 2 - x ** 3 / 6), 1.0, places=12)
        self.assertEqual(bennett_h(0.0), 0.0)
        below, above = bennett_h(0.01 - 1e-12), bennett_h(0.01)
        self.assertAlmostEqual(below / above, 1.0, places=9)

    def test_bernstein_shape_below_bennett_shape(self):
        for x in np.linspace(0, 100, 501):
            self.assertLessEqual(bernstein_g(float(x)), bennett_h(float(x)) + 1e-12)

    def test_hoeffding_single_unit_range(self):
        result = hoeffding_upper([RangeSpec(0.0, 1.0)], 0.5)
        self.assertAlmostEqual(result.log_probability, -0.5, places=15)
        self.assertIsNone(result.lambda_)

    def test_hoeffding_homogeneous(self):
        result = hoeffding_upper([RangeSpec(-1.0, 1.0)], 0.5)
        self.assertAlmostEqual(result.log_probability, -0.125, places=15)
        result = hoeffding_upper([RangeSpec(-1.0, 1.0)] * 4, 0.5)
        self.assertAlmostEqual(result.log_probability, -0.5, places=15)

    def test_zero_deviation_is_trivial(self):
        self.assertEqual(hoeffding_upper([RangeSpec(0.0, 1.0)], 0.0).probability, 1.0)
        self.assertEqual(bennett_upper([ceiling(0, 1, 1)], 0.0).probability, 1.0)
        self.assertEqual(bernstein_upper([ceiling(0, 1, 1)], 0.0).log_probability, 0.0)

    def test_degenerate_ranges_flag_impossible_deviation(self):
        result = hoeffding_upper([RangeSpec(1.0, 1.0)] * 3, 0.1)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.probability, 0.0)
        self.assertEqual(result.log_probability, -math.inf)

    def test_bennett_and_bernstein_values(self):
        variables = [ceiling(0.0, 0.5, 1.0)]
        bennett = bennett_upper(variables, 0.5)
        self.assertAlmostEqual(bennett.probability, math.exp(-0.25 * (3 * math.log(3) - 2)), places=14)
        self.assertAlmostEqual(bennett.probability, 0.7233, places=4)
        self.assertAlmostEqual(bennett.lambda_, math.log(3.0), places=14)
        bernstein = bernstein_upper(variables, 0.5)
        self.assertAlmostEqual(bernstein.probability, math.exp(-0.3), places=14)
        self.assertIsNone(bernstein.lambda_)

    def test_zero_variance(self):
        result = bennett_upper([ceiling(0.0, 0.0, 1.0)] * 2, 0.3)
        self.assertTrue(result.degenerate)
        self.assertEqual(result.probability, 0.0)

    def test_zero_spread_with_variance_is_inconsistent(self):
        with self.assertRaises(DegenerateInputError):
            bennett_upper([ceiling(1.0, 1.0, 1.0)], 0.3)

    def test_mixed_sides_rejected(self):
        with self.assertRaises(DomainError):
            bennett_upper([ceiling(0, 1, 1), floor(0, 1, -1)], 0.1)
        with self.assertRaises(DomainError):
            bernstein_upper([], 0.1)
        with self.assertRaises(DomainError):
            bennett_upper([ceiling(0, 1, 1)], -0.1)

    def test_bennett_scale_equivariance(self):
        variables = [ceiling(0.3, 0.2, 1.0), ceiling(-0.5, 0.7, 2.0)]
        scaled = [ceiling(3 * v.mu, 3 * v.sigma, 3 * v.bound_value) for v in variables]
        for bound in (bennett_upper, bernstein_upper):
            self.assertAlmostEqual(
                bound(variables, 0.4).log_probability,
                bound(scaled, 1.2).log_probability,
                places=12,
            )

    def test_hoeffding_scale_equivariance(self):
        ranges = [RangeSpec(-1.0, 2.0), RangeSpec(0.5, 0.75), RangeSpec(-3.0, -1.0)]
        for c in (0.01, 3.0, 250.0):
            scaled = [RangeSpec(c * r.lo, c * r.hi) for r in ranges]
            self.assertAlmostEqual(
                hoeffding_upper(ranges, 0.4).log_probability,
                hoeffding_upper(scaled, 0.4 * c).log_probability,
                places=12,
            )

    def test_log_bounds_do_not_increase_in_t(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            n = int(rng.integers(1, 8))
            mus = rng.normal(size=n)
            variables = [
                ceiling(float(mu), float(rng.uniform(0.01, 2)), float(mu + rng.uniform(0.01, 3)))
                for mu in mus
            ]
            ranges = [RangeSpec(float(mu - rng.uniform(0.01, 3)), v.bound_value) for mu, v in zip(mus, variables)]
            grid = np.sort(rng.uniform(1e-3, 3.0, 40))
            for bound, inputs in ((hoeffding_upper, ranges), (bennett_upper, variables), (bernstein_upper, variables)):
                logs = [bound(inputs, float(t)).raw_log_probability for t in grid]
                for smaller_t, larger_t in zip(logs, logs[1:]):
                    self.assertLessEqual(larger_t, smaller_t)
            homogeneous = [variables[0]] * n
            grid = np.sort(rng.uniform(1e-3, 0.999, 40)) * variables[0].spread
            logs = [refined_upper(homogeneous, float(t)).log_probability for t in grid]
            for smaller_t, larger_t in zip(logs, logs[1:]):
                self.assertLessEqual(larger_t, smaller_t + 1e-12 * max(1.0, abs(smaller_t)))

    def test_bennett_never_looser_than_bernstein(self):
        rng = np.random.default_rng(5)
        for _ in range(10000):
            n = int(rng.integers(1, 11))
            mus = rng.normal(scale=5, size=n)
            variables = [
                ceiling(float(mu), float(rng.uniform(1e-3, 3)), float(mu + rng.uniform(1e-3, 5)))
                for mu in mus
            ]
            t = float(rng.uniform(1e-3, 1.0)) * max(v.spread for v in variables)
            bennett = bennett_upper(variables, t).raw_log_probability
            bernstein = bernstein_upper(variables, t).raw_log_probability
            self.assertLessEqual(bennett, bernstein + 1e-10)

    def test_reflect_is_an_involution(self):
        variables = [ceiling(0.3, 0.2, 1.0), floor(-0.5, 0.7, -2.0)]
        reflected = reflect(variables)
        self.assertEqual(reflected[0], floor(-0.3, 0.2, -1.0))
        self.assertEqual(reflected[1], ceiling(0.5, 0.7, 2.0))
        self.assertEqual(reflect(reflected), variables)

    def test_lower_tail_is_reflected_upper_tail(self):
        rng = np.random.default_rng(3)
        for _ in range(1000):
            n = int(rng.integers(1, 6))
            mus = rng.normal(size=n)
            variables = [
                floor(float(mu), float(rng.uniform(0.01, 2)), float(mu - rng.uniform(0.01, 3)))
                for mu in mus
            ]
            t = float(rng.uniform(0.01, 0.99)) * min(v.spread for v in variables)
            self.assertEqual(lower_tail(Method.BENNETT, variables, t), bennett_upper(reflect(variables), t))
            self.assertEqual(lower_tail(Method.BERNSTEIN, variables, t), bernstein_upper(reflect(variables), t))
            self.assertEqual(lower_tail(Method.REFINED, variables, t), refined_upper(reflect(variables), t))

    def test_lower_tail_rejects_hoeffding_and_ceilings(self):
        with self.assertRaises(DomainError):
            lower_tail(Method.HOEFFDING, toy_floors(), 28.0)
        with self.assertRaises(DomainError):
            lower_tail(Method.BENNETT, [ceiling(0, 1, 1)], 0.5)


class MgfMajorantTests(SimpleTestCase):

    def test_values(self):
        self.assertEqual(mgf_majorant_log(1.0, 1.0, 0.0), 0.0)
        self.assertAlmostEqual(mgf_majorant_log(1.0, 1.0, 1.0), math.log(math.e - 1), places=14)
        self.assertAlmostEqual(mgf_majorant_log(1.0, 1.0, 1.0), 0.5413, places=4)

    def test_small_argument_keeps_precision(self):
        value = mgf_majorant_log(2.0, 0.5, 0.001)
        self.assertAlmostEqual(value, 2.5017e-7, delta=1e-10)
        expected = math.log1p(0.125 * (0.002 ** 2 / 2 + 0.002 ** 3 / 6 + 0.002 ** 4 / 24))
        self.assertAlmostEqual(value / expected, 1.0, places=9)

    def test_large_exponent_is_total_and_continuous(self):
        huge = mgf_majorant_log(1.0, 0.25, 5000.0)
        self.assertTrue(math.isfinite(huge))
        self.assertAlmostEqual(huge, math.log(0.25) + 5000.0, places=9)
        below = mgf_majorant_log(1.0, 0.25, 700.0 - 1e-9)
        above = mgf_majorant_log(1.0, 0.25, 700.0 + 1e-9)
        self.assertAlmostEqual(below, above, places=7)

    def test_large_variance_ratio_stays_finite(self):
        value = mgf_majorant_log(1.0, 1e10, 699.0)
        self.assertTrue(math.isfinite(value))
        self.assertAlmostEqual(value, math.log(1e10) + 699.0 + math.log1p(-700.0 * math.exp(-699.0)), places=9)
        self.assertAlmostEqual(value, 722.026, places=3)
        previous = -math.inf
        for lam in np.linspace(670.0, 730.0, 601):
            lam = float(lam)
            value = mgf_majorant_log(1.0, 1e10, lam)
            self.assertGreaterEqual(value, previous)
            self.assertAlmostEqual(value, math.log(1e10) + lam + math.log1p(-(1.0 + lam) * math.exp(-lam)), places=9)
            previous = value

    def test_negative_lambda_rejected(self):
        with self.assertRaises(DomainError):
            mgf_majorant_log(1.0, 1.0, -0.1)

    def test_b_lambda_log(self):
        ctx = RefinedContext.build([1.0], [1.0], 0.5)
        self.assertEqual(b_lambda_log(ctx, 0.0), 0.0)
        lam = 2 - W_OF_E_SQUARED
        value = b_lambda_log(ctx, lam)
        self.assertAlmostEqual(value, math.log(math.exp(lam) - lam) - lam * 0.5, places=14)
        self.assertAlmostEqual(value, -0.11321, places=4)
        self.assertGreater(b_lambda_log(ctx, 0.01), value)


class RefinedContextTests(SimpleTestCase):

    def test_build(self):
        ctx = RefinedContext.build([5, 95], [625, 400], 28)
        self.assertEqual(ctx.s_bar, 50.0)
        self.assertEqual(ctx.n, 2)

    def test_invariants(self):
        with self.assertRaises(DomainError):
            RefinedContext.build([1.0, 2.0], [1.0], 0.5)
        with self.assertRaises(DomainError):
            RefinedContext.build([1.0, 0.0], [1.0, 1.0], 0.1)
        with self.assertRaises(DomainError):
            RefinedContext.build([1.0], [0.0], 0.5)
        with self.assertRaises(DomainError) as ctx:
            RefinedContext.build([1.0, 3.0], [1.0, 1.0], 2.0)
        self.assertEqual(ctx.exception.interval, (0.0, 2.0))
        with self.assertRaises(DomainError):
            RefinedContext((1.0, 3.0), (1.0, 1.0), 0.5, 1.5)


class LambdaStarTests(SimpleTestCase):

    def test_single_value(self):
        self.assertAlmostEqual(lambda_star_single(1.0, 1.0, 0.5), 2 - W_OF_E_SQUARED, places=12)

    def test_single_matches_closed_form(self):
        s, sigma2, t = 2.0, 0.7, 0.3
        exponent = s / t + s * s / sigma2 - 1 + math.log((s - t) / t)
        closed = 1 / t + s / sigma2 - 1 / s - lambert_w(math.exp(exponent)) / s
        self.assertAlmostEqual(lambda_star_single(s, sigma2, t), closed, places=10)

    def test_single_with_dominant_variance(self):
        for sigma2, t in ((1e16, 0.9999), (1e12, 0.5), (1e20, 1e-3)):
            lam = lambda_star_single(1.0, sigma2, t)
            self.assertGreater(lam, 0.0)
            self.assertAlmostEqual(lam * sigma2 / t, 1.0, places=6)
            self.assertLess(abs(majorant_slope(1.0, sigma2, lam) / t - 1.0), 1e-9)

    def test_single_is_continuous_across_solvers(self):
        grid = [float(sigma2) for sigma2 in 10 ** np.linspace(2, 12, 201)]
        lams = [lambda_star_single(1.0, sigma2, 0.9) for sigma2 in grid]
        for lam, sigma2 in zip(lams, grid):
            self.assertGreater(lam, 0.0)
            self.assertLess(abs(majorant_slope(1.0, sigma2, lam) / 0.9 - 1.0), 1e-6)
        for smaller, larger in zip(lams[1:], lams):
            self.assertLess(smaller, larger)

    def test_single_domain(self):
        for t in (0.0, 1.0, 1.5, -0.2):
            with self.assertRaises(DomainError):
                lambda_star_single(1.0, 1.0, t)
        with self.assertRaises(DomainError):
            lambda_star_single(1.0, 0.0, 0.5)

    def test_non_negative_and_stationary(self):
        rng = np.random.default_rng(6)
        for _ in range(10000):
            s = float(10 ** rng.uniform(-1, 1))
            sigma2 = float(s * s * rng.uniform(0.05, 4.0))
            t = float(s * rng.uniform(0.01, 0.99))
            lam = lambda_star_single(s, sigma2, t)
            self.assertGreaterEqual(lam, 0.0)
            self.assertLess(abs(majorant_slope(s, sigma2, lam) - t), 1e-8 * max(1.0, s))

    def test_quadratic_majorization(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            s = float(10 ** rng.uniform(-1, 1))
            sigma2 = float(s * s * rng.uniform(0.05, 4.0))
            t = float(s * rng.uniform(0.01, 0.99))
            star = lambda_star_single(s, sigma2, t)
            lam = float(rng.uniform(0, 3 * star + 1))
            cap = curvature_cap(s, sigma2)
            at_star = mgf_majorant_log(s, sigma2, star) - star * t
            at_lam = mgf_majorant_log(s, sigma2, lam) - lam * t
            self.assertLessEqual(at_lam, cap * (lam - star) ** 2 / 2 + at_star + 1e-10)

    def test_curvature_cap_is_the_supremum(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            s = float(rng.uniform(0.1, 5))
            sigma2 = float(s * s * rng.uniform(0.05, 4.0))
            q = sigma2 / (s * s)
            cap = curvature_cap(s, sigma2)
            peak = s / sigma2
            for lam in np.linspace(0, 50 / s, 400):
                u = float(lam) * s
                dropped = sigma2 * math.exp(u) / (q * (math.expm1(u) - u) + 1)
                self.assertLessEqual(dropped, cap + 1e-10)
            u = peak * s
            attained = sigma2 * math.exp(u) / (q * (math.expm1(u) - u) + 1)
            self.assertAlmostEqual(attained / cap, 1.0, places=10)

    def test_combined_reduces_to_single(self):
        ctx = RefinedContext.build([1.0, 1.0], [1.0, 1.0], 0.5)
        self.assertEqual(lambda_star_combined(ctx), lambda_star_single(1.0, 1.0, 0.5))
        ctx = RefinedContext.build([2.5] * 7, [0.3] * 7, 1.1)
        self.assertEqual(lambda_star_combined(ctx), lambda_star_single(2.5, 0.3, 1.1))

    def test_combined_toy_portfolio(self):
        ctx = RefinedContext.build([5.0, 95.0], [625.0, 400.0], 28.0)
        lam = lambda_star_combined(ctx)
        self.assertGreaterEqual(lam, 0.0)
        self.assertAlmostEqual(math.exp(b_lambda_log(ctx, lam)), 0.391, delta=0.005)

    def test_combined_lies_between_single_minimizers(self):
        ctx = RefinedContext.build([5.0, 95.0], [625.0, 400.0], 28.0)
        singles = [lambda_star_single(s, v, 28.0 * s / 50.0) for s, v in zip(ctx.s_list, ctx.sigma2_list)]
        lam = lambda_star_combined(ctx)
        self.assertGreaterEqual(lam, min(singles))
        self.assertLessEqual(lam, max(singles))


class RefinedBoundTests(SimpleTestCase):

    def test_toy_portfolio_reflected(self):
        variables = [ceiling(-30, 25, -25), ceiling(-100, 20, -5)]
        result = refined_upper(variables, 28.0)
        self.assertAlmostEqual(result.probability, 0.391, delta=0.005)
        self.assertIs(result.method, Method.REFINED)
        self.assertGreater(result.lambda_, 0.0)

    def test_toy_portfolio_native_floor_form(self):
        result = refined_lower(toy_floors(), 28.0)
        self.assertEqual(result, refined_upper(reflect(toy_floors()), 28.0))
        self.assertAlmostEqual(result.probability, 0.391, delta=0.005)

    def test_single_variable_beats_bennett(self):
        variables = [ceiling(0.0, 1.0, 1.0)]
        result = refined_upper(variables, 0.5)
        self.assertAlmostEqual(result.log_probability, -0.11321, places=4)
        self.assertAlmostEqual(result.probability, 0.8930, places=3)
        self.assertLess(result.probability, bennett_upper(variables, 0.5).probability)

    def test_log_bound_scales_with_n(self):
        spec = ceiling(0.2, 0.3, 1.0)
        one = refined_upper([spec], 0.4).log_probability
        five = refined_upper([spec] * 5, 0.4).log_probability
        self.assertAlmostEqual(five / one, 5.0, places=12)

    def test_homogeneous_matches_context_path(self):
        for n in (1, 3, 10):
            direct = refined_homogeneous(0.1, 0.4, 1.0, n, 0.3)
            generic = refined_upper([ceiling(0.1, 0.4, 1.0)] * n, 0.3)
            self.assertAlmostEqual(direct.log_probability / generic.log_probability, 1.0, places=12)
            self.assertAlmostEqual(direct.lambda_, generic.lambda_, places=12)

    def test_homogeneous_dominance(self):
        rng = np.random.default_rng(2024)
        for _ in range(10000):
            mu = float(rng.uniform(-0.999, 0.999))
            sigma = float(rng.uniform(1e-3, 1.0))
            t = float((1 - mu) * rng.uniform(1e-3, 0.999))
            n = int(rng.integers(1, 6))
            variables = [ceiling(mu, sigma, 1.0)] * n
            refined = refined_upper(variables, t).raw_log_probability
            bennett = bennett_upper(variables, t).raw_log_probability
            bernstein = bernstein_upper(variables, t).raw_log_probability
            self.assertLessEqual(refined, bennett + 1e-10)
            self.assertLessEqual(bennett, bernstein + 1e-10)

    def test_polish_never_loosens(self):
        variables = [ceiling(-30, 25, -25), ceiling(-100, 20, -5)]
        plain = refined_upper(variables, 28.0)
        polished = refined_upper(variables, 28.0, polish=True)
        self.assertLessEqual(polished.log_probability, plain.log_probability)
        single = [ceiling(0.0, 1.0, 1.0)]
        self.assertAlmostEqual(
            refined_upper(single, 0.5, polish=True).log_probability,
            refined_upper(single, 0.5).log_probability,
            places=9,
        )

    def test_domain_and_degenerate_errors(self):
        with self.assertRaises(DomainError) as ctx:
            refined_upper([ceiling(0, 1, 1), ceiling(0, 1, 3)], 2.0)
        self.assertEqual(ctx.exception.interval, (0.0, 2.0))
        with self.assertRaises(DomainError):
            refined_upper([ceiling(0, 1, 1)], 0.0)
        with self.assertRaises(DegenerateVarianceError) as ctx:
            refined_upper([ceiling(0, 1, 1), ceiling(0, 0, 1)], 0.5)
        self.assertEqual(ctx.exception.index, 1)
        self.assertIn('1e-9', str(ctx.exception))
        with self.assertRaises(DegenerateInputError):
            refined_upper([ceiling(0, 1, 0), ceiling(0, 1, 2)], 0.5)
        with self.assertRaises(DomainError):
            refined_lower([ceiling(0, 1, 1)], 0.5)


class SerializerTests(SimpleTestCase):

    def test_variable_spec_row(self):
        serializer = VariableSpecSerializer(data={'mu': '30', 'sigma': '25', 'bound': '25', 'side': 'floor'})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), floor(30.0, 25.0, 25.0))

    def test_variable_spec_errors_name_the_column(self):
        cases = [
            ({'mu': '0', 'sigma': '1', 'bound': '-1', 'side': 'ceiling'}, 'bound'),
            ({'mu': '0', 'sigma': '-1', 'bound': '1', 'side': 'ceiling'}, 'sigma'),
            ({'mu': 'nan', 'sigma': '1', 'bound': '1', 'side': 'ceiling'}, 'mu'),
            ({'mu': '0', 'sigma': '1', 'bound': '1', 'side': 'upward'}, 'side'),
            ({'mu': 'abc', 'sigma': '1', 'bound': '1', 'side': 'ceiling'}, 'mu'),
        ]
        for data, column in cases:
            serializer = VariableSpecSerializer(data=data)
            self.assertFalse(serializer.is_valid())
            self.assertIn(column, serializer.errors)

    def test_bound_result_representation(self):
        result = bennett_upper([ceiling(0.0, 0.5, 1.0)], 0.5)
        data = BoundResultSerializer(result).data
        self.assertEqual(data['method'], 'bennett')
        self.assertEqual(data['lambda'], result.lambda_)
        self.assertEqual(data['probability'], result.probability)
        parsed = BoundResultSerializer(data=dict(data))
        self.assertTrue(parsed.is_valid(), parsed.errors)
        self.assertEqual(parsed.save(), result)

    def test_impossible_result_reads_back(self):
        result = BoundResult.impossible(Method.BENNETT)
        for spelling in ('-inf', '-Infinity', -math.inf):
            data = dict(BoundResultSerializer(result).data, log_probability=spelling, raw_log_probability=spelling)
            parsed = BoundResultSerializer(data=data)
            self.assertTrue(parsed.is_valid(), parsed.errors)
            self.assertEqual(parsed.save(), result)
        parsed = BoundResultSerializer(data=dict(BoundResultSerializer(result).data, log_probability='nan'))
        self.assertFalse(parsed.is_valid())
        self.assertIn('log_probability', parsed.errors)
