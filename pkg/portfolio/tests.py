import math

import numpy as np
from django.test import SimpleTestCase
from scipy.optimize import brentq, minimize_scalar

from bounds.classical import lower_tail
from bounds.domain import BoundSide, Method, PointFailure, RangeSpec, VariableSpec
from bounds.exceptions import DomainError, InvalidSpecError
from bounds.refined import lambda_star_single, mgf_majorant_log, refined_lower

from .allocation import (
    allocate,
    allocation_lambda,
    allocation_sweep,
    tau_from_deviation,
    tau_grid,
    tau_interval,
)
from .assessment import imputed_ranges, threshold_interval, underperformance_bound
from .domain import AllocationResult, Investment
from .serializers import AllocationResultSerializer, InvestmentSerializer
from .tasks import parallel_allocation_sweep

TOY = [Investment('bond', 30.0, 25.0, 25.0), Investment('venture', 100.0, 20.0, 5.0)]

THREE_ASSETS = [
    Investment('a', 0.3030, 0.2601, 0.0),
    Investment('b', 0.2400, 0.5248, 0.0),
    Investment('c', 0.6178, 0.7645, 0.0),
]

FOUR_ASSETS = [
    Investment('a', 0.1474, 0.0593, 0.0),
    Investment('b', 0.6088, 0.6218, 0.0),
    Investment('c', 0.1785, 0.2183, 0.0),
    Investment('d', 0.7585, 0.4597, 0.0),
]


def factor_oracle(inv, tau):
    """Numerically minimized log factor of one investment at target tau."""
    s, sigma2, t = inv.spread, inv.sigma ** 2, inv.mu - tau
    upper = max(10.0 * lambda_star_single(s, sigma2, t), 1.0)
    result = minimize_scalar(
        lambda lam: mgf_majorant_log(s, sigma2, lam) - lam * t,
        bounds=(0.0, upper),
        method='bounded',
        options={'xatol': 1e-12},
    )
    return result.fun


def multiplier_oracle(inv, tau):
    """Root of the factor's slope, d/dlambda of the log-majorant minus t, found by bracketing."""
    s, q, t = inv.spread, (inv.sigma / inv.spread) ** 2, inv.mu - tau

    def slope_gap(lam):
        u = lam * s
        return q * s * math.expm1(u) / (q * (math.expm1(u) - u) + 1.0) - t

    upper = 1.0 / s
    while slope_gap(upper) < 0:
        upper *= 2.0
    return brentq(slope_gap, 0.0, upper, xtol=1e-15, rtol=1e-14)


class InvestmentTests(SimpleTestCase):

    def test_invariants(self):
        with self.assertRaises(InvalidSpecError):
            Investment('x', 1.0, 0.0, 0.0)
        with self.assertRaises(InvalidSpecError):
            Investment('x', 1.0, 1.0, 2.0)
        with self.assertRaises(InvalidSpecError):
            Investment('', 1.0, 1.0, 0.0)
        with self.assertRaises(InvalidSpecError):
            Investment('x', math.inf, 1.0, 0.0)

    def test_as_variable(self):
        spec = TOY[1].as_variable()
        self.assertEqual(spec, VariableSpec(100.0, 20.0, 5.0, BoundSide.FLOOR))
        self.assertEqual(TOY[1].spread, 95.0)


class UnderperformanceTests(SimpleTestCase):

    def test_toy_portfolio_percentages(self):
        expected = {
            Method.REFINED: 0.391,
            Method.BENNETT: 0.501,
            Method.BERNSTEIN: 0.572,
            Method.HOEFFDING: 0.581,
        }
        for method, probability in expected.items():
            with self.subTest(method=method):
                result = underperformance_bound(TOY, 74.0, method)
                self.assertAlmostEqual(result.probability, probability, delta=0.005)
                self.assertIs(result.method, method)

    def test_refined_is_tightest_on_toy_portfolio(self):
        probabilities = [underperformance_bound(TOY, 74.0, m).probability for m in Method.values]
        self.assertEqual(min(probabilities), underperformance_bound(TOY, 74.0, Method.REFINED).probability)

    def test_matches_lower_tail_on_the_average(self):
        variables = [inv.as_variable() for inv in TOY]
        self.assertEqual(underperformance_bound(TOY, 74.0, Method.REFINED), refined_lower(variables, 28.0))
        self.assertEqual(underperformance_bound(TOY, 74.0, 'bennett'), lower_tail(Method.BENNETT, variables, 28.0))

    def test_imputed_ranges(self):
        variables = [inv.as_variable() for inv in TOY]
        self.assertEqual(imputed_ranges(variables), [RangeSpec(25.0, 75.0), RangeSpec(5.0, 100.0)])
        ceiling = VariableSpec(0.0, 0.5, 1.0, BoundSide.CEILING)
        self.assertEqual(imputed_ranges([ceiling]), [RangeSpec(0.0, 1.0)])
        ceiling = VariableSpec(0.0, 0.1, 1.0, BoundSide.CEILING)
        self.assertEqual(imputed_ranges([ceiling]), [RangeSpec(0.0, 1.0)])

    def test_threshold_interval(self):
        self.assertEqual(threshold_interval(TOY), (30.0, 130.0))

    def test_threshold_just_inside_the_domain(self):
        result = underperformance_bound(TOY, 30.0 + 1e-6, Method.REFINED)
        self.assertGreater(result.probability, 0.0)
        self.assertLessEqual(result.probability, 1.0)

    def test_threshold_out_of_domain(self):
        for threshold in (30.0, 10.0):
            with self.assertRaises(DomainError) as ctx:
                underperformance_bound(TOY, threshold, Method.REFINED)
            self.assertEqual(ctx.exception.interval, (30.0, 130.0))
        with self.assertRaises(DomainError) as ctx:
            underperformance_bound(TOY, 130.0, Method.BENNETT)
        self.assertIn('130', str(ctx.exception))
        with self.assertRaises(DomainError):
            underperformance_bound([], 1.0, Method.BENNETT)


class AllocationLambdaTests(SimpleTestCase):

    def test_value(self):
        inv = Investment('x', 1.0, 1.0, 0.0)
        self.assertAlmostEqual(allocation_lambda(inv, 0.5), 2 - 1.5571455989976113, places=12)

    def test_equivalence_and_sign(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            floor = float(rng.normal())
            mu = floor + float(rng.uniform(0.01, 5))
            sigma = float(rng.uniform(0.01, 3))
            tau = floor + float(rng.uniform(0.01, 0.99)) * (mu - floor)
            inv = Investment('x', mu, sigma, floor)
            lam = allocation_lambda(inv, tau)
            self.assertGreaterEqual(lam, 0.0)
            expected = lambda_star_single(mu - floor, sigma ** 2, mu - tau)
            self.assertAlmostEqual(lam, expected, delta=1e-12 * max(abs(expected), 1e-300))

    def test_out_of_range(self):
        inv = Investment('x', 1.0, 1.0, 0.0)
        for tau in (0.0, 1.0, -1.0, 2.0):
            with self.assertRaises(DomainError) as ctx:
                allocation_lambda(inv, tau)
            self.assertEqual(ctx.exception.interval, (0.0, 1.0))


class AllocateTests(SimpleTestCase):

    def test_identical_investments_split_evenly(self):
        twins = [Investment('a', 1.0, 0.4, 0.0), Investment('b', 1.0, 0.4, 0.0)]
        for tau in (0.1, 0.5, 0.9):
            self.assertEqual(allocate(twins, tau).weights, (0.5, 0.5))

    def test_single_investment_gets_everything(self):
        result = allocate([Investment('a', 1.0, 0.4, 0.0)], 0.3)
        self.assertEqual(result.weights, (1.0,))

    def test_single_investment_matches_refined_lower(self):
        rng = np.random.default_rng(9)
        for _ in range(1000):
            floor = float(rng.normal())
            mu = floor + float(rng.uniform(0.01, 5))
            inv = Investment('x', mu, float(rng.uniform(0.01, 3)), floor)
            tau = floor + float(rng.uniform(0.01, 0.99)) * inv.spread
            result = allocate([inv], tau)
            expected = refined_lower([inv.as_variable()], mu - tau)
            self.assertAlmostEqual(result.phi_bound, expected.probability, delta=1e-12 * expected.probability)
            self.assertAlmostEqual(result.lambdas[0], expected.lambda_, delta=1e-12 * expected.lambda_)

    def test_budget_scaling(self):
        base = allocate(THREE_ASSETS, 0.12)
        c = 7.5
        scaled = allocate([Investment(i.name, c * i.mu, c * i.sigma, c * i.floor) for i in THREE_ASSETS], c * 0.12)
        for left, right in zip(base.weights, scaled.weights):
            self.assertAlmostEqual(left, right, delta=1e-10)
        self.assertAlmostEqual(base.phi_bound, scaled.phi_bound, delta=1e-10)
        for left, right in zip(base.lambdas, scaled.lambdas):
            self.assertAlmostEqual(left / c, right, delta=1e-10 * left)

    def test_each_factor_is_minimized(self):
        for tau in (0.02, 0.12, 0.2):
            result = allocate(THREE_ASSETS, tau)
            oracle = math.fsum(factor_oracle(inv, tau) for inv in THREE_ASSETS)
            self.assertLessEqual(result.log_phi, oracle + 1e-12)
            self.assertAlmostEqual(result.log_phi, oracle, delta=1e-9)

    def test_out_of_range_names_the_interval(self):
        with self.assertRaises(DomainError) as ctx:
            allocate(THREE_ASSETS, 0.3)
        self.assertEqual(ctx.exception.interval, (0.0, 0.24))
        self.assertIn('0.24', str(ctx.exception))


class SweepTests(SimpleTestCase):

    def assertValidAllocation(self, result, n):
        self.assertIsInstance(result, AllocationResult)
        self.assertEqual(len(result.weights), n)
        self.assertAlmostEqual(math.fsum(result.weights), 1.0, delta=1e-12)
        self.assertTrue(all(w >= 0 for w in result.weights))
        self.assertGreaterEqual(result.phi_bound, 0.0)
        self.assertLessEqual(result.phi_bound, 1.0)
        self.assertTrue(math.isfinite(result.log_phi))

    def test_tau_grid(self):
        self.assertEqual(tau_interval(THREE_ASSETS), (0.0, 0.24))
        grid = tau_grid(THREE_ASSETS, 4)
        for value, expected in zip(grid, (0.03, 0.09, 0.15, 0.21)):
            self.assertAlmostEqual(value, expected, places=15)
        with self.assertRaises(DomainError):
            tau_grid(THREE_ASSETS, 0)

    def test_tau_from_deviation(self):
        self.assertAlmostEqual(tau_from_deviation(THREE_ASSETS, 0.1), 0.14, places=15)
        with self.assertRaises(DomainError) as ctx:
            tau_from_deviation(THREE_ASSETS, 0.3)
        self.assertEqual(ctx.exception.interval, (0.0, 0.24))

    def test_three_asset_sweep(self):
        results = allocation_sweep(THREE_ASSETS, tau_grid(THREE_ASSETS, 100))
        self.assertEqual(len(results), 100)
        for result in results:
            self.assertValidAllocation(result, 3)
        self.assertEqual([r.tau for r in results], tau_grid(THREE_ASSETS, 100))

    def test_three_asset_rows(self):
        results = allocation_sweep(THREE_ASSETS, [0.04, 0.08, 0.12, 0.16, 0.20])
        for result in results:
            lambdas = [multiplier_oracle(inv, result.tau) for inv in THREE_ASSETS]
            for weight, lam in zip(result.weights, lambdas):
                self.assertAlmostEqual(weight, lam / math.fsum(lambdas), delta=1e-9)
            oracle = math.fsum(
                mgf_majorant_log(inv.spread, inv.sigma ** 2, lam) - lam * (inv.mu - result.tau)
                for inv, lam in zip(THREE_ASSETS, lambdas)
            )
            self.assertAlmostEqual(result.log_phi, oracle, delta=1e-12)
        middle = results[2]
        for weight, expected in zip(middle.weights, (0.6515, 0.1203, 0.2282)):
            self.assertAlmostEqual(weight, expected, delta=2e-3)
        self.assertAlmostEqual(middle.phi_bound, 0.6453, delta=2e-3)
        self.assertEqual([r.phi_bound for r in results], sorted(r.phi_bound for r in results))

    def test_four_asset_sweep(self):
        results = allocation_sweep(FOUR_ASSETS, tau_grid(FOUR_ASSETS, 50))
        self.assertEqual(len(results), 50)
        for result in results:
            self.assertValidAllocation(result, 4)

    def test_higher_targets_are_riskier(self):
        phis = [r.phi_bound for r in allocation_sweep(THREE_ASSETS, tau_grid(THREE_ASSETS, 20))]
        self.assertEqual(phis, sorted(phis))

    def test_empty_grid(self):
        self.assertEqual(allocation_sweep(THREE_ASSETS, []), [])

    def test_bad_point_does_not_abort_the_sweep(self):
        results = allocation_sweep(THREE_ASSETS, [0.1, 0.5, 0.2])
        self.assertIsInstance(results[0], AllocationResult)
        self.assertIsInstance(results[1], PointFailure)
        self.assertEqual(results[1].index, 1)
        self.assertEqual(results[1].value, 0.5)
        self.assertIsInstance(results[2], AllocationResult)

    def test_parallel_sweep_matches_sequential(self):
        grid = tau_grid(FOUR_ASSETS, 10) + [1.0]
        self.assertEqual(parallel_allocation_sweep(FOUR_ASSETS, grid), allocation_sweep(FOUR_ASSETS, grid))
        self.assertEqual(parallel_allocation_sweep(FOUR_ASSETS, []), [])


class SerializerTests(SimpleTestCase):

    def test_investment_row(self):
        serializer = InvestmentSerializer(data={'name': 'bond', 'mu': '30', 'sigma': '25', 'floor': '25'})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save(), TOY[0])

    def test_investment_errors_name_the_column(self):
        cases = [
            ({'name': 'x', 'mu': '1', 'sigma': '0', 'floor': '0'}, 'sigma'),
            ({'name': 'x', 'mu': '1', 'sigma': '1', 'floor': '2'}, 'floor'),
            ({'name': '', 'mu': '1', 'sigma': '1', 'floor': '0'}, 'name'),
            ({'name': 'x', 'mu': 'one', 'sigma': '1', 'floor': '0'}, 'mu'),
        ]
        for data, column in cases:
            serializer = InvestmentSerializer(data=data)
            self.assertFalse(serializer.is_valid())
            self.assertIn(column, serializer.errors)

    def test_allocation_result_representation(self):
        result = allocate(THREE_ASSETS, 0.1)
        data = AllocationResultSerializer(result).data
        self.assertEqual(data['alpha'], list(result.weights))
        self.assertEqual(data['lambda'], list(result.lambdas))
        parsed = AllocationResultSerializer(data=dict(data))
        self.assertTrue(parsed.is_valid(), parsed.errors)
        self.assertEqual(parsed.save(), result)
