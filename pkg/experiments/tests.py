import math

import numpy as np
from django.test import SimpleTestCase

from bounds.domain import BoundSide, Method, PointFailure, VariableSpec
from bounds.exceptions import DomainError, ExperimentError, InvalidSpecError
from bounds.refined import RefinedContext, b_lambda_log, lambda_star_combined, refined_upper

from .domain import ExperimentRecord, ValidationOutcome
from .protocols import (
    design_points,
    draw_instance,
    heterogeneous_grid,
    heterogeneous_trials,
    homogeneous_sweep,
    run_heterogeneous_trial,
    validate_bounds,
    win_rates,
)
from .sampling import STREAM_DESIGN, STREAM_INSTANCE, derive_trial_seed, make_rng, make_two_point, monte_carlo_tail
from .serializers import ExperimentRecordSerializer, ValidationOutcomeSerializer
from .tasks import parallel_heterogeneous_trials

SLACK = 1e-10


def log_bounds(hoeffding, bennett, bernstein, refined):
    return {
        Method.HOEFFDING: hoeffding,
        Method.BENNETT: bennett,
        Method.BERNSTEIN: bernstein,
        Method.REFINED: refined,
    }


class TwoPointTests(SimpleTestCase):

    def test_symmetric_case(self):
        law = make_two_point(0.0, 1.0, 1.0)
        self.assertEqual((law.hi, law.lo, law.p_hi), (1.0, -1.0, 0.5))

    def test_asymmetric_case(self):
        law = make_two_point(0.0, 0.5, 1.0)
        self.assertEqual(law.hi, 1.0)
        self.assertAlmostEqual(law.lo, -0.25, places=15)
        self.assertAlmostEqual(law.p_hi, 0.2, places=15)
        self.assertAlmostEqual(law.mean, 0.0, places=15)
        self.assertAlmostEqual(law.variance, 0.25, places=15)

    def test_moments_match_the_inputs(self):
        rng = np.random.default_rng(21)
        for _ in range(1000):
            mu = float(rng.normal(scale=10))
            sigma = float(rng.uniform(0.01, 5))
            ceiling = mu + float(rng.uniform(0.01, 5))
            law = make_two_point(mu, sigma, ceiling)
            self.assertAlmostEqual(law.mean, mu, delta=1e-12 * max(1.0, abs(mu), ceiling - mu))
            self.assertAlmostEqual(law.variance / sigma ** 2, 1.0, delta=1e-12)

    def test_lopsided_masses_keep_their_moments(self):
        for mu, sigma, ceiling in ((25.0, 5.0, 25.01), (-30.0, 1e-4, 10.0), (1e3, 1e4, 1e3 + 1e-3)):
            law = make_two_point(mu, sigma, ceiling)
            self.assertAlmostEqual(law.p_hi + law.p_lo, 1.0, places=15)
            self.assertAlmostEqual(law.variance / sigma ** 2, 1.0, delta=1e-14)
            self.assertAlmostEqual(law.mean, mu, delta=1e-13 * max(abs(mu), ceiling - mu))

    def test_invalid(self):
        with self.assertRaises(InvalidSpecError):
            make_two_point(0.0, 0.0, 1.0)
        with self.assertRaises(InvalidSpecError):
            make_two_point(1.0, 1.0, 1.0)


class SeedTests(SimpleTestCase):

    def test_derived_seeds(self):
        first = derive_trial_seed(42, 0)
        self.assertEqual(first, derive_trial_seed(42, 0))
        self.assertTrue(0 <= first < 2 ** 64)
        self.assertNotEqual(first, derive_trial_seed(42, 1))
        self.assertNotEqual(first, derive_trial_seed(43, 0))
        self.assertNotEqual(derive_trial_seed(42, 5, STREAM_INSTANCE), derive_trial_seed(42, 5, STREAM_DESIGN))


class MonteCarloTests(SimpleTestCase):

    def test_symmetric_single_variable(self):
        variables = [VariableSpec(0.0, 1.0, 1.0, BoundSide.CEILING)]
        estimate, std_error = monte_carlo_tail(variables, 0.5, 20000, seed=3)
        self.assertLess(abs(estimate - 0.5), 3 * std_error)
        self.assertAlmostEqual(std_error, math.sqrt(estimate * (1 - estimate) / 20000), places=15)

    def test_impossible_deviation(self):
        variables = [VariableSpec(0.0, 0.5, 1.0, BoundSide.CEILING), VariableSpec(1.0, 0.2, 3.0, BoundSide.CEILING)]
        self.assertEqual(monte_carlo_tail(variables, 2.0, 5000, seed=3), (0.0, 0.0))

    def test_tiny_deviation(self):
        variables = [VariableSpec(0.0, 0.5, 1.0, BoundSide.CEILING)] * 3
        estimate, _ = monte_carlo_tail(variables, 1e-9, 5000, seed=3)
        self.assertGreater(estimate, 0.0)
        self.assertLess(estimate, 1.0)

    def test_deterministic(self):
        variables = [VariableSpec(0.0, 0.5, 1.0, BoundSide.CEILING)] * 4
        self.assertEqual(
            monte_carlo_tail(variables, 0.1, 3000, seed=9, instance_id=2),
            monte_carlo_tail(variables, 0.1, 3000, seed=9, instance_id=2),
        )

    def test_requires_enough_trials(self):
        with self.assertRaises(DomainError):
            monte_carlo_tail([VariableSpec(0.0, 1.0, 1.0, BoundSide.CEILING)], 0.5, 999, seed=1)

    def test_every_lambda_gives_a_valid_bound(self):
        rng = np.random.default_rng(31)
        for instance_id in range(30):
            variables, _, t = draw_instance(int(rng.integers(1, 6)), 2.0, make_rng(instance_id))
            ctx = RefinedContext.build([v.spread for v in variables], [v.variance for v in variables], t)
            lam = float(rng.uniform(0, 3)) * lambda_star_combined(ctx)
            estimate, std_error = monte_carlo_tail(variables, t, 20000, seed=5, instance_id=instance_id)
            self.assertLessEqual(estimate, math.exp(min(0.0, b_lambda_log(ctx, lam))) + 3 * std_error)


class HomogeneousSweepTests(SimpleTestCase):

    def test_default_grid(self):
        records = homogeneous_sweep(0.0, 0.25)
        self.assertEqual(len(records), 200)
        self.assertAlmostEqual(records[0].t, 0.0025, places=15)
        self.assertAlmostEqual(records[-1].t, 0.9975, places=15)
        self.assertEqual({r.n for r in records}, {1})
        self.assertEqual(records[0].z, 4.0)

    def test_refined_curve_below_bennett(self):
        for mu in (-0.5, 0.0, 0.5):
            for sigma in (1.0, 0.5, 0.25, 0.125):
                for record in homogeneous_sweep(mu, sigma):
                    bounds = record.log_bounds
                    self.assertLessEqual(bounds[Method.REFINED], bounds[Method.BENNETT] + SLACK)
                    self.assertLessEqual(bounds[Method.BENNETT], bounds[Method.BERNSTEIN] + SLACK)

    def test_refined_curve_matches_the_general_bound(self):
        for record in homogeneous_sweep(0.2, 0.3, points=25):
            general = refined_upper([VariableSpec(0.2, 0.3, 1.0, BoundSide.CEILING)], record.t)
            self.assertAlmostEqual(
                record.log_bounds[Method.REFINED], general.log_probability,
                delta=1e-12 * max(1.0, abs(general.log_probability)),
            )

    def test_hoeffding_value(self):
        [record] = homogeneous_sweep(0.0, 1.0, t_grid=[0.5])
        self.assertAlmostEqual(record.log_bounds[Method.HOEFFDING], -0.125, places=15)

    def test_small_deviation_gives_trivial_bounds(self):
        [record] = homogeneous_sweep(0.0, 0.5, t_grid=[1e-6])
        for value in record.log_bounds.values():
            self.assertGreater(value, -1e-9)
            self.assertLessEqual(value, 0.0)

    def test_bad_grid_point(self):
        records = homogeneous_sweep(0.5, 0.5, t_grid=[0.25, 0.5, 0.75])
        self.assertIsInstance(records[0], ExperimentRecord)
        self.assertIsInstance(records[1], PointFailure)
        self.assertIsInstance(records[2], PointFailure)
        self.assertEqual(records[2].index, 2)

    def test_invalid_design(self):
        with self.assertRaises(DomainError):
            homogeneous_sweep(0.0, 1.5)
        with self.assertRaises(DomainError):
            homogeneous_sweep(1.0, 0.5)
        with self.assertRaises(DomainError):
            homogeneous_sweep(0.0, 0.5, points=0)


class HeterogeneousTrialTests(SimpleTestCase):

    def test_single_variable_dominance(self):
        for z in (1.0, 2.0, 10.0, 100.0):
            for record in heterogeneous_trials(1, z, 200, seed=11):
                bounds = record.log_bounds
                self.assertLessEqual(bounds[Method.REFINED], bounds[Method.BENNETT] + SLACK)
                self.assertLessEqual(bounds[Method.BENNETT], bounds[Method.BERNSTEIN] + SLACK)

    def test_deterministic(self):
        first = heterogeneous_trials(10, 2.0, 20, seed=7)
        second = heterogeneous_trials(10, 2.0, 20, seed=7)
        self.assertEqual(first, second)
        self.assertEqual([r.variables for r in first], [r.variables for r in second])
        self.assertNotEqual(first, heterogeneous_trials(10, 2.0, 20, seed=8))

    def test_instances_can_be_regenerated_alone(self):
        records = heterogeneous_trials(5, 10.0, 6, seed=7)
        self.assertEqual(run_heterogeneous_trial(5, 10.0, 7, 4), records[4])
        self.assertEqual(records[4].seed, derive_trial_seed(7, 4))

    def test_instances_respect_the_elementary_inequality(self):
        for record in heterogeneous_trials(10, 1.0, 50, seed=13):
            self.assertEqual(len(record.variables), 10)
            self.assertGreater(record.t, 0.0)
            self.assertLess(record.t, math.fsum(v.spread for v in record.variables) / 10)
            for spec, bounds in zip(record.variables, record.ranges):
                self.assertGreater(spec.sigma, 0.0)
                self.assertLessEqual(spec.sigma, (bounds.hi - bounds.lo) / 2)
                self.assertLessEqual(bounds.lo, spec.mu)
                self.assertLess(spec.mu, bounds.hi)
                self.assertEqual(spec.bound_value, bounds.hi)

    def test_invalid_design(self):
        with self.assertRaises(DomainError):
            heterogeneous_trials(0, 1.0, 5, seed=1)
        with self.assertRaises(DomainError):
            heterogeneous_trials(1, 0.5, 5, seed=1)
        with self.assertRaises(DomainError):
            heterogeneous_trials(1, 1.0, 0, seed=1)

    def test_rejection_cap(self):
        class ZeroRng:
            def standard_normal(self, n):
                return np.zeros(n)

            def uniform(self, low=0.0, high=1.0):
                return np.zeros_like(np.asarray(high, dtype=float))

        with self.assertRaises(ExperimentError):
            draw_instance(3, 1.0, ZeroRng(), max_rejections=5)

    def test_grid_ids_are_unique(self):
        records = heterogeneous_grid(trials=2, seed=1)
        self.assertEqual(len(records), 24)
        self.assertEqual([r.instance_id for r in records], list(range(24)))
        self.assertEqual({(r.n, r.z) for r in records}, {(n, z) for n, z, _ in design_points(trials=2)})
        self.assertEqual({r.n for r in records}, {1, 10, 100})

    def test_win_rates(self):
        records = [
            ExperimentRecord(0, 1, 1.0, 0.1, log_bounds(-1.0, -2.0, -1.5, -3.0), 1),
            ExperimentRecord(1, 1, 1.0, 0.1, log_bounds(-4.0, -2.0, -1.5, -3.0), 2),
        ]
        rates = win_rates(records)
        self.assertEqual(rates, {Method.HOEFFDING: 0.5, Method.BENNETT: 1.0, Method.BERNSTEIN: 1.0})
        with self.assertRaises(DomainError):
            win_rates([])

    def test_measured_win_rates_are_fractions(self):
        rates = win_rates(heterogeneous_trials(10, 100.0, 100, seed=3))
        for value in rates.values():
            self.assertGreaterEqual(value, 0.0)
            self.assertLessEqual(value, 1.0)

    def test_parallel_matches_sequential(self):
        sequential = heterogeneous_trials(4, 2.0, 8, seed=5, first_id=100)
        designs = [(4, 2.0, 100 + k) for k in range(8)]
        self.assertEqual(parallel_heterogeneous_trials(designs, seed=5), sequential)
        self.assertEqual(parallel_heterogeneous_trials([], seed=5), [])


class ExperimentRecordTests(SimpleTestCase):

    def test_invariants(self):
        with self.assertRaises(InvalidSpecError):
            ExperimentRecord(0, 1, 1.0, 0.1, {Method.BENNETT: -1.0}, 1)
        with self.assertRaises(InvalidSpecError):
            ExperimentRecord(0, 1, 1.0, 0.1, log_bounds(0.5, -1.0, -1.0, -1.0), 1)
        with self.assertRaises(InvalidSpecError):
            ExperimentRecord(0, 1, 1.0, 0.1, log_bounds(-0.5, -1.0, -1.0, -1.0), 2 ** 64)

    def test_string_keys_are_normalized(self):
        record = ExperimentRecord(0, 1, 1.0, 0.1, {m.value: -1.0 for m in Method}, 1)
        self.assertEqual(set(record.log_bounds), set(Method))

    def test_serializer_round_trip(self):
        record = heterogeneous_trials(3, 2.0, 1, seed=4)[0]
        data = ExperimentRecordSerializer(record).data
        self.assertEqual(
            list(data),
            ['instance_id', 'n', 'z', 't', 'seed', 'log_hoeffding', 'log_bennett', 'log_bernstein', 'log_refined'],
        )
        parsed = ExperimentRecordSerializer(data=dict(data))
        self.assertTrue(parsed.is_valid(), parsed.errors)
        self.assertEqual(parsed.save(), record)


class ValidationTests(SimpleTestCase):

    def test_three_sigma_rule(self):
        outcome = ValidationOutcome(0, 1, 1.0, 0.1, Method.BENNETT, bound=0.1, estimate=0.2, std_error=0.01)
        self.assertTrue(outcome.violated)
        outcome = ValidationOutcome(0, 1, 1.0, 0.1, Method.BENNETT, bound=0.1, estimate=0.12, std_error=0.01)
        self.assertFalse(outcome.violated)
        outcome = ValidationOutcome(0, 1, 1.0, 0.1, Method.HOEFFDING, 0.1, 0.2, 0.01, applicable=False)
        self.assertFalse(outcome.violated)

    def test_no_violations(self):
        report = validate_bounds(instances=25, trials=20000, seed=7, max_n=10)
        self.assertEqual(report.violations, [])
        self.assertEqual(report.summary(), '0 violations')
        self.assertEqual(len(report.outcomes), 100)
        self.assertEqual(report.instances, 25)
        self.assertGreaterEqual(report.checked, 75)
        for outcome in report.outcomes:
            self.assertTrue(1 <= outcome.n <= 10)
            self.assertIn(outcome.z, (1.0, 2.0, 10.0, 100.0))

    def test_full_size_run_has_no_violations(self):
        report = validate_bounds(instances=100, trials=100000, seed=7, max_n=10)
        self.assertEqual(report.violations, [])
        self.assertEqual(len(report.outcomes), 400)
        self.assertEqual(report.summary(), '0 violations')

    def test_deterministic(self):
        self.assertEqual(
            validate_bounds(instances=3, trials=2000, seed=1),
            validate_bounds(instances=3, trials=2000, seed=1),
        )

    def test_invalid_arguments(self):
        with self.assertRaises(DomainError):
            validate_bounds(instances=0, trials=2000, seed=1)
        with self.assertRaises(DomainError):
            validate_bounds(instances=2, trials=10, seed=1)

    def test_outcome_serializer(self):
        outcome = validate_bounds(instances=1, trials=2000, seed=2).outcomes[0]
        data = ValidationOutcomeSerializer(outcome).data
        self.assertFalse(data['violated'])
        parsed = ValidationOutcomeSerializer(data=dict(data))
        self.assertTrue(parsed.is_valid(), parsed.errors)
        self.assertEqual(parsed.save(), outcome)
