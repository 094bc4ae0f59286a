import csv
import io
import json
import math
import tempfile
from pathlib import Path

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from bounds.classical import bennett_upper, bernstein_upper
from bounds.domain import Method
from bounds.exceptions import DomainError
from bounds.serializers import BoundResultSerializer
from experiments.protocols import heterogeneous_grid, validate_bounds
from experiments.serializers import ExperimentRecordSerializer, ValidationOutcomeSerializer
from portfolio.allocation import allocation_sweep, tau_grid
from portfolio.domain import Investment
from portfolio.serializers import AllocationResultSerializer

from .config import EXIT_DOMAIN, EXIT_IO, EXIT_PARSE, OutputFormat, RunConfig, exit_codes, parse_seed
from .exceptions import InputParseError
from .formats import flatten_row, read_investments, read_records, read_variables, unflatten_row

DATA = Path(settings.BASE_DIR) / 'data'
TOY_PORTFOLIO = str(DATA / 'toy_portfolio.csv')
TOY_VARIABLES = str(DATA / 'toy_floor_variables.csv')
THREE_ASSETS = str(DATA / 'three_assets.csv')
IDENTICAL = str(DATA / 'identical_assets.csv')

# Published percentages for the toy portfolio against a total threshold of 74.
QUOTED = {
    Method.HOEFFDING: 0.581,
    Method.BENNETT: 0.501,
    Method.BERNSTEIN: 0.572,
    Method.REFINED: 0.391,
}


def run(*args, **options):
    stdout, stderr = io.StringIO(), io.StringIO()
    call_command(*args, stdout=stdout, stderr=stderr, **options)
    return stdout.getvalue(), stderr.getvalue()


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class CommandTestCase(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.tmp_path = Path(self.tmp.name)

    def write_file(self, name, text):
        path = self.tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)

    def assertExitCode(self, code, *args, **options):
        with self.assertRaises(CommandError) as ctx:
            run(*args, **options)
        self.assertEqual(ctx.exception.returncode, code)
        return str(ctx.exception)

    def assertQuotedPercentages(self, rows):
        self.assertEqual([row['method'] for row in rows], Method.values)
        for row in rows:
            self.assertAlmostEqual(float(row['probability']), QUOTED[row['method']], delta=0.005)


class RunConfigTests(SimpleTestCase):

    def test_parse_seed(self):
        self.assertEqual(parse_seed('42'), 42)
        self.assertEqual(parse_seed('0x2A'), 42)
        self.assertEqual(parse_seed(' 7 '), 7)
        self.assertEqual(parse_seed(2 ** 64 - 1), 2 ** 64 - 1)
        for bad in ('abc', '-1', str(2 ** 64), ''):
            with self.assertRaises(InputParseError):
                parse_seed(bad)

    def test_defaults_come_from_settings(self):
        config = RunConfig.from_options({})
        self.assertEqual(config.seed, 42)
        self.assertEqual(config.output_format, OutputFormat.TABLE)
        self.assertEqual(config.w_cfg.relative_tolerance, 1e-12)
        self.assertFalse(config.polish)

    @override_settings(BOUNDS_DEFAULT_SEED='0xff', BOUNDS_OUTPUT_FORMAT='json')
    def test_environment_overrides(self):
        config = RunConfig.from_options({})
        self.assertEqual(config.seed, 255)
        self.assertEqual(config.output_format, OutputFormat.JSON)
        self.assertEqual(RunConfig.from_options({'seed': '0'}).seed, 0)

    def test_invalid_options(self):
        with self.assertRaises(InputParseError):
            RunConfig.from_options({'format': 'xml'})
        with self.assertRaises(DomainError):
            RunConfig.from_options({'tolerance': -1.0})

    def test_exit_codes(self):
        for error, code in (
            (InputParseError('bad', line=3), EXIT_PARSE),
            (DomainError('out of range'), EXIT_DOMAIN),
            (FileNotFoundError('missing'), EXIT_IO),
        ):
            with self.assertRaises(CommandError) as ctx:
                with exit_codes():
                    raise error
            self.assertEqual(ctx.exception.returncode, code)


class FormatTests(CommandTestCase):

    def test_flatten_and_unflatten(self):
        row = {'tau': 0.5, 'alpha': [0.25, 0.75], 'lambda': [1.0, 3.0]}
        flat = flatten_row(row)
        self.assertEqual(list(flat), ['tau', 'alpha_1', 'alpha_2', 'lambda_1', 'lambda_2'])
        self.assertEqual(unflatten_row(flat, ['alpha', 'lambda']), row)

    def test_read_investments(self):
        investments = read_investments(TOY_PORTFOLIO)
        self.assertEqual(investments, [Investment('bond', 30.0, 25.0, 25.0), Investment('venture', 100.0, 20.0, 5.0)])

    def test_parse_errors_name_line_and_column(self):
        path = self.write_file('bad.csv', 'name,mu,sigma,floor\na,1,1,0\nb,2,oops,0\n')
        with self.assertRaises(InputParseError) as ctx:
            read_investments(path)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (3, 'sigma'))

        path = self.write_file('floor.csv', 'name,mu,sigma,floor\na,1,1,5\n')
        with self.assertRaises(InputParseError) as ctx:
            read_investments(path)
        self.assertEqual((ctx.exception.line, ctx.exception.column), (2, 'floor'))

    def test_short_and_long_rows(self):
        with self.assertRaises(InputParseError) as ctx:
            read_investments(self.write_file('short.csv', 'name,mu,sigma,floor\na,1,1\n'))
        self.assertEqual(ctx.exception.column, 'floor')
        with self.assertRaises(InputParseError) as ctx:
            read_investments(self.write_file('long.csv', 'name,mu,sigma,floor\na,1,1,0,9\n'))
        self.assertEqual(ctx.exception.line, 2)


class BoundCommandTests(CommandTestCase):

    def test_toy_lower_tail(self):
        stdout, _ = run('bound', TOY_VARIABLES, tail='lower', t=28.0, methods='all', format='csv')
        self.assertQuotedPercentages(csv_rows(stdout))

    def test_zero_deviation_is_trivial(self):
        stdout, _ = run('bound', TOY_VARIABLES, tail='lower', t=0.0, format='csv')
        for row in csv_rows(stdout):
            self.assertEqual(float(row['probability']), 1.0)
            self.assertEqual(float(row['log_probability']), 0.0)

    def test_method_subset(self):
        stdout, _ = run('bound', TOY_VARIABLES, tail='lower', t=28.0, methods='refined, bennett', format='json')
        rows = json.loads(stdout)
        self.assertEqual([row['method'] for row in rows], ['refined', 'bennett'])
        self.assertGreater(rows[0]['lambda'], 0.0)

    def test_table_output(self):
        stdout, _ = run('bound', TOY_VARIABLES, tail='lower', t=28.0, format='table')
        lines = stdout.splitlines()
        self.assertEqual(len(lines), 5)
        self.assertIn('probability', lines[0])

    def test_degenerate_results_read_back(self):
        path = self.write_file('constant.csv', 'mu,sigma,bound,side\n0,0,1,ceiling\n0.5,0,2,ceiling\n')
        variables = read_variables(path)
        expected = [bennett_upper(variables, 0.5), bernstein_upper(variables, 0.5)]
        for suffix in ('csv', 'json'):
            out = str(self.tmp_path / f"degenerate.{suffix}")
            run('bound', path, t=0.5, methods='bennett,bernstein', format=suffix, out=out)
            results = read_records(out, BoundResultSerializer)
            self.assertEqual(results, expected)
            self.assertTrue(all(result.degenerate for result in results))
            self.assertEqual(results[0].log_probability, -math.inf)

    def test_malformed_row(self):
        path = self.write_file('bad.csv', 'mu,sigma,bound,side\n0,1,1,ceiling\n0,abc,1,ceiling\n')
        message = self.assertExitCode(EXIT_PARSE, 'bound', path, t=0.5)
        self.assertIn('line 3', message)
        self.assertIn('sigma', message)

    def test_bad_method(self):
        self.assertExitCode(EXIT_PARSE, 'bound', TOY_VARIABLES, tail='lower', t=1.0, methods='chebyshev')

    def test_domain_errors(self):
        message = self.assertExitCode(EXIT_DOMAIN, 'bound', TOY_VARIABLES, tail='lower', t=60.0)
        self.assertIn('admissible interval', message)
        self.assertExitCode(EXIT_DOMAIN, 'bound', TOY_VARIABLES, tail='upper', t=1.0)
        self.assertExitCode(EXIT_DOMAIN, 'bound', TOY_VARIABLES, tail='lower', t=-1.0)

    def test_missing_file(self):
        self.assertExitCode(EXIT_IO, 'bound', str(self.tmp_path / 'absent.csv'), t=1.0)


class PortfolioCommandTests(CommandTestCase):

    def test_assess_toy_portfolio(self):
        stdout, _ = run('portfolio', TOY_PORTFOLIO, assess_only=True, threshold_total=74.0, format='csv')
        self.assertQuotedPercentages(csv_rows(stdout))

    def test_assess_with_deviation(self):
        by_threshold, _ = run('portfolio', TOY_PORTFOLIO, assess_only=True, threshold_total=74.0, format='csv')
        by_deviation, _ = run('portfolio', TOY_PORTFOLIO, assess_only=True, t=28.0, format='csv')
        self.assertEqual(by_threshold, by_deviation)

    def test_assess_needs_a_threshold(self):
        self.assertExitCode(EXIT_PARSE, 'portfolio', TOY_PORTFOLIO, assess_only=True, tau=27.0)

    def test_three_asset_sweep(self):
        stdout, _ = run('portfolio', THREE_ASSETS, sweep=100, format='csv')
        rows = csv_rows(stdout)
        self.assertEqual(len(rows), 100)
        self.assertEqual(
            list(rows[0])[:5],
            ['tau', 'alpha_1', 'alpha_2', 'alpha_3', 'phi_bound'],
        )
        for row in rows:
            weights = [float(row[f"alpha_{k}"]) for k in (1, 2, 3)]
            self.assertAlmostEqual(math.fsum(weights), 1.0, delta=1e-12)
            self.assertTrue(0.0 <= float(row['phi_bound']) <= 1.0)

    def test_sweep_round_trip(self):
        out = str(self.tmp_path / 'sweep.csv')
        run('portfolio', THREE_ASSETS, sweep=20, format='csv', out=out)
        investments = read_investments(THREE_ASSETS)
        expected = allocation_sweep(investments, tau_grid(investments, 20))
        self.assertEqual(read_records(out, AllocationResultSerializer), expected)

    def test_parallel_sweep_matches_sequential(self):
        sequential, _ = run('portfolio', THREE_ASSETS, sweep=10, format='json')
        parallel, _ = run('portfolio', THREE_ASSETS, sweep=10, format='json', parallel=True)
        self.assertEqual(parallel, sequential)

    def test_identical_assets_split_evenly(self):
        for tau in (3.0, 6.0, 9.5):
            stdout, _ = run('portfolio', IDENTICAL, tau=tau, format='json')
            [row] = json.loads(stdout)
            self.assertEqual(row['alpha_1'], 0.5)
            self.assertEqual(row['alpha_2'], 0.5)

    def test_target_forms(self):
        by_tau, _ = run('portfolio', IDENTICAL, tau=6.0, format='json')
        by_threshold, _ = run('portfolio', IDENTICAL, threshold_total=12.0, format='json')
        by_deviation, _ = run('portfolio', IDENTICAL, t=4.0, format='json')
        self.assertEqual(by_tau, by_threshold)
        self.assertEqual(by_tau, by_deviation)

    def test_target_out_of_range(self):
        message = self.assertExitCode(EXIT_DOMAIN, 'portfolio', TOY_PORTFOLIO, tau=40.0)
        self.assertIn('(25.0, 30.0)', message)
        self.assertExitCode(EXIT_DOMAIN, 'portfolio', TOY_PORTFOLIO, t=5.0)

    def test_missing_target(self):
        self.assertExitCode(EXIT_PARSE, 'portfolio', TOY_PORTFOLIO)
        self.assertExitCode(EXIT_PARSE, 'portfolio', THREE_ASSETS, sweep=10, tau=0.1)


class ExperimentCommandTests(CommandTestCase):

    def test_homogeneous_curve(self):
        stdout, stderr = run('experiment', 'homogeneous', mu=0.0, sigma=0.25, format='csv')
        rows = csv_rows(stdout)
        self.assertEqual(len(rows), 200)
        self.assertEqual(
            [column for column in rows[0] if column.startswith('log_')],
            ['log_hoeffding', 'log_bennett', 'log_bernstein', 'log_refined'],
        )
        self.assertIn('200 homogeneous records', stderr)

    def test_heterogeneous_is_deterministic(self):
        first, second = str(self.tmp_path / 'first.csv'), str(self.tmp_path / 'second.csv')
        options = {'n': [10], 'z': [2.0], 'trials': 30, 'seed': '7', 'format': 'csv'}
        stdout, _ = run('experiment', 'heterogeneous', out=first, **options)
        run('experiment', 'heterogeneous', out=second, **options)
        self.assertEqual(Path(first).read_bytes(), Path(second).read_bytes())
        self.assertIn('refined wins', stdout)

        expected = heterogeneous_grid([10], [2.0], 30, seed=7)
        self.assertEqual(read_records(first, ExperimentRecordSerializer), expected)

    def test_parallel_heterogeneous_matches_sequential(self):
        options = {'n': [1, 5], 'z': [1.0, 10.0], 'trials': 4, 'seed': '0x10', 'format': 'json'}
        sequential, _ = run('experiment', 'heterogeneous', **options)
        parallel, _ = run('experiment', 'heterogeneous', parallel=True, **options)
        self.assertEqual(parallel, sequential)
        self.assertEqual(len(json.loads(sequential)), 16)

    def test_validate(self):
        out = str(self.tmp_path / 'validation.json')
        stdout, _ = run('experiment', 'validate', instances=4, trials=5000, seed='3', format='json', out=out)
        self.assertIn('0 violations', stdout)
        expected = validate_bounds(instances=4, trials=5000, seed=3)
        self.assertEqual(read_records(out, ValidationOutcomeSerializer), list(expected.outcomes))

    def test_unwritable_output(self):
        out = str(self.tmp_path / 'missing' / 'records.csv')
        self.assertExitCode(EXIT_IO, 'experiment', 'homogeneous', points=5, out=out)

    def test_bad_parameters(self):
        self.assertExitCode(EXIT_PARSE, 'experiment', 'heterogeneous', seed='seven', trials=1)
        self.assertExitCode(EXIT_DOMAIN, 'experiment', 'homogeneous', sigma=2.0)
        self.assertExitCode(EXIT_DOMAIN, 'experiment', 'validate', instances=1, trials=10)


class LambertWCommandTests(CommandTestCase):

    def test_values(self):
        stdout, _ = run('lambertw', 'direct', '1')
        self.assertEqual(stdout.splitlines()[0], '0.5671432904')
        stdout, _ = run('lambertw', 'exp', '1')
        self.assertEqual(stdout.splitlines()[0], '1.0000000000')
        stdout, _ = run('lambertw', 'exp', '100')
        self.assertTrue(stdout.startswith('95.4414'))
        self.assertTrue(stdout.splitlines()[1].startswith('residual'))

    def test_domain_error(self):
        self.assertExitCode(EXIT_DOMAIN, 'lambertw', 'direct', '-1')
