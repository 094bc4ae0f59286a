import logging
import math

from django.core.management.base import BaseCommand

from bounds.domain import Method, PointFailure
from bounds.serializers import BoundResultSerializer
from portfolio.allocation import allocate, allocation_sweep, tau_from_deviation, tau_grid
from portfolio.assessment import underperformance_bound
from portfolio.serializers import AllocationResultSerializer
from portfolio.tasks import parallel_allocation_sweep

from cli.config import RunConfig, add_output_arguments, add_solver_arguments, exit_codes
from cli.exceptions import InputParseError
from cli.formats import emit, read_investments

logger = logging.getLogger(__name__)


def total_threshold(investments, options):
    """Threshold on the total payoff for ``--assess-only``."""
    if options['threshold_total'] is not None:
        return options['threshold_total']
    if options['t'] is not None:
        return math.fsum(inv.mu for inv in investments) - len(investments) * options['t']
    raise InputParseError('--assess-only needs --threshold-total or --t', column='target')


def allocation_target(investments, options):
    """Per-unit-budget target tau from whichever of --tau, --threshold-total and --t was given."""
    if options['tau'] is not None:
        return options['tau']
    if options['threshold_total'] is not None:
        return options['threshold_total'] / len(investments)
    if options['t'] is not None:
        return tau_from_deviation(investments, options['t'])
    raise InputParseError('one of --tau, --threshold-total or --t is required', column='target')


class Command(BaseCommand):
    help = 'Assess the under-performance risk of a portfolio, or allocate a budget across it.'

    def add_arguments(self, parser):
        parser.add_argument('input_path', help='CSV with columns name,mu,sigma,floor')
        target = parser.add_mutually_exclusive_group()
        target.add_argument('--tau', type=float, help='Target payoff per unit of budget')
        target.add_argument('--threshold-total', type=float, help='Threshold on the total payoff')
        target.add_argument('--t', type=float, help='Deviation below the mean')
        parser.add_argument('--sweep', type=int, metavar='N', help='Allocate over an N-point grid of targets')
        parser.add_argument('--assess-only', action='store_true',
                            help='Bound Pr(total payoff <= threshold) with every method instead of allocating')
        parser.add_argument('--polish', action='store_true', help='Polish the refined multiplier numerically')
        parser.add_argument('--parallel', action='store_true', help='Fan sweep points out to Celery workers')
        add_output_arguments(parser)
        add_solver_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = RunConfig.from_options(options)
            investments = read_investments(options['input_path'])
            if options['assess_only']:
                data = self.assess(investments, options, config)
            elif options['sweep'] is not None:
                data = self.sweep(investments, options, config)
            else:
                result = allocate(investments, allocation_target(investments, options), config.w_cfg)
                data = [AllocationResultSerializer(result).data]
            emit(self.stdout, data, config.output_format, options['out'])

    def assess(self, investments, options, config):
        threshold = total_threshold(investments, options)
        results = [
            underperformance_bound(investments, threshold, method, polish=config.polish, w_cfg=config.w_cfg)
            for method in Method
        ]
        return BoundResultSerializer(results, many=True).data

    def sweep(self, investments, options, config):
        if any(options[key] is not None for key in ('tau', 'threshold_total', 't')):
            raise InputParseError('--sweep chooses its own targets', column='sweep')
        grid = tau_grid(investments, options['sweep'])
        if config.parallel:
            outcomes = parallel_allocation_sweep(investments, grid, config.w_cfg)
        else:
            outcomes = allocation_sweep(investments, grid, config.w_cfg)
        results = [outcome for outcome in outcomes if not isinstance(outcome, PointFailure)]
        if len(results) < len(outcomes):
            self.stderr.write(f"{len(outcomes) - len(results)} of {len(outcomes)} sweep points failed")
        logger.info(f"Allocated over {len(results)} targets")
        return AllocationResultSerializer(results, many=True).data
