import logging

from django.core.management.base import BaseCommand

from bounds.domain import PointFailure
from experiments.domain import ExperimentKind
from experiments.protocols import (
    DEFAULT_NS,
    DEFAULT_SWEEP_POINTS,
    DEFAULT_TRIALS,
    DEFAULT_ZS,
    design_points,
    heterogeneous_grid,
    homogeneous_sweep,
    validate_bounds,
    win_rates,
)
from experiments.serializers import ExperimentRecordSerializer, ValidationOutcomeSerializer
from experiments.tasks import parallel_heterogeneous_trials

from cli.config import RunConfig, add_output_arguments, add_solver_arguments, exit_codes
from cli.formats import emit

logger = logging.getLogger(__name__)

DEFAULT_VALIDATION_INSTANCES = 100
DEFAULT_VALIDATION_TRIALS = 100_000
DEFAULT_VALIDATION_MAX_N = 10


class Command(BaseCommand):
    help = 'Generate the synthetic comparison data, or check every bound against Monte Carlo estimates.'

    def add_arguments(self, parser):
        parser.add_argument('kind', choices=ExperimentKind.values)
        parser.add_argument('--mu', type=float, default=0.0, help='homogeneous: common mean')
        parser.add_argument('--sigma', type=float, default=0.25, help='homogeneous: common deviation')
        parser.add_argument('--points', type=int, default=DEFAULT_SWEEP_POINTS, help='homogeneous: grid size')
        parser.add_argument('--n', type=int, nargs='+', default=list(DEFAULT_NS), help='heterogeneous: sizes')
        parser.add_argument('--z', type=float, nargs='+', default=list(DEFAULT_ZS),
                            help='heterogeneous: variance-shrink factors')
        parser.add_argument('--trials', type=int, help='Instances per design, or Monte Carlo trials per instance')
        parser.add_argument('--instances', type=int, default=DEFAULT_VALIDATION_INSTANCES,
                            help='validate: number of random instances')
        parser.add_argument('--max-n', type=int, default=DEFAULT_VALIDATION_MAX_N, help='validate: largest n')
        parser.add_argument('--seed', help='Run seed, decimal or 0x hex (default: BOUNDS_SEED)')
        parser.add_argument('--max-rejections', type=int, help='Cap on rejected random draws per instance')
        parser.add_argument('--parallel', action='store_true', help='Fan trials out to Celery workers')
        add_output_arguments(parser)
        add_solver_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = RunConfig.from_options(options)
            kind = ExperimentKind(options['kind'])
            if kind == ExperimentKind.HOMOGENEOUS:
                data, summary = self.homogeneous(options, config)
            elif kind == ExperimentKind.HETEROGENEOUS:
                data, summary = self.heterogeneous(options, config)
            else:
                data, summary = self.validate(options, config)
            emit(self.stdout, data, config.output_format, options['out'])
            # keep stdout parseable when it carries the records
            (self.stdout if options['out'] else self.stderr).write(summary)

    def homogeneous(self, options, config):
        outcomes = homogeneous_sweep(options['mu'], options['sigma'], points=options['points'], w_cfg=config.w_cfg)
        records = [outcome for outcome in outcomes if not isinstance(outcome, PointFailure)]
        summary = f"{len(records)} homogeneous records (mu={options['mu']!r}, sigma={options['sigma']!r})"
        return ExperimentRecordSerializer(records, many=True).data, summary

    def heterogeneous(self, options, config):
        trials = options['trials'] or DEFAULT_TRIALS
        if config.parallel:
            designs = [
                (n, z, first_id + k)
                for n, z, first_id in design_points(options['n'], options['z'], trials)
                for k in range(trials)
            ]
            records = parallel_heterogeneous_trials(designs, config.seed, config.w_cfg, config.max_rejections)
        else:
            records = heterogeneous_grid(options['n'], options['z'], trials, config.seed, config.w_cfg,
                                         config.max_rejections)
        rates = win_rates(records)
        summary = 'refined wins: ' + ', '.join(f"{method.value} {rate:.3f}" for method, rate in rates.items())
        logger.info(summary)
        return ExperimentRecordSerializer(records, many=True).data, summary

    def validate(self, options, config):
        report = validate_bounds(
            options['instances'],
            options['trials'] or DEFAULT_VALIDATION_TRIALS,
            config.seed,
            options['max_n'],
            config.w_cfg,
            config.max_rejections,
        )
        for outcome in report.violations:
            logger.warning(f"Instance {outcome.instance_id}: {outcome.method.label} bound {outcome.bound!r} "
                           f"is below the estimate {outcome.estimate!r} (se {outcome.std_error!r})")
        return ValidationOutcomeSerializer(report.outcomes, many=True).data, report.summary()
