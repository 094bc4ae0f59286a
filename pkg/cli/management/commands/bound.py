import logging
import math

from django.core.management.base import BaseCommand

from bounds.classical import hoeffding_upper, lower_tail, require_side, upper_tail
from bounds.domain import BoundResult, BoundSide, Method, Tail
from bounds.exceptions import DomainError
from bounds.serializers import BoundResultSerializer
from portfolio.assessment import imputed_ranges

from cli.config import RunConfig, add_output_arguments, add_solver_arguments, exit_codes
from cli.exceptions import InputParseError
from cli.formats import emit, read_variables

logger = logging.getLogger(__name__)

TAIL_SIDES = {Tail.UPPER: BoundSide.CEILING, Tail.LOWER: BoundSide.FLOOR}


def parse_methods(value):
    if value.strip().lower() == 'all':
        return list(Method)
    methods = []
    for name in value.split(','):
        name = name.strip().lower()
        if name not in Method.values:
            raise InputParseError(f"unknown method {name!r}; choose from {', '.join(Method.values)} or all",
                                  column='methods')
        if Method(name) not in methods:
            methods.append(Method(name))
    return methods


def tail_bound(method, variables, tail, t, config):
    """One method's bound on a deviation ``t`` in the given tail of the average."""
    variables = require_side(variables, TAIL_SIDES[tail])
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"deviation t={t!r} must be non-negative and finite")
    if t == 0:
        return BoundResult.trivial(method)
    if method == Method.HOEFFDING:
        # imputed ranges have the same widths in either tail
        return hoeffding_upper(imputed_ranges(variables), t)
    bound = upper_tail if tail == Tail.UPPER else lower_tail
    return bound(method, variables, t, polish=config.polish, w_cfg=config.w_cfg)


class Command(BaseCommand):
    help = 'Bound the probability that the average of the input variables deviates by t in one tail.'

    def add_arguments(self, parser):
        parser.add_argument('input_path', help='CSV with columns mu,sigma,bound,side')
        parser.add_argument('--tail', choices=Tail.values, default=Tail.UPPER)
        parser.add_argument('--t', type=float, required=True, help='Deviation of the average from its mean')
        parser.add_argument('--methods', default='all', help="Comma-separated methods, or 'all'")
        parser.add_argument('--polish', action='store_true', help='Polish the refined multiplier numerically')
        add_output_arguments(parser)
        add_solver_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = RunConfig.from_options(options)
            methods = parse_methods(options['methods'])
            variables = read_variables(options['input_path'])
            tail = Tail(options['tail'])
            logger.info(f"Bounding the {tail.label.lower()} tail of {len(variables)} variables at t={options['t']!r}")
            results = [tail_bound(method, variables, tail, options['t'], config) for method in methods]
            emit(self.stdout, BoundResultSerializer(results, many=True).data, config.output_format, options['out'])
