import math

from django.core.management.base import BaseCommand

from bounds.lambertw import lambert_w, lambert_w_exp

from cli.config import RunConfig, WForm, add_solver_arguments, exit_codes


def residual(form, x, w):
    """Residual of the defining equation the value was solved from."""
    if form == WForm.DIRECT:
        if x == 0:
            return w
        # w e^w - x without overflowing e^w near the top of the float range
        return x * math.expm1(math.log(w) + w - math.log(x))
    return w + math.log(w) - x


class Command(BaseCommand):
    help = "Evaluate the principal branch of Lambert's W function, W(x) or W(exp(x))."

    def add_arguments(self, parser):
        parser.add_argument('form', choices=WForm.values)
        parser.add_argument('x', type=float)
        add_solver_arguments(parser)

    def handle(self, *args, **options):
        with exit_codes():
            config = RunConfig.from_options(options)
            form, x = WForm(options['form']), options['x']
            solve = lambert_w if form == WForm.DIRECT else lambert_w_exp
            w = solve(x, config.w_cfg)
            self.stdout.write(f"{w:.10f}")
            self.stdout.write(f"residual {residual(form, x, w):.3e}")
