"""
Run configuration shared by the management commands.

Options given on the command line win; anything left out falls back to the
Django settings, which in turn read the environment through decouple.
"""
from contextlib import contextmanager
from dataclasses import dataclass

from django.conf import settings
from django.core.management.base import CommandError
from django.db import models

from bounds.exceptions import BoundsError
from bounds.lambertw import WConfig

from .exceptions import InputParseError

EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

MAX_SEED = 2 ** 64 - 1


class OutputFormat(models.TextChoices):
    CSV = 'csv', 'CSV'
    JSON = 'json', 'JSON'
    TABLE = 'table', 'Table'


class WForm(models.TextChoices):
    DIRECT = 'direct', 'W(x)'
    EXP = 'exp', 'W(exp(x))'


def parse_seed(value):
    """Seed in decimal or ``0x`` hex, within the unsigned 64-bit range."""
    if isinstance(value, str):
        try:
            value = int(value.strip(), 0)
        except ValueError:
            raise InputParseError(f"{value!r} is not a decimal or hex integer", column='seed') from None
    if not 0 <= value <= MAX_SEED:
        raise InputParseError(f"{value!r} is outside 0..{MAX_SEED}", column='seed')
    return value


@dataclass(frozen=True)
class RunConfig:
    seed: int = 42
    output_format: OutputFormat = OutputFormat.TABLE
    w_cfg: WConfig = WConfig()
    polish: bool = False
    parallel: bool = False
    max_rejections: int = 1000

    @classmethod
    def from_options(cls, options):
        seed = options.get('seed')
        output_format = options.get('format') or settings.BOUNDS_OUTPUT_FORMAT
        if output_format not in OutputFormat.values:
            raise InputParseError(f"unknown output format {output_format!r}", column='format')
        tolerance = options.get('tolerance') or settings.LAMBERTW_RELATIVE_TOLERANCE
        max_iterations = options.get('max_iterations') or settings.LAMBERTW_MAX_ITERATIONS
        return cls(
            seed=parse_seed(settings.BOUNDS_DEFAULT_SEED if seed is None else seed),
            output_format=OutputFormat(output_format),
            w_cfg=WConfig(relative_tolerance=tolerance, max_iterations=max_iterations),
            polish=bool(options.get('polish')),
            parallel=bool(options.get('parallel')),
            max_rejections=options.get('max_rejections') or settings.EXPERIMENT_MAX_REJECTIONS,
        )


def add_output_arguments(parser):
    parser.add_argument('--format', choices=OutputFormat.values, help='Output format (default: BOUNDS_OUTPUT_FORMAT)')
    parser.add_argument('--out', help='Write the records to this file instead of stdout')


def add_solver_arguments(parser):
    parser.add_argument('--tolerance', type=float, help='Lambert-W relative tolerance')
    parser.add_argument('--max-iterations', type=int, help='Lambert-W iteration cap')


@contextmanager
def exit_codes():
    """Turn toolkit failures into ``CommandError``s with the documented exit codes."""
    try:
        yield
    except InputParseError as exc:
        raise CommandError(f"Parse error: {exc}", returncode=EXIT_PARSE) from exc
    except BoundsError as exc:
        raise CommandError(str(exc), returncode=EXIT_DOMAIN) from exc
    except OSError as exc:
        raise CommandError(f"I/O error: {exc}", returncode=EXIT_IO) from exc
