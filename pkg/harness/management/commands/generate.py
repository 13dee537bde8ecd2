import random
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from lang.exceptions import LangError
from lang.printer import canonicalize
from match.kinds import UbKind
from profiler.exceptions import ProfileError
from profiler.profile import profile_seed
from synth.programs import generate, write_programs
from toolchain.configs import CompilerConfig
from toolchain.discovery import get_toolchain
from toolchain.exceptions import ToolchainError


class Command(BaseCommand):
    help = 'Generates UB programs (with .meta sidecars) from one UB-free seed program'

    def add_arguments(self, parser):
        parser.add_argument('seed', type=str, help='Path of the seed C program')
        parser.add_argument('--kind', action='append', dest='kinds', help='UB kind to plant (repeatable, default: all)')
        parser.add_argument('--out', type=str, default='generated', help='Output directory')
        parser.add_argument('--compiler', type=str, default='sim', help='Compiler used for the profiling run')
        parser.add_argument('--rng-seed', type=int, default=0, help='Seed of the shadow statement search')
        parser.add_argument('--no-verify', action='store_true', help='Skip replaying programs on the interpreter')

    def handle(self, *args, **options):
        path = Path(options['seed'])
        try:
            kinds = [UbKind.parse(k) for k in options['kinds']] if options['kinds'] else list(UbKind)
        except ValueError as e:
            raise CommandError(str(e))

        try:
            ast = canonicalize(path.read_text())
            tc = get_toolchain(CompilerConfig(options['compiler']))
            out = Path(options['out'])
            profile = profile_seed(ast, kinds, tc, out / '.profile')
        except OSError as e:
            raise CommandError(f'Cannot read seed: {e}')
        except (LangError, ProfileError, ToolchainError) as e:
            raise CommandError(f'Seed could not be profiled: {e}')

        # One batch per kind, all written next to each other
        rng = random.Random(options['rng_seed'])
        total = 0
        for kind in kinds:
            skips = []
            programs = generate(ast, kind, profile, not options['no_verify'], rng, path.stem, skips)
            write_programs(programs, out)
            total += len(programs)
            message = f'{kind.value}: {len(programs)} programs, {len(skips)} sites skipped'
            self.stdout.write(self.style.SUCCESS(message) if programs else self.style.WARNING(message))
        self.stdout.write(self.style.SUCCESS(f'Wrote {total} programs to {out}'))
