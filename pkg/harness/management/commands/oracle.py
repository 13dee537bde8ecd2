from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from harness.replay import judge_source
from oracle.exceptions import OracleError
from toolchain.configs import CompilerConfig
from toolchain.exceptions import ToolchainError
from toolchain.injection import NO_INJECTION, FnInjection


class Command(BaseCommand):
    help = 'Runs one program under a pair of configs and prints the crash-site verdict'

    def add_arguments(self, parser):
        parser.add_argument('program', type=str, help='Path of the UB program')
        parser.add_argument('--pair', type=str, required=True,
                            help='Two configs, e.g. sim:O0:ASan,sim:O2:ASan')
        parser.add_argument('--injection', type=str, help='False-negative injection file for the sim toolchain')
        parser.add_argument('--step-budget', type=int, help='Instruction budget of each trace')
        parser.add_argument('--workdir', type=str, help='Directory for build artifacts')
        parser.add_argument('--expect', type=str, help='Fail unless the verdict has this label (e.g. FnBug)')
        parser.add_argument('--identity', type=str,
                            help='Program hash injection rules select on (for reduced variants)')

    def handle(self, *args, **options):
        program = Path(options['program'])
        parts = options['pair'].split(',')
        if len(parts) != 2:
            raise CommandError('--pair takes exactly two configs separated by a comma')
        try:
            cfg_a, cfg_b = (CompilerConfig.parse(part) for part in parts)
            injection = FnInjection.load(options['injection']) if options['injection'] else NO_INJECTION
            workdir = Path(options['workdir']) if options['workdir'] else program.parent / f'.{program.stem}.oracle'
            result = judge_source(program, cfg_a, cfg_b, workdir, injection, options['step_budget'],
                                  identity=options['identity'])
        except (ToolchainError, OracleError, OSError) as e:
            raise CommandError(str(e))

        self.stdout.write(f'{cfg_a}: {result.outcome_a}')
        self.stdout.write(f'{cfg_b}: {result.outcome_b}')
        self.stdout.write(f'pair: {result.decision.label}')
        # The verdict overrides the pair label when the oracle ran
        label = result.decision.label
        if result.verdict is not None:
            label = result.verdict.label
            style = self.style.SUCCESS if result.verdict.is_fn_bug else self.style.WARNING
            self.stdout.write(style(f'verdict: {result.verdict} (crash under {result.crash_cfg}, '
                                    f'site {result.crash_site or "-"})'))

        # Exit non-zero on an unexpected label
        if options['expect'] and label != options['expect']:
            raise CommandError(f'expected {options["expect"]}, got {label}')
