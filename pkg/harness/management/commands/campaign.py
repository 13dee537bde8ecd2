from dataclasses import replace

from django.core.management.base import BaseCommand, CommandError

from harness.campaign import CampaignRunner
from harness.exceptions import HarnessError, InvalidCampaignConfig
from harness.config import load_config
from harness.sync import sync_campaign
from toolchain.exceptions import ToolchainError


class Command(BaseCommand):
    help = 'Runs (or resumes) a fuzzing campaign described by a JSON config file'

    def add_arguments(self, parser):
        parser.add_argument('--config', type=str, required=True, help='Campaign config file')
        parser.add_argument('--output', type=str, help='Override the output root')
        parser.add_argument('--progress', action='store_true', help='Show a progress bar')
        parser.add_argument('--no-sync', action='store_true', help='Do not mirror findings into the database')

    def handle(self, *args, **options):
        try:
            cfg = load_config(options['config'])
        except InvalidCampaignConfig as e:
            for field, errors in e.errors.items():
                self.stdout.write(self.style.ERROR(f'{field}: {" ".join(str(x) for x in errors)}'))
            raise CommandError('Invalid campaign configuration')
        # Command-line output root wins over the config file
        if options['output']:
            cfg = replace(cfg, output_root=options['output'])

        self.stdout.write(f'Campaign {cfg.name}: {len(cfg.matrix)} configs, output in {cfg.output_root}')
        runner = CampaignRunner(cfg)
        try:
            report = runner.run(progress=options['progress'])
        except (HarnessError, ToolchainError) as e:
            if not options['no_sync']:
                sync_campaign(cfg.output_root, status='failed')
            raise CommandError(f'Campaign failed: {e}')

        # Mirror findings into the database
        if not options['no_sync']:
            sync_campaign(cfg.output_root)
        # Summary line
        counters = report.counters
        self.stdout.write(f'seeds: {counters.get("seeds", 0)}  programs: {counters.get("programs", 0)}  '
                          f'pairs: {counters.get("pairs", 0)}  discrepant: {counters.get("discrepant", 0)}')
        self.stdout.write(self.style.SUCCESS(f'{len(report.findings)} findings'))
