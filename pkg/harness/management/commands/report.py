import json
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from harness.findings import PROGRESS_LOG
from harness.report import build_report


class Command(BaseCommand):
    help = 'Prints the report of a campaign directory'

    def add_arguments(self, parser):
        parser.add_argument('campaign', type=str, help='Campaign directory')
        parser.add_argument('--json', action='store_true', help='Print JSON instead of a table')

    def handle(self, *args, **options):
        root = Path(options['campaign'])
        if not root.is_dir():
            raise CommandError(f'{root} is not a directory')
        report = build_report(root)
        data = report.to_dict()
        if options['json']:
            self.stdout.write(json.dumps(data, indent=2, sort_keys=True))
            return

        if not (root / PROGRESS_LOG).exists():
            self.stdout.write(self.style.WARNING('No completed seeds yet'))
        self.stdout.write(f'Campaign {data["name"] or root.name} (seed {data["campaign_seed"]})')
        for name, value in data['counters'].items():
            self.stdout.write(f'  {name:<20} {value:>8}')
        # Finding tallies
        for title in ('by_kind', 'by_sanitizer', 'by_opt_level', 'by_compiler'):
            if data[title]:
                self.stdout.write(title.replace('_', ' ') + ':')
                for key, value in data[title].items():
                    self.stdout.write(f'  {key:<20} {value:>8}')
        for finding in report.findings:
            self.stdout.write(f'  {finding.id}  {finding.kind:<18} {finding.cfg_nocrash:<20} {finding.crash_site}')
        if report.balanced():
            self.stdout.write(self.style.SUCCESS(f'{len(report.findings)} findings'))
        else:
            self.stdout.write(self.style.ERROR('Counters do not add up; the logs may be damaged'))
