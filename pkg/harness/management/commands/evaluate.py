from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from harness.evaluation import evaluate_oracle
from harness.findings import CampaignStore
from harness.replay import campaign_injection
from toolchain.exceptions import InvalidInjection
from toolchain.injection import FnInjection


class Command(BaseCommand):
    help = 'Scores the oracle verdicts of a sim campaign against its injected false negatives'

    def add_arguments(self, parser):
        parser.add_argument('campaign', type=str, help='Campaign directory')
        parser.add_argument('--injection', type=str, help='Injection file (default: the one stored with the campaign)')

    def handle(self, *args, **options):
        root = Path(options['campaign'])
        try:
            injection = FnInjection.load(options['injection']) if options['injection'] else campaign_injection(root)
        except (OSError, InvalidInjection) as e:
            raise CommandError(str(e))
        if not injection:
            self.stdout.write(self.style.WARNING('No injection rules; every FnBug verdict counts as a false positive'))

        # Score every logged verdict against the injection rules
        result = evaluate_oracle(CampaignStore(root).verdicts(), injection)
        for name, value in result.to_dict().items():
            self.stdout.write(f'  {name:<20} {value}')
        self.stdout.write(self.style.SUCCESS(f'precision {result.precision:.3f}  recall {result.recall:.3f}'))
