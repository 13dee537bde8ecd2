from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from harness.exceptions import FindingNotFound
from harness.findings import FINDINGS_LOG
from harness.replay import replay_finding
from oracle.exceptions import OracleError
from toolchain.exceptions import ToolchainError


def find_campaign(finding_id):
    for log in sorted(Path(settings.UBF_WORK_ROOT).glob(f'*/{FINDINGS_LOG}')):
        if finding_id in log.read_text():
            return log.parent
    return None


class Command(BaseCommand):
    help = 'Re-runs the pair of a recorded finding and re-applies the oracle'

    def add_arguments(self, parser):
        parser.add_argument('finding_id', type=str, help='Id of the finding')
        parser.add_argument('--campaign', type=str, help='Campaign directory (default: search UBF_WORK_ROOT)')
        parser.add_argument('--step-budget', type=int, help='Instruction budget of each trace')

    def handle(self, *args, **options):
        finding_id = options['finding_id']
        # Search every campaign under the work root unless one is given
        root = Path(options['campaign']) if options['campaign'] else find_campaign(finding_id)
        if root is None:
            raise CommandError(f'Finding {finding_id} not found under {settings.UBF_WORK_ROOT}')
        try:
            verdict = replay_finding(root, finding_id, options['step_budget'])
        except FindingNotFound as e:
            raise CommandError(str(e))
        except (ToolchainError, OracleError) as e:
            raise CommandError(f'Replay failed: {e}')

        if verdict.is_fn_bug:
            self.stdout.write(self.style.SUCCESS(f'{finding_id}: {verdict}'))
        else:
            self.stdout.write(self.style.WARNING(f'{finding_id}: {verdict}'))
