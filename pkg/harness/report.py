"""
Campaign reports, folded from the progress and findings logs.
"""
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List

from oracle.verdicts import FN_BUG, INCONCLUSIVE, OPTIMIZED_AWAY

from .findings import CONFIG_FILE, CampaignStore, Finding


@dataclass
class CampaignReport:
    counters: Counter = field(default_factory=Counter)
    findings: List[Finding] = field(default_factory=list)
    campaign_seed: int = 0
    name: str = ''

    def tally(self, attribute: str) -> Dict[str, int]:
        counts = Counter()
        for finding in self.findings:
            cfg = finding.nocrash
            value = getattr(finding, attribute, None)
            if value is None:
                value = getattr(cfg, attribute)
            counts[value or '-'] += 1
        return dict(sorted(counts.items()))

    def balanced(self) -> bool:
        """Every pair is accounted for once, and every discrepancy has exactly one verdict."""
        c = self.counters
        pairs_ok = c['pairs'] == c['pairs_skipped'] + c['no_discrepancy'] + c['discrepant']
        verdicts_ok = c['discrepant'] == c[FN_BUG] + c[OPTIMIZED_AWAY] + c[INCONCLUSIVE]
        return pairs_ok and verdicts_ok

    def to_dict(self):
        return {
            'name': self.name,
            'campaign_seed': self.campaign_seed,
            'counters': dict(sorted(self.counters.items())),
            'balanced': self.balanced(),
            'findings': len(self.findings),
            'by_kind': self.tally('kind'),
            'by_sanitizer': self.tally('sanitizer'),
            'by_opt_level': self.tally('opt_level'),
            'by_compiler': self.tally('compiler_id'),
            'finding_ids': [f.id for f in self.findings],
        }


def build_report(root) -> CampaignReport:
    store = CampaignStore(root)
    counters = Counter()
    for seed_counters in store.completed().values():
        counters.update(seed_counters)
    config = store.read_json(CONFIG_FILE) or {}
    return CampaignReport(counters, store.findings(), config.get('campaign_seed', 0), config.get('name', ''))
