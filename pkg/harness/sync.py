"""
Mirror a campaign directory into the Campaign and Finding tables.
"""
import logging
from pathlib import Path

from django.db import transaction

from .findings import CONFIG_FILE, CampaignStore
from .models import Campaign, Finding
from .report import build_report

logger = logging.getLogger(__name__)


def sync_campaign(root, status: str = 'finished') -> Campaign:
    """Create or update the Campaign row for root and add findings not yet mirrored."""
    store = CampaignStore(root)
    config = store.read_json(CONFIG_FILE) or {}
    report = build_report(root)
    with transaction.atomic():
        campaign, _ = Campaign.objects.update_or_create(
            output_root=str(Path(root).resolve()),
            defaults={
                'name': config.get('name', Path(root).name),
                'campaign_seed': config.get('campaign_seed', 0),
                'config': config,
                'status': status,
                'counters': dict(report.counters),
            },
        )
        known = set(campaign.findings.values_list('dedup_key', flat=True))
        added = 0
        # Add new findings, refresh reduced sources of known ones
        for finding in report.findings:
            reduced = ''
            if finding.reduced:
                path = store.programs / finding.reduced
                reduced = path.read_text() if path.exists() else ''
            if finding.dedup_key in known:
                if reduced:
                    campaign.findings.filter(dedup_key=finding.dedup_key).update(reduced_source=reduced)
                continue
            cfg = finding.nocrash
            Finding.objects.create(
                campaign=campaign,
                finding_id=finding.id,
                seed_id=finding.seed_id,
                kind=finding.kind,
                cfg_crash=finding.cfg_crash,
                cfg_nocrash=finding.cfg_nocrash,
                compiler_id=cfg.compiler_id,
                sanitizer=cfg.sanitizer or '',
                opt_level=cfg.opt_level,
                crash_site=finding.crash_site,
                verdict=finding.verdict.split('(', 1)[0],
                program_hash=finding.program_hash,
                dedup_key=finding.dedup_key,
                reduced_source=reduced,
            )
            added += 1
    logger.info(f"synced campaign {campaign.name}: {added} new findings")
    return campaign
