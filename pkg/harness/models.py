from django.db import models

from match.kinds import KIND_CHOICES
from oracle.verdicts import VERDICT_CHOICES
from toolchain.configs import OPT_CHOICES, SANITIZER_CHOICES


class Campaign(models.Model):
    STATUS_CHOICES = (
        ('running', 'Running'),
        ('finished', 'Finished'),
        ('failed', 'Failed'),
    )

    name = models.CharField(max_length=100)
    output_root = models.CharField(max_length=500, unique=True)
    campaign_seed = models.BigIntegerField(default=0)
    config = models.JSONField(default=dict)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')
    counters = models.JSONField(default=dict, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    def __str__(self):
        return f"{self.name} ({self.status})"

    @property
    def findings_count(self):
        return self.findings.count()


class Finding(models.Model):
    campaign = models.ForeignKey(Campaign, on_delete=models.CASCADE, related_name='findings')
    finding_id = models.CharField(max_length=64)
    seed_id = models.CharField(max_length=200)
    kind = models.CharField(max_length=30, choices=KIND_CHOICES)
    cfg_crash = models.CharField(max_length=100)
    cfg_nocrash = models.CharField(max_length=100)
    compiler_id = models.CharField(max_length=50)
    sanitizer = models.CharField(max_length=10, choices=SANITIZER_CHOICES)
    opt_level = models.CharField(max_length=5, choices=OPT_CHOICES)
    crash_site = models.CharField(max_length=30)
    verdict = models.CharField(max_length=20, choices=VERDICT_CHOICES)
    program_hash = models.CharField(max_length=64)
    dedup_key = models.CharField(max_length=300)
    reduced_source = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        ordering = ['id']
        constraints = [
            models.UniqueConstraint(fields=['campaign', 'dedup_key'], name='unique_finding_per_campaign'),
            models.UniqueConstraint(fields=['campaign', 'finding_id'], name='unique_finding_id_per_campaign'),
        ]

    def __str__(self):
        return f"{self.kind} {self.cfg_nocrash} at {self.crash_site}"
