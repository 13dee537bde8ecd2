from collections import Counter

from rest_framework import serializers

from match.kinds import UbKind
from toolchain.configs import CompilerConfig
from toolchain.exceptions import ToolchainError

from .config import CampaignConfig
from .models import Campaign, Finding


class CampaignConfigSerializer(serializers.Serializer):
    """Validates a campaign JSON document."""
    name = serializers.CharField(max_length=100, default='campaign')
    output_root = serializers.CharField()
    matrix = serializers.ListField(child=serializers.CharField(), min_length=2)
    seed_source = serializers.CharField(default='bundled')
    seed_count = serializers.IntegerField(min_value=1, default=10)
    kinds = serializers.ListField(child=serializers.CharField(), required=False)
    workers = serializers.IntegerField(min_value=1, default=1)
    exec_timeout = serializers.FloatField(min_value=0.1, default=10.0)
    step_budget = serializers.IntegerField(min_value=1, default=2_000_000)
    reducer = serializers.CharField(allow_blank=True, default='')
    campaign_seed = serializers.IntegerField(default=0)
    injection = serializers.CharField(allow_blank=True, default='')
    verify = serializers.BooleanField(default=True)
    max_seeds = serializers.IntegerField(min_value=0, default=0)

    def validate_kinds(self, value):
        kinds = []
        for text in value:
            try:
                kind = UbKind.parse(text)
            except ValueError as exc:
                raise serializers.ValidationError(str(exc))
            if kind not in kinds:
                kinds.append(kind)
        if not kinds:
            raise serializers.ValidationError("At least one UB kind is required")
        return kinds

    def validate_matrix(self, value):
        configs = []
        for text in value:
            try:
                cfg = CompilerConfig.parse(text)
            except ToolchainError as exc:
                raise serializers.ValidationError(f"{text}: {exc}")
            if cfg.sanitizer is None:
                raise serializers.ValidationError(f"{text}: a sanitizer is required")
            if cfg in configs:
                raise serializers.ValidationError(f"{text}: listed twice")
            configs.append(cfg)
        per_sanitizer = Counter(cfg.sanitizer for cfg in configs)
        if max(per_sanitizer.values()) < 2:
            raise serializers.ValidationError("At least two configs must share a sanitizer to form a pair")
        return configs

    def to_config(self) -> CampaignConfig:
        data = dict(self.validated_data)
        data['matrix'] = tuple(data['matrix'])
        data['kinds'] = tuple(data.get('kinds') or UbKind)
        return CampaignConfig(**data)


class FindingSerializer(serializers.ModelSerializer):
    campaign_name = serializers.ReadOnlyField(source='campaign.name')

    class Meta:
        model = Finding
        fields = ('id', 'finding_id', 'campaign', 'campaign_name', 'seed_id', 'kind', 'cfg_crash', 'cfg_nocrash',
                  'compiler_id', 'sanitizer', 'opt_level', 'crash_site', 'verdict', 'program_hash',
                  'reduced_source', 'created_at')


class CampaignSerializer(serializers.ModelSerializer):
    findings_count = serializers.ReadOnlyField()

    class Meta:
        model = Campaign
        fields = ('id', 'name', 'output_root', 'campaign_seed', 'status', 'counters', 'findings_count',
                  'created_at', 'updated_at')


class CampaignDetailSerializer(CampaignSerializer):
    class Meta(CampaignSerializer.Meta):
        fields = CampaignSerializer.Meta.fields + ('config',)
