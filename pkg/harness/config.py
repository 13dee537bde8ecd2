"""
Campaign configuration.

A campaign is described by a JSON document; `load_config` validates it with
CampaignConfigSerializer and returns a CampaignConfig.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

from django.conf import settings

from match.kinds import UbKind
from toolchain.configs import CompilerConfig

from .exceptions import InvalidCampaignConfig

BUNDLED_SEEDS = Path(__file__).resolve().parent / 'seeds'


@dataclass(frozen=True)
class CampaignConfig:
    output_root: str
    matrix: Tuple[CompilerConfig, ...]
    seed_source: str = 'bundled'
    seed_count: int = 10
    kinds: Tuple[UbKind, ...] = tuple(UbKind)
    workers: int = 1
    exec_timeout: float = 10.0
    step_budget: int = 2_000_000
    reducer: str = ''
    campaign_seed: int = 0
    injection: str = ''
    verify: bool = True
    max_seeds: int = 0
    name: str = 'campaign'

    def configs_for(self, sanitizer: str) -> Tuple[CompilerConfig, ...]:
        return tuple(cfg for cfg in self.matrix if cfg.sanitizer == sanitizer)

    @property
    def sanitizers(self):
        return sorted({cfg.sanitizer for cfg in self.matrix if cfg.sanitizer})

    def to_dict(self):
        return {
            'name': self.name,
            'output_root': self.output_root,
            'matrix': [cfg.label() for cfg in self.matrix],
            'seed_source': self.seed_source,
            'seed_count': self.seed_count,
            'kinds': [kind.value for kind in self.kinds],
            'workers': self.workers,
            'exec_timeout': self.exec_timeout,
            'step_budget': self.step_budget,
            'reducer': self.reducer,
            'campaign_seed': self.campaign_seed,
            'injection': self.injection,
            'verify': self.verify,
            'max_seeds': self.max_seeds,
        }


def parse_config(data) -> CampaignConfig:
    from .serializers import CampaignConfigSerializer

    serializer = CampaignConfigSerializer(data=data)
    if not serializer.is_valid():
        raise InvalidCampaignConfig(serializer.errors)
    return serializer.to_config()


def load_config(path) -> CampaignConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, ValueError) as exc:
        raise InvalidCampaignConfig({'file': [str(exc)]}) from exc
    data.setdefault('output_root', str(Path(getattr(settings, 'UBF_WORK_ROOT', 'work')) / path.stem))
    return parse_config(data)
