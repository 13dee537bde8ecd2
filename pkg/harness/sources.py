"""
Seed sources of a campaign.

    bundled            the seeds shipped in harness/seeds
    <directory>        every *.c file, in name order
    builtin:<count>    programs from the built-in generator
    cmd:<command>      stdout of an external generator, run seed_count times
"""
import logging
import random
import shlex
import subprocess
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from django.conf import settings

from .config import BUNDLED_SEEDS, CampaignConfig
from .exceptions import SeedSourceError
from .seedgen import generate_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Seed:
    seed_id: str
    text: str


def _directory(path: Path) -> Iterator[Seed]:
    if not path.is_dir():
        raise SeedSourceError(f"seed directory {path} does not exist")
    for file in sorted(path.glob('*.c')):
        yield Seed(file.stem, file.read_text())


def _builtin(count: int, campaign_seed: int) -> Iterator[Seed]:
    for index in range(count):
        rng = random.Random(f"{campaign_seed}:builtin:{index}")
        try:
            yield Seed(f"builtin-{index:04d}", generate_seed(rng))
        except SeedSourceError as exc:
            logger.warning(f"builtin seed {index}: {exc}")


def _command(command: str, count: int) -> Iterator[Seed]:
    argv = shlex.split(command)
    timeout = getattr(settings, 'UBF_EXEC_TIMEOUT', 10) * 6
    for index in range(count):
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise SeedSourceError(f"seed generator not found: {argv[0]}") from None
        except subprocess.TimeoutExpired:
            logger.warning(f"seed generator timed out on seed {index}")
            continue
        if proc.returncode != 0 or not proc.stdout.strip():
            logger.warning(f"seed generator failed on seed {index} (exit {proc.returncode})")
            continue
        yield Seed(f"gen-{index:04d}", proc.stdout)


def iter_seeds(cfg: CampaignConfig) -> Iterator[Seed]:
    source = cfg.seed_source
    if source == 'bundled':
        seeds = _directory(BUNDLED_SEEDS)
    elif source.startswith('builtin:'):
        seeds = _builtin(int(source.split(':', 1)[1]), cfg.campaign_seed)
    elif source.startswith('cmd:'):
        seeds = _command(source.split(':', 1)[1], cfg.seed_count)
    else:
        seeds = _directory(Path(source))
    for index, seed in enumerate(seeds):
        if cfg.max_seeds and index >= cfg.max_seeds:
            return
        yield seed
