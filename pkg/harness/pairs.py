"""
Pairing outcomes of one UB program across a compiler matrix.
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

from toolchain.configs import CompilerConfig
from toolchain.outcomes import NORMAL_EXIT, SAN_REPORT, RunOutcome

DISCREPANT = 'Discrepant'
NO_DISCREPANCY = 'NoDiscrepancy'
SKIP = 'Skip'


@dataclass(frozen=True)
class PairDecision:
    label: str
    crash: Optional[str] = None
    reason: str = ''

    @property
    def discrepant(self) -> bool:
        return self.label == DISCREPANT


def classify_pair(out_a: RunOutcome, out_b: RunOutcome) -> PairDecision:
    """Discrepant when exactly one side reported and the other exited normally; `crash` names that side."""
    statuses = (out_a.status, out_b.status)
    if statuses == (SAN_REPORT, NORMAL_EXIT):
        return PairDecision(DISCREPANT, crash='a')
    if statuses == (NORMAL_EXIT, SAN_REPORT):
        return PairDecision(DISCREPANT, crash='b')
    if statuses in ((SAN_REPORT, SAN_REPORT), (NORMAL_EXIT, NORMAL_EXIT)):
        return PairDecision(NO_DISCREPANCY)
    return PairDecision(SKIP, reason=f"{out_a.status}/{out_b.status}")


def comparable(a: CompilerConfig, b: CompilerConfig) -> bool:
    """Same sanitizer, and either one compiler at two levels or two compilers at one level."""
    if a.sanitizer != b.sanitizer:
        return False
    if a.compiler_id == b.compiler_id:
        return a.opt_level != b.opt_level
    return a.opt_level == b.opt_level


def candidate_pairs(configs: Iterable[CompilerConfig]) -> List[Tuple[CompilerConfig, CompilerConfig]]:
    return [(a, b) for a, b in combinations(configs, 2) if comparable(a, b)]
