"""
Scoring the crash-site oracle against injected false negatives.

On the simulated toolchain the injection rules are ground truth: a discrepant
pair whose no-crash side was told to miss the violation is a real false
negative, one whose side was told to eliminate it is an optimization.
"""
from dataclasses import dataclass
from typing import Iterable

from match.kinds import UbKind
from toolchain.injection import ELIMINATE, MISS, FnInjection

from .findings import Finding


@dataclass
class OracleEvaluation:
    true_positives: int = 0
    false_positives: int = 0
    false_negatives: int = 0
    eliminated: int = 0
    eliminated_correct: int = 0
    inconclusive: int = 0

    @property
    def precision(self) -> float:
        flagged = self.true_positives + self.false_positives
        return self.true_positives / flagged if flagged else 1.0

    @property
    def recall(self) -> float:
        real = self.true_positives + self.false_negatives
        return self.true_positives / real if real else 1.0

    def to_dict(self):
        return {
            'true_positives': self.true_positives,
            'false_positives': self.false_positives,
            'false_negatives': self.false_negatives,
            'eliminated': self.eliminated,
            'eliminated_correct': self.eliminated_correct,
            'inconclusive': self.inconclusive,
            'precision': round(self.precision, 4),
            'recall': round(self.recall, 4),
        }


def ground_truth(record: Finding, injection: FnInjection):
    site_text = record.planted_text or record.planted_site or record.crash_site
    return injection.decide(UbKind.parse(record.kind), record.nocrash, record.program_hash, site_text)


def evaluate_oracle(records: Iterable[Finding], injection: FnInjection) -> OracleEvaluation:
    """Score verdict records (every discrepant pair, not only deduplicated findings)."""
    result = OracleEvaluation()
    for record in records:
        truth = ground_truth(record, injection)
        flagged = record.verdict.startswith('FnBug')
        if record.verdict.startswith('Inconclusive'):
            result.inconclusive += 1
        if truth == ELIMINATE:
            result.eliminated += 1
            result.eliminated_correct += record.verdict.startswith('OptimizedAway')
        if flagged and truth == MISS:
            result.true_positives += 1
        elif flagged:
            result.false_positives += 1
        elif truth == MISS:
            result.false_negatives += 1
    return result
