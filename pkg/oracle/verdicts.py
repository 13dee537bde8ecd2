"""
Crash-site mapping.

A crashing binary b_c and a normally exiting binary b_n of the same UB
program disagree. The crash site of b_c is the last source site it executed.
If b_n executed that site too, the UB was reached there and its sanitizer
stayed silent: a false negative. Otherwise the optimizer removed the UB.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from django.conf import settings

from lang.tree import SourceLoc

from .exceptions import OracleError, PreconditionViolated, StepBudgetExceeded
from .traces import SiteTrace, Terminal

logger = logging.getLogger(__name__)

FN_BUG = 'FnBug'
OPTIMIZED_AWAY = 'OptimizedAway'
NO_DISCREPANCY = 'NoDiscrepancy'
INCONCLUSIVE = 'Inconclusive'

VERDICT_CHOICES = [
    (FN_BUG, 'Sanitizer false negative'),
    (OPTIMIZED_AWAY, 'UB optimized away'),
    (NO_DISCREPANCY, 'No discrepancy'),
    (INCONCLUSIVE, 'Inconclusive'),
]


@dataclass(frozen=True)
class Verdict:
    label: str
    reason: str = ''

    @property
    def is_fn_bug(self) -> bool:
        return self.label == FN_BUG

    def __str__(self):
        return f"{self.label}({self.reason})" if self.reason else self.label

    @classmethod
    def parse(cls, text: str) -> 'Verdict':
        label, _, rest = text.partition('(')
        if label not in dict(VERDICT_CHOICES):
            raise OracleError(f"unknown verdict '{text}'")
        return cls(label, rest[:-1] if rest.endswith(')') else rest)


def _check(trace: SiteTrace, expected: Terminal, name: str):
    # a truncated trace stands in for whatever terminal the run would have reached
    if trace.terminal != expected and not trace.truncated:
        raise PreconditionViolated(f"{name} must end in {expected}, got {trace.terminal}")


def is_bug(trace_c: SiteTrace, trace_n: SiteTrace) -> Verdict:
    """Verdict for a (crashing, normally exiting) trace pair."""
    _check(trace_c, Terminal.CRASH, 'trace of the crashing binary')
    _check(trace_n, Terminal.NORMAL_EXIT, 'trace of the non-crashing binary')
    if trace_c.truncated:
        return Verdict(INCONCLUSIVE, 'crashing run did not reach its crash site within the step budget')
    crash_site = trace_c.last
    if crash_site is None:
        raise PreconditionViolated('trace of the crashing binary is empty')
    if crash_site in trace_n:
        return Verdict(FN_BUG)
    if trace_n.truncated:
        return Verdict(INCONCLUSIVE, f"crash site {crash_site} not reached before the step budget")
    return Verdict(OPTIMIZED_AWAY)


def get_executed_sites(binary, tc, step_budget: Optional[int] = None) -> SiteTrace:
    """Executed-site trace of binary; a trace cut at the step budget comes back truncated."""
    budget = step_budget if step_budget is not None else getattr(settings, 'UBF_STEP_BUDGET', 2_000_000)
    try:
        return tc.trace(binary, budget)
    except StepBudgetExceeded as exc:
        logger.warning(f"{binary.source}: step budget of {budget} exceeded under {binary.config}")
        return exc.trace


class TraceCache:
    """Traces kept at `<root>/<program-id>/<config-id>.trace`."""

    def __init__(self, root):
        self.root = Path(root)

    def path(self, program_id: str, config_id: str) -> Path:
        return self.root / program_id / f"{config_id}.trace"

    def get(self, program_id: str, config_id: str) -> Optional[SiteTrace]:
        path = self.path(program_id, config_id)
        if not path.exists():
            return None
        return SiteTrace.loads(path.read_text())

    def put(self, program_id: str, config_id: str, trace: SiteTrace):
        path = self.path(program_id, config_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(trace.dumps())

    def executed_sites(self, binary, tc, step_budget: Optional[int] = None) -> SiteTrace:
        trace = self.get(binary.program_hash, binary.config.config_id)
        if trace is None:
            trace = get_executed_sites(binary, tc, step_budget)
            self.put(binary.program_hash, binary.config.config_id, trace)
        return trace


def crash_site_verdict(binary_c, binary_n, tc, step_budget: Optional[int] = None,
                       cache: Optional[TraceCache] = None, tc_n=None) -> Tuple[Verdict, Optional[SourceLoc]]:
    """Trace both binaries and apply is_bug. `tc_n` builds binary_n when another compiler does.

    The crash site comes back with the verdict, None when the crashing trace was cut short.
    """
    executed = cache.executed_sites if cache is not None else get_executed_sites
    trace_c = executed(binary_c, tc, step_budget)
    trace_n = executed(binary_n, tc_n or tc, step_budget)
    verdict = is_bug(trace_c, trace_n)
    logger.debug(f"{binary_c.config} vs {binary_n.config}: {verdict}")
    return verdict, (None if trace_c.truncated else trace_c.last)
