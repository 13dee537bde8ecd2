"""
Judging one program under one pair of configs, and replaying findings.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from lang.tree import SourceLoc
from oracle.verdicts import INCONCLUSIVE, Verdict, crash_site_verdict
from toolchain.configs import CompilerConfig
from toolchain.discovery import get_toolchain
from toolchain.injection import NO_INJECTION, FnInjection
from toolchain.outcomes import RunOutcome

from .findings import INJECTION_FILE, CampaignStore
from .pairs import PairDecision, classify_pair

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairResult:
    decision: PairDecision
    outcome_a: RunOutcome
    outcome_b: RunOutcome
    verdict: Optional[Verdict] = None
    crash_cfg: Optional[CompilerConfig] = None
    crash_site: Optional[SourceLoc] = None


def judge_source(path, cfg_a: CompilerConfig, cfg_b: CompilerConfig, workdir,
                 injection: FnInjection = NO_INJECTION, step_budget: Optional[int] = None,
                 timeout: Optional[float] = None, identity: Optional[str] = None) -> PairResult:
    """Build and run path under both configs; a discrepant pair also gets the oracle's verdict.

    identity is the program hash injection rules select on, for variants of a stored program.
    """
    workdir = Path(workdir)
    runs = []
    for cfg in (cfg_a, cfg_b):
        tc = get_toolchain(cfg, injection, identity=identity)
        binary = tc.compile(path, cfg, workdir)
        runs.append((tc, binary, tc.execute(binary, timeout)))
    decision = classify_pair(runs[0][2], runs[1][2])
    if not decision.discrepant:
        return PairResult(decision, runs[0][2], runs[1][2])
    crash, nocrash = (runs[0], runs[1]) if decision.crash == 'a' else (runs[1], runs[0])
    verdict, crash_site = crash_site_verdict(crash[1], nocrash[1], crash[0], step_budget, tc_n=nocrash[0])
    return PairResult(decision, runs[0][2], runs[1][2], verdict, crash[1].config, crash_site)


def campaign_injection(root) -> FnInjection:
    path = Path(root) / INJECTION_FILE
    return FnInjection.load(path) if path.exists() else NO_INJECTION


def replay_finding(root, finding_id: str, step_budget: Optional[int] = None) -> Verdict:
    """Rerun a finding's pair. Anything but a discrepancy judged FnBug again comes back Inconclusive."""
    store = CampaignStore(root)
    finding = store.finding(finding_id)
    cfg_crash = CompilerConfig.parse(finding.cfg_crash)
    result = judge_source(store.program_path(finding.program_hash), cfg_crash, finding.nocrash,
                          store.root / 'replay' / finding.id, campaign_injection(root), step_budget)
    if not result.decision.discrepant or result.crash_cfg != cfg_crash:
        logger.warning(f"finding {finding_id} did not reproduce: {result.outcome_a} / {result.outcome_b}")
        return Verdict(INCONCLUSIVE, 'flaky: no discrepancy on replay')
    if not result.verdict.is_fn_bug:
        return Verdict(INCONCLUSIVE, f"flaky: replay judged {result.verdict}")
    return result.verdict
