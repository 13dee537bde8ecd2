"""
Simulated compiler: "binaries" run on the reference interpreter.

A sanitizer build reports a violation when the sanitizer covers its kind,
unless the false-negative injection says to miss it (the check is silent but
the code runs) or to eliminate it (the code is gone from the trace, as if the
optimizer had deleted it).
"""
import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from django.conf import settings

from lang.exceptions import ParseError
from lang.parser import parse_program
from minivm.exceptions import VmError
from minivm.interpreter import eval_trace
from minivm.outcomes import Decision, Normal, StepLimit, Ub, Violation
from oracle.exceptions import StepBudgetExceeded
from oracle.traces import SiteTrace
from profiler.records import RecordWriter

from .base import PROFILE_LOG_ENV, Binary, Toolchain, program_hash
from .configs import CompilerConfig, sanitizers_for
from .exceptions import CompileFailed
from .injection import ELIMINATE, MISS, NO_INJECTION, FnInjection
from .outcomes import NORMAL_EXIT, OTHER_CRASH, SAN_REPORT, TIMEOUT, RunOutcome, digest

logger = logging.getLogger(__name__)

SIM_COMPILER = 'sim'

# parsed programs kept for repeated builds and runs of the same source
PARSE_CACHE_SIZE = 64


@lru_cache(maxsize=PARSE_CACHE_SIZE)
def _parse(text: str):
    return parse_program(text)


class SimToolchain(Toolchain):
    def __init__(self, injection: FnInjection = NO_INJECTION, compiler_id: str = SIM_COMPILER,
                 identity: Optional[str] = None):
        self.injection = injection
        self.compiler_id = compiler_id
        # program hash the injection sees instead of the built source's own
        self.identity = identity

    def supports(self, cfg: CompilerConfig) -> bool:
        return cfg.family == 'sim'

    def compile(self, source_path, cfg: CompilerConfig, workdir,
                extra_sources: Sequence[Path] = ()) -> Binary:
        source_path = Path(source_path)
        text = source_path.read_text()
        try:
            _parse(text)
        except ParseError as exc:
            raise CompileFailed(source_path, f"{source_path.name}:{exc}") from None
        return Binary(source_path, source_path, cfg, tuple(cfg.flags()), program_hash(text))

    def policy(self, cfg: CompilerConfig, phash: str):
        def decide(violation: Violation) -> Decision:
            if cfg.sanitizer is None or cfg.sanitizer not in sanitizers_for(violation.kind):
                return Decision.IGNORE
            action = self.injection.decide(violation.kind, cfg, phash, violation.text or str(violation.site))
            if action == MISS:
                return Decision.IGNORE
            if action == ELIMINATE:
                return Decision.ELIDE
            return Decision.REPORT
        return decide

    def run_traced(self, binary: Binary, step_limit: Optional[int] = None,
                   env: Optional[Dict[str, str]] = None) -> Tuple[RunOutcome, SiteTrace]:
        ast = _parse(binary.source.read_text())
        policy = self.policy(binary.config, self.identity or binary.program_hash)
        log_path = (env or {}).get(PROFILE_LOG_ENV)
        writer = RecordWriter(log_path) if log_path else None
        try:
            result, trace = eval_trace(ast, step_limit, policy, writer)
        except VmError as exc:
            logger.warning(f"{binary.source.name} under {binary.config}: {exc}")
            return RunOutcome(OTHER_CRASH, signal=6, stderr_digest=digest(str(exc))), \
                SiteTrace.build([], terminal='crash')
        finally:
            if writer is not None:
                writer.close()
        return self._outcome(binary.config, result), trace

    def _outcome(self, cfg: CompilerConfig, result) -> RunOutcome:
        if isinstance(result, Ub):
            return RunOutcome(SAN_REPORT, 1, sanitizer=cfg.sanitizer, report_kind=result.kind.value,
                              report_line=result.site.line, stdout=result.stdout,
                              stderr_digest=digest(f"{result.kind}@{result.site}"))
        if isinstance(result, Normal):
            return RunOutcome(NORMAL_EXIT, result.exit_code, stdout=result.stdout)
        if isinstance(result, StepLimit):
            return RunOutcome(TIMEOUT, stdout=result.stdout)
        raise TypeError(f"unexpected interpreter result {result!r}")

    def execute(self, binary: Binary, timeout: Optional[float] = None,
                env: Optional[Dict[str, str]] = None) -> RunOutcome:
        outcome, _ = self.run_traced(binary, env=env)
        return outcome

    def trace(self, binary: Binary, step_budget: Optional[int] = None) -> SiteTrace:
        _, trace = self.run_traced(binary, step_limit=step_budget)
        if trace.truncated:
            raise StepBudgetExceeded(trace)
        return trace


def sim_trace(source_path, cfg: CompilerConfig, injection: FnInjection = NO_INJECTION,
              workdir=None) -> Tuple[RunOutcome, SiteTrace]:
    """Build and run source on the simulated toolchain, returning outcome and trace of one run."""
    tc = SimToolchain(injection, cfg.compiler_id)
    binary = tc.compile(source_path, cfg, workdir)
    step_limit = getattr(settings, 'UBF_VM_STEP_LIMIT', None)
    return tc.run_traced(binary, step_limit=step_limit)
