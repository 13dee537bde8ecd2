"""
The campaign loop: seeds in, findings out.

Every seed is profiled once, UB programs are generated for each requested
kind, and each program is built and run under every matrix config whose
sanitizer covers its kind. Crash/no-crash pairs go to the crash-site oracle.
Workers process seeds; the calling thread is the only writer of the logs and
writes results in seed order, so a resumed run ends with the same findings.
"""
import logging
import random
import shutil
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from tqdm import tqdm

from lang.exceptions import LangError
from lang.printer import canonicalize
from minivm.exceptions import VmError
from oracle.exceptions import OracleError
from oracle.verdicts import INCONCLUSIVE, TraceCache, Verdict, crash_site_verdict
from profiler.exceptions import ProfileError
from profiler.profile import profile_seed
from synth.programs import UbProgram, generate
from toolchain.base import program_hash
from toolchain.configs import CompilerConfig, family_of, sanitizers_for
from toolchain.discovery import discover_tools, get_toolchain
from toolchain.exceptions import ToolchainError, ToolMissing
from toolchain.injection import NO_INJECTION, FnInjection

from .config import CampaignConfig
from .exceptions import ReducerFailed
from .findings import CONFIG_FILE, INJECTION_FILE, REPORT_FILE, CampaignStore, Finding, site_text
from .pairs import NO_DISCREPANCY, SKIP, candidate_pairs, classify_pair
from .reduce import reduce_hook
from .report import CampaignReport, build_report
from .sources import Seed, iter_seeds

logger = logging.getLogger(__name__)


@dataclass
class SeedResult:
    seed_id: str
    counters: Counter = field(default_factory=Counter)
    records: List[Finding] = field(default_factory=list)


@dataclass
class _Run:
    """A built program under one config."""
    tc: object
    binary: object
    outcome: object


def load_injection(cfg: CampaignConfig) -> FnInjection:
    return FnInjection.load(cfg.injection) if cfg.injection else NO_INJECTION


class CampaignRunner:
    def __init__(self, cfg: CampaignConfig, injection: Optional[FnInjection] = None):
        self.cfg = cfg
        self.root = Path(cfg.output_root)
        self.store = CampaignStore(self.root)
        self.injection = injection if injection is not None else load_injection(cfg)
        self.traces = TraceCache(self.root / 'traces')
        native = any(family_of(c.compiler_id) != 'sim' for c in cfg.matrix)
        self.tools = discover_tools() if native else None
        # built up front, workers only read this
        self._toolchains: Dict[str, object] = {}
        for matrix_cfg in cfg.matrix:
            if matrix_cfg.compiler_id in self._toolchains:
                continue
            try:
                self._toolchains[matrix_cfg.compiler_id] = get_toolchain(matrix_cfg, self.injection, self.tools)
            except ToolMissing as exc:
                logger.error(f"{matrix_cfg.compiler_id}: {exc}; its pairs will be skipped")
                self._toolchains[matrix_cfg.compiler_id] = None

    def toolchain(self, compiler_id: str):
        tc = self._toolchains.get(compiler_id)
        if tc is None:
            raise ToolMissing(compiler_id)
        return tc

    # seeds -------------------------------------------------------------------

    def process_seed(self, seed: Seed) -> SeedResult:
        result = SeedResult(seed.seed_id, Counter(seeds=1))
        workdir = self.root / 'work' / seed.seed_id
        try:
            ast = canonicalize(seed.text)
            profiler_tc = self.toolchain(self.cfg.matrix[0].compiler_id)
            profile = profile_seed(ast, self.cfg.kinds, profiler_tc, workdir / 'profile', self.cfg.exec_timeout)
        except (LangError, ProfileError, ToolchainError, VmError) as exc:
            logger.warning(f"seed {seed.seed_id} skipped: {exc}")
            result.counters['seeds_skipped'] += 1
            return result

        rng = random.Random(f"{self.cfg.campaign_seed}:{seed.seed_id}")
        for kind in self.cfg.kinds:
            if not any(len(self.cfg.configs_for(s)) > 1 for s in sanitizers_for(kind)):
                continue
            skips = []
            programs = generate(ast, kind, profile, self.cfg.verify, rng, seed.seed_id, skips)
            result.counters['programs'] += len(programs)
            result.counters['synthesis_skipped'] += len(skips)
            for program in programs:
                result.records.extend(self.test_program(program, workdir, result.counters))
        logger.info(f"seed {seed.seed_id}: {result.counters['programs']} programs, "
                    f"{result.counters['discrepant']} discrepancies")
        return result

    # programs ----------------------------------------------------------------

    def build_and_run(self, path: Path, cfg: CompilerConfig, workdir: Path) -> Optional[_Run]:
        try:
            tc = self.toolchain(cfg.compiler_id)
            binary = tc.compile(path, cfg, workdir)
            return _Run(tc, binary, tc.execute(binary, self.cfg.exec_timeout))
        except ToolchainError as exc:
            logger.error(f"{path.name} under {cfg}: {exc}")
            return None

    def test_program(self, program: UbProgram, workdir: Path, counters: Counter) -> List[Finding]:
        path = self.store.put_program(program)
        phash = program_hash(program.source)
        bindir = workdir / 'bin' / phash[:16]
        records = []
        for sanitizer in sanitizers_for(program.kind):
            configs = self.cfg.configs_for(sanitizer)
            if len(configs) < 2:
                continue
            # Build and run once per config, then compare pairwise
            runs = {cfg: self.build_and_run(path, cfg, bindir) for cfg in configs}
            for a, b in candidate_pairs(configs):
                counters['pairs'] += 1
                if runs[a] is None or runs[b] is None:
                    counters['pairs_skipped'] += 1
                    continue
                decision = classify_pair(runs[a].outcome, runs[b].outcome)
                if decision.label == SKIP:
                    logger.warning(f"{path.name} {a} vs {b}: pair skipped ({decision.reason})")
                    counters['pairs_skipped'] += 1
                    continue
                if decision.label == NO_DISCREPANCY:
                    counters['no_discrepancy'] += 1
                    continue
                # Oracle decides between a missed report and an optimized-away site
                crash, nocrash = (a, b) if decision.crash == 'a' else (b, a)
                verdict, crash_site = self.judge(runs[crash], runs[nocrash])
                counters['discrepant'] += 1
                counters[verdict.label] += 1
                records.append(Finding(program.seed_id, program.kind.value, crash.label(), nocrash.label(),
                                       site_text(crash_site), str(verdict), phash, self.cfg.campaign_seed,
                                       str(program.planted_site), planted_text=program.planted_text))
        return records

    def judge(self, crash: _Run, nocrash: _Run) -> Tuple[Verdict, object]:
        try:
            return crash_site_verdict(crash.binary, nocrash.binary, crash.tc, self.cfg.step_budget,
                                      cache=self.traces, tc_n=nocrash.tc)
        except (OracleError, ToolchainError) as exc:
            logger.error(f"oracle failed on {crash.binary.config} vs {nocrash.binary.config}: {exc}")
            return Verdict(INCONCLUSIVE, str(exc)), None

    # the loop ----------------------------------------------------------------

    def prepare(self):
        self.store.ensure()
        self.store.write_json(CONFIG_FILE, self.cfg.to_dict())
        target = self.root / INJECTION_FILE
        if self.cfg.injection:
            if Path(self.cfg.injection).resolve() != target.resolve():
                shutil.copyfile(self.cfg.injection, target)
        elif self.injection:
            target.write_text(self.injection.dumps())

    def commit(self, result: SeedResult):
        for record in result.records:
            finding = self.store.record_verdict(record)
            if finding is not None and self.cfg.reducer:
                try:
                    reduce_hook(finding, self.store, self.cfg, self.injection)
                except ReducerFailed as exc:
                    logger.warning(f"finding {finding.id} kept unreduced: {exc}")
        self.store.mark_done(result.seed_id, result.counters)

    def run(self, progress: bool = False) -> CampaignReport:
        self.prepare()
        done = self.store.completed()
        if done:
            logger.info(f"resuming {self.cfg.name}: {len(done)} seeds already done")
        pending = [seed for seed in iter_seeds(self.cfg) if seed.seed_id not in done]
        with ThreadPoolExecutor(max_workers=max(1, self.cfg.workers)) as pool:
            results = pool.map(self.process_seed, pending)
            for result in tqdm(results, total=len(pending), desc=self.cfg.name, unit='seed', disable=not progress):
                self.commit(result)
        report = build_report(self.root)
        self.store.write_json(REPORT_FILE, report.to_dict())
        logger.info(f"{self.cfg.name}: {len(report.findings)} findings from {report.counters.get('seeds', 0)} seeds")
        return report


def run_campaign(cfg: CampaignConfig, injection: Optional[FnInjection] = None,
                 progress: bool = False) -> CampaignReport:
    return CampaignRunner(cfg, injection).run(progress)


def programs_for_seed(seed: Seed, cfg: CampaignConfig, workdir) -> List[UbProgram]:
    """The programs a campaign with cfg generates from seed."""
    runner = CampaignRunner(cfg, NO_INJECTION)
    ast = canonicalize(seed.text)
    profile = profile_seed(ast, cfg.kinds, runner.toolchain(cfg.matrix[0].compiler_id), Path(workdir))
    rng = random.Random(f"{cfg.campaign_seed}:{seed.seed_id}")
    programs = []
    for kind in cfg.kinds:
        if any(len(cfg.configs_for(s)) > 1 for s in sanitizers_for(kind)):
            programs.extend(generate(ast, kind, profile, cfg.verify, rng, seed.seed_id))
    return programs
