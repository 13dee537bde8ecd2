"""
Campaign state on disk.

    <root>/config.json        the campaign configuration
    <root>/programs/<sha>.c   UB programs, content addressed, with .meta sidecars
    <root>/verdicts.jsonl     every discrepant pair and its verdict
    <root>/findings.jsonl     FnBug verdicts, deduplicated
    <root>/progress.jsonl     completed seeds and their counters
    <root>/report.json        the last report

Logs are append-only, one JSON object per line; a torn last line from a
killed run is ignored on load.
"""
import json
import logging
import threading
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional

from lang.tree import SourceLoc
from synth.programs import UbProgram, load_program
from toolchain.base import program_hash
from toolchain.configs import CompilerConfig
from toolchain.outcomes import digest

from .exceptions import FindingNotFound

logger = logging.getLogger(__name__)

CONFIG_FILE = 'config.json'
VERDICTS_LOG = 'verdicts.jsonl'
FINDINGS_LOG = 'findings.jsonl'
PROGRESS_LOG = 'progress.jsonl'
REPORT_FILE = 'report.json'
INJECTION_FILE = 'injection.txt'


@dataclass(frozen=True)
class Finding:
    seed_id: str
    kind: str
    cfg_crash: str
    cfg_nocrash: str
    crash_site: str
    verdict: str
    program_hash: str
    campaign_seed: int = 0
    planted_site: str = ''
    reduced: str = ''
    planted_text: str = ''

    @property
    def nocrash(self) -> CompilerConfig:
        return CompilerConfig.parse(self.cfg_nocrash)

    @property
    def dedup_key(self) -> str:
        cfg = self.nocrash
        return '|'.join([cfg.compiler_id, cfg.sanitizer or '', cfg.opt_level, self.kind,
                         f"{self.program_hash[:16]}@{self.crash_site}"])

    @property
    def id(self) -> str:
        return digest(self.dedup_key)[:12]

    def to_dict(self):
        out = {'id': self.id}
        out.update(asdict(self))
        return out

    @classmethod
    def from_dict(cls, data) -> 'Finding':
        names = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in names})


def dedup(findings: Iterable[Finding]) -> List[Finding]:
    """First finding per dedup key, in order."""
    seen = set()
    out = []
    for finding in findings:
        if finding.dedup_key not in seen:
            seen.add(finding.dedup_key)
            out.append(finding)
    return out


def read_jsonl(path) -> List[Dict]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except ValueError:
            logger.warning(f"{path.name}:{lineno}: ignoring unreadable record")
    return records


class CampaignStore:
    """The files of one campaign. Writes go through a single lock."""

    def __init__(self, root):
        self.root = Path(root)
        self.programs = self.root / 'programs'
        self._lock = threading.Lock()
        self._keys = None

    def ensure(self):
        self.programs.mkdir(parents=True, exist_ok=True)

    def _append(self, name: str, record: Dict):
        with (self.root / name).open('a') as fh:
            fh.write(json.dumps(record, sort_keys=True) + '\n')

    # programs ----------------------------------------------------------------

    def put_program(self, program: UbProgram) -> Path:
        path = self.programs / f"{program_hash(program.source)}.c"
        with self._lock:
            if not path.exists():
                path.write_text(program.source)
                path.with_suffix('.meta').write_text(program.meta())
        return path

    def program_path(self, phash: str) -> Path:
        return self.programs / f"{phash}.c"

    def load_program(self, phash: str) -> UbProgram:
        return load_program(self.program_path(phash))

    # logs --------------------------------------------------------------------

    def record_verdict(self, finding: Finding) -> Optional[Finding]:
        """Log a discrepant pair; an FnBug verdict with a new dedup key also becomes a finding."""
        with self._lock:
            self._append(VERDICTS_LOG, finding.to_dict())
            if not finding.verdict.startswith('FnBug'):
                return None
            keys = self._dedup_keys()
            if finding.dedup_key in keys:
                logger.debug(f"duplicate finding {finding.dedup_key}")
                return None
            keys.add(finding.dedup_key)
            self._append(FINDINGS_LOG, finding.to_dict())
        logger.info(f"finding {finding.id}: {finding.kind} missed by {finding.cfg_nocrash} at {finding.crash_site}")
        return finding

    def _dedup_keys(self):
        if self._keys is None:
            self._keys = {f.dedup_key for f in self.findings()}
        return self._keys

    def mark_done(self, seed_id: str, counters: Dict[str, int]):
        with self._lock:
            self._append(PROGRESS_LOG, {'seed_id': seed_id, 'counters': dict(counters)})

    def completed(self) -> Dict[str, Dict[str, int]]:
        return {r['seed_id']: r.get('counters', {}) for r in read_jsonl(self.root / PROGRESS_LOG)}

    def verdicts(self) -> List[Finding]:
        """One verdict per (program, crash config, no-crash config); a resumed seed logs its pairs again."""
        seen = set()
        out = []
        for record in read_jsonl(self.root / VERDICTS_LOG):
            verdict = Finding.from_dict(record)
            key = (verdict.program_hash, verdict.cfg_crash, verdict.cfg_nocrash)
            if key not in seen:
                seen.add(key)
                out.append(verdict)
        return out

    def findings(self) -> List[Finding]:
        return dedup(Finding.from_dict(r) for r in read_jsonl(self.root / FINDINGS_LOG))

    def finding(self, finding_id: str) -> Finding:
        for finding in self.findings():
            if finding.id == finding_id:
                return finding
        raise FindingNotFound(finding_id)

    def update_finding(self, finding: Finding, **changes) -> Finding:
        """Rewrite the findings log with one finding changed."""
        updated = replace(finding, **changes)
        with self._lock:
            lines = [updated.to_dict() if f.id == finding.id else f.to_dict() for f in self.findings()]
            path = self.root / FINDINGS_LOG
            tmp = path.with_suffix('.tmp')
            tmp.write_text(''.join(json.dumps(r, sort_keys=True) + '\n' for r in lines))
            tmp.replace(path)
        return updated

    # config and report -------------------------------------------------------

    def write_json(self, name: str, data):
        path = self.root / name
        tmp = path.with_suffix('.tmp')
        tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')
        tmp.replace(path)

    def read_json(self, name: str):
        path = self.root / name
        return json.loads(path.read_text()) if path.exists() else None


def site_text(loc: Optional[SourceLoc]) -> str:
    return str(loc) if loc is not None else ''
