"""
Classification of a finished process into a RunOutcome.
"""
import hashlib
import re
from dataclasses import dataclass
from typing import Optional

from .configs import ASAN, MSAN, UBSAN

SAN_REPORT = 'SanReport'
NORMAL_EXIT = 'NormalExit'
TIMEOUT = 'Timeout'
OTHER_CRASH = 'OtherCrash'

STATUS_CHOICES = [
    (SAN_REPORT, 'Sanitizer report'),
    (NORMAL_EXIT, 'Normal exit'),
    (TIMEOUT, 'Timeout'),
    (OTHER_CRASH, 'Other crash'),
]

_ASAN = re.compile(r'ERROR: AddressSanitizer: ([\w-]+)')
_UBSAN = re.compile(r'(?P<file>[^\s:]+):(?P<line>\d+):(?:\d+:)? runtime error: (?P<message>[^\n]*)')
_MSAN = re.compile(r'MemorySanitizer: ([\w-]+)')
_FRAME_LOCATION = re.compile(r'#\d+ .*? (?P<file>[^\s:]+\.c):(?P<line>\d+)')


@dataclass(frozen=True)
class RunOutcome:
    status: str
    exit_code: Optional[int] = None
    signal: Optional[int] = None
    sanitizer: Optional[str] = None
    report_kind: str = ''
    report_line: Optional[int] = None
    stdout: str = ''
    stderr_digest: str = ''

    @property
    def crashed(self) -> bool:
        return self.status == SAN_REPORT

    @property
    def exited_normally(self) -> bool:
        return self.status == NORMAL_EXIT

    def __str__(self):
        if self.status == SAN_REPORT:
            where = f" line {self.report_line}" if self.report_line else ''
            return f"{self.status}({self.sanitizer} {self.report_kind}{where})"
        if self.status == NORMAL_EXIT:
            return f"{self.status}({self.exit_code})"
        if self.status == OTHER_CRASH:
            return f"{self.status}(signal {self.signal})"
        return self.status


def digest(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8', 'replace')).hexdigest()[:16]


def _report_line(stderr: str) -> Optional[int]:
    m = _FRAME_LOCATION.search(stderr)
    return int(m.group('line')) if m else None


def classify(returncode: int, stdout: str, stderr: str, timed_out: bool = False) -> RunOutcome:
    """Map a process result to exactly one outcome."""
    fingerprint = digest(stderr)
    if timed_out:
        return RunOutcome(TIMEOUT, stdout=stdout, stderr_digest=fingerprint)
    m = _ASAN.search(stderr)
    if m:
        return RunOutcome(SAN_REPORT, returncode, sanitizer=ASAN, report_kind=m.group(1),
                          report_line=_report_line(stderr), stdout=stdout, stderr_digest=fingerprint)
    m = _UBSAN.search(stderr)
    if m:
        return RunOutcome(SAN_REPORT, returncode, sanitizer=UBSAN, report_kind=m.group('message').strip(),
                          report_line=int(m.group('line')), stdout=stdout, stderr_digest=fingerprint)
    m = _MSAN.search(stderr)
    if m:
        return RunOutcome(SAN_REPORT, returncode, sanitizer=MSAN, report_kind=m.group(1),
                          report_line=_report_line(stderr), stdout=stdout, stderr_digest=fingerprint)
    if returncode < 0:
        return RunOutcome(OTHER_CRASH, signal=-returncode, stdout=stdout, stderr_digest=fingerprint)
    return RunOutcome(NORMAL_EXIT, returncode, stdout=stdout, stderr_digest=fingerprint)
