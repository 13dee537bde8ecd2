from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from lang.tree import SourceLoc
from match.kinds import UbKind


class Decision(str, Enum):
    """What happens when a violation is reached."""
    REPORT = 'report'
    IGNORE = 'ignore'
    ELIDE = 'elide'


@dataclass(frozen=True)
class Violation:
    kind: UbKind
    site: SourceLoc
    detail: str = ''
    # whitespace-normalized source of the violating statement
    text: str = field(default='', compare=False)

    def __str__(self):
        return f"{self.kind} at {self.site}: {self.detail}"


@dataclass(frozen=True)
class Normal:
    exit_code: int
    stdout: str
    suppressed: Tuple[Tuple[Violation, Decision], ...] = ()

    @property
    def first_suppressed(self) -> Optional[Tuple[Violation, Decision]]:
        return self.suppressed[0] if self.suppressed else None


@dataclass(frozen=True)
class Ub:
    kind: UbKind
    site: SourceLoc
    detail: str = ''
    stdout: str = ''

    @property
    def violation(self) -> Violation:
        return Violation(self.kind, self.site, self.detail)


@dataclass(frozen=True)
class StepLimit:
    stdout: str = ''
    steps: int = 0
