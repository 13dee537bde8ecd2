"""
Executed-site traces of a binary.
"""
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Tuple

from lang.tree import SourceLoc

from .exceptions import OracleError


class Terminal(str, Enum):
    CRASH = 'crash'
    NORMAL_EXIT = 'normal-exit'
    TIMEOUT = 'timeout'

    def __str__(self):
        return self.value


def collapse(sites: Iterable[SourceLoc]) -> Tuple[SourceLoc, ...]:
    """Drop consecutive repeats."""
    out = []
    for site in sites:
        if not out or out[-1] != site:
            out.append(site)
    return tuple(out)


@dataclass(frozen=True)
class SiteTrace:
    sites: Tuple[SourceLoc, ...]
    truncated: bool = False
    terminal: Terminal = Terminal.NORMAL_EXIT

    @classmethod
    def build(cls, sites, truncated=False, terminal=Terminal.NORMAL_EXIT) -> 'SiteTrace':
        return cls(collapse(sites), truncated, Terminal(terminal))

    @property
    def last(self) -> Optional[SourceLoc]:
        return self.sites[-1] if self.sites else None

    def __contains__(self, site) -> bool:
        return site in set(self.sites)

    def __len__(self):
        return len(self.sites)

    def dumps(self) -> str:
        """Cache format: a header line, then one 'line offset' pair per line."""
        header = f"# terminal={self.terminal} truncated={int(self.truncated)}\n"
        return header + ''.join(f"{s.line} {s.offset}\n" for s in self.sites)

    @classmethod
    def loads(cls, text: str) -> 'SiteTrace':
        terminal, truncated = Terminal.NORMAL_EXIT, False
        sites = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                fields = dict(part.split('=', 1) for part in line[1:].split() if '=' in part)
                terminal = Terminal(fields.get('terminal', terminal))
                truncated = fields.get('truncated', '0') == '1'
                continue
            try:
                line_no, offset = line.split()
                sites.append(SourceLoc(int(line_no), int(offset)))
            except ValueError:
                raise OracleError(f"malformed trace line {lineno}: {line!r}") from None
        return cls(tuple(sites), truncated, terminal)
