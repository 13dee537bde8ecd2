"""
False-negative injection for the simulated toolchain.

An injection file is line oriented; each line is a rule:

    miss kind=<kind|*> opt=<level|*> prob=<0..1> [program=<sha256 prefix>] [sanitizer=<name>]
    eliminate kind=... opt=... prob=... [program=...] [sanitizer=...]

`miss` makes the sanitizer stay silent at a violation while the code still
runs; `eliminate` removes the violating site altogether, as an optimizer
would. Rules are tried in order and the first one that selects a case wins,
so no case is both missed and eliminated. Selection is a deterministic draw
over the violating statement's text and the rule, never random, so a
reduced variant that keeps the planted statement gets the same decision.
"""
import hashlib
import shlex
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from match.kinds import UbKind

from .configs import OPT_LEVELS, SANITIZERS, CompilerConfig
from .exceptions import InvalidInjection

MISS = 'miss'
ELIMINATE = 'eliminate'
ACTIONS = (MISS, ELIMINATE)


@dataclass(frozen=True)
class InjectionRule:
    action: str
    kind: Optional[UbKind] = None
    opt: Optional[str] = None
    prob: float = 1.0
    program: Optional[str] = None
    sanitizer: Optional[str] = None

    def matches(self, kind: UbKind, cfg: CompilerConfig, program_hash: str) -> bool:
        if self.kind is not None and self.kind != kind:
            return False
        if self.opt is not None and self.opt != cfg.opt_level:
            return False
        if self.sanitizer is not None and self.sanitizer != cfg.sanitizer:
            return False
        if self.program is not None and not program_hash.startswith(self.program):
            return False
        return True

    def draw(self, site_text: str, index: int) -> float:
        key = f"{site_text}@{index}".encode()
        return int(hashlib.sha256(key).hexdigest()[:8], 16) / float(1 << 32)

    def dumps(self) -> str:
        fields = [self.action,
                  f"kind={self.kind.value if self.kind else '*'}",
                  f"opt={self.opt or '*'}",
                  f"prob={self.prob:g}"]
        if self.program:
            fields.append(f"program={self.program}")
        if self.sanitizer:
            fields.append(f"sanitizer={self.sanitizer}")
        return ' '.join(fields)


@dataclass(frozen=True)
class FnInjection:
    rules: Tuple[InjectionRule, ...] = ()

    def decide(self, kind: UbKind, cfg: CompilerConfig, program_hash: str, site_text: str) -> Optional[str]:
        """MISS, ELIMINATE or None for a violation of kind in the statement site_text."""
        for index, rule in enumerate(self.rules):
            if rule.matches(kind, cfg, program_hash) and rule.draw(site_text, index) < rule.prob:
                return rule.action
        return None

    def __bool__(self):
        return bool(self.rules)

    def dumps(self) -> str:
        return ''.join(rule.dumps() + '\n' for rule in self.rules)

    @classmethod
    def parse(cls, text: str) -> 'FnInjection':
        rules = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            words = shlex.split(line)
            action = words[0]
            if action not in ACTIONS:
                raise InvalidInjection(lineno, f"unknown action '{action}'")
            fields = {}
            for word in words[1:]:
                if '=' not in word:
                    raise InvalidInjection(lineno, f"expected key=value, got '{word}'")
                key, value = word.split('=', 1)
                fields[key] = value
            rules.append(cls._rule(lineno, action, fields))
        return cls(tuple(rules))

    @staticmethod
    def _rule(lineno, action, fields) -> InjectionRule:
        unknown = set(fields) - {'kind', 'opt', 'prob', 'program', 'sanitizer'}
        if unknown:
            raise InvalidInjection(lineno, f"unknown fields {sorted(unknown)}")
        kind = fields.get('kind', '*')
        opt = fields.get('opt', '*')
        sanitizer = fields.get('sanitizer')
        try:
            kind = None if kind == '*' else UbKind.parse(kind)
            prob = float(fields.get('prob', '1'))
        except ValueError as exc:
            raise InvalidInjection(lineno, str(exc)) from None
        if opt != '*' and opt not in OPT_LEVELS:
            raise InvalidInjection(lineno, f"unknown optimization level '{opt}'")
        if sanitizer is not None and sanitizer not in SANITIZERS:
            raise InvalidInjection(lineno, f"unknown sanitizer '{sanitizer}'")
        if not 0.0 <= prob <= 1.0:
            raise InvalidInjection(lineno, f"probability {prob} outside [0, 1]")
        return InjectionRule(action, kind, None if opt == '*' else opt, prob,
                             fields.get('program'), sanitizer)

    @classmethod
    def load(cls, path) -> 'FnInjection':
        return cls.parse(Path(path).read_text())


NO_INJECTION = FnInjection()
