"""
Compiler configurations and the UB kind to sanitizer table.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

from match.kinds import UbKind

from .exceptions import UnsupportedConfig

OPT_LEVELS = ['O0', 'O1', 'Os', 'O2', 'O3']
OPT_CHOICES = [(level, f"-{level}") for level in OPT_LEVELS]

ASAN = 'ASan'
UBSAN = 'UBSan'
MSAN = 'MSan'
SANITIZERS = [ASAN, UBSAN, MSAN]
SANITIZER_CHOICES = [
    (ASAN, 'AddressSanitizer'),
    (UBSAN, 'UndefinedBehaviorSanitizer'),
    (MSAN, 'MemorySanitizer'),
]

_SANITIZERS_BY_KIND = {
    UbKind.BUF_OVERFLOW_ARRAY: [ASAN, UBSAN],
    UbKind.BUF_OVERFLOW_POINTER: [ASAN],
    UbKind.USE_AFTER_FREE: [ASAN],
    UbKind.USE_AFTER_SCOPE: [ASAN],
    UbKind.NULL_PTR_DEREF: [UBSAN],
    UbKind.INTEGER_OVERFLOW: [UBSAN],
    UbKind.SHIFT_OVERFLOW: [UBSAN],
    UbKind.DIVIDE_BY_ZERO: [UBSAN],
    UbKind.USE_OF_UNINIT_MEMORY: [MSAN],
}

# Reports are always fatal so a detected UB is a crash.
SANITIZER_FLAGS = {
    'gnu': {
        ASAN: ['-fsanitize=address', '-fno-sanitize-recover=all'],
        UBSAN: ['-fsanitize=undefined', '-fno-sanitize-recover=all'],
    },
    'llvm': {
        ASAN: ['-fsanitize=address', '-fsanitize-address-use-after-scope', '-fno-sanitize-recover=all'],
        UBSAN: ['-fsanitize=undefined', '-fno-sanitize-recover=all'],
        MSAN: ['-fsanitize=memory', '-fno-sanitize-recover=all'],
    },
    'sim': {
        ASAN: ['-fsanitize=address'],
        UBSAN: ['-fsanitize=undefined'],
        MSAN: ['-fsanitize=memory'],
    },
}


def sanitizers_for(kind: UbKind) -> List[str]:
    """Sanitizers able to detect kind."""
    return list(_SANITIZERS_BY_KIND[UbKind(kind)])


def family_of(compiler_id: str) -> str:
    name = compiler_id.lower()
    if name.startswith('sim'):
        return 'sim'
    if 'clang' in name or 'llvm' in name:
        return 'llvm'
    return 'gnu'


@dataclass(frozen=True)
class CompilerConfig:
    compiler_id: str
    opt_level: str = 'O0'
    sanitizer: Optional[str] = None
    extra_flags: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.opt_level not in OPT_LEVELS:
            raise UnsupportedConfig(f"unknown optimization level {self.opt_level}")
        if self.sanitizer is not None:
            if self.sanitizer not in SANITIZERS:
                raise UnsupportedConfig(f"unknown sanitizer {self.sanitizer}")
            if self.sanitizer not in SANITIZER_FLAGS[self.family]:
                raise UnsupportedConfig(f"{self.sanitizer} is not supported by {self.compiler_id}")

    @property
    def family(self) -> str:
        return family_of(self.compiler_id)

    @property
    def config_id(self) -> str:
        return f"{self.compiler_id}-{self.opt_level}-{self.sanitizer or 'plain'}"

    def flags(self) -> List[str]:
        flags = ['-g', f'-{self.opt_level}']
        if self.sanitizer is not None:
            flags += SANITIZER_FLAGS[self.family][self.sanitizer]
        return flags + list(self.extra_flags)

    def __str__(self):
        return self.config_id

    def label(self) -> str:
        """compiler:opt:sanitizer, the form parse() accepts."""
        return f"{self.compiler_id}:{self.opt_level}:{self.sanitizer or ''}"

    @classmethod
    def parse(cls, text: str) -> 'CompilerConfig':
        parts = text.strip().split(':')
        if len(parts) < 2:
            raise UnsupportedConfig(f"expected compiler:opt[:sanitizer], got '{text}'")
        sanitizer = parts[2] if len(parts) > 2 and parts[2] else None
        return cls(parts[0], parts[1], sanitizer, tuple(parts[3:]))
