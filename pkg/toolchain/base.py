import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple

from django.conf import settings

from oracle.traces import SiteTrace

from .configs import CompilerConfig
from .outcomes import RunOutcome

PROFILE_LOG_ENV = 'UBF_PROFILE_LOG'


def program_hash(text: str) -> str:
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class Binary:
    """A built program. For the simulated toolchain `path` is the source itself."""
    path: Path
    source: Path
    config: CompilerConfig
    flags: Tuple[str, ...]
    program_hash: str


class Toolchain:
    """Adapter over one compiler: build, run and trace programs of the subset."""

    compiler_id = ''

    def supports(self, cfg: CompilerConfig) -> bool:
        return cfg.compiler_id == self.compiler_id

    def profile_config(self) -> CompilerConfig:
        """Unsanitized build used to profile seeds."""
        return CompilerConfig(self.compiler_id, 'O0', None)

    def compile(self, source_path, cfg: CompilerConfig, workdir,
                extra_sources: Sequence[Path] = ()) -> Binary:
        raise NotImplementedError

    def execute(self, binary: Binary, timeout: Optional[float] = None,
                env: Optional[Dict[str, str]] = None) -> RunOutcome:
        raise NotImplementedError

    def trace(self, binary: Binary, step_budget: Optional[int] = None) -> SiteTrace:
        raise NotImplementedError

    @staticmethod
    def exec_timeout(timeout):
        return timeout if timeout is not None else getattr(settings, 'UBF_EXEC_TIMEOUT', 10)
