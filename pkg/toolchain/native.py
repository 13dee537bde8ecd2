"""
Adapter over a real gcc- or clang-style compiler driver.
"""
import logging
import os
import subprocess
from pathlib import Path
from typing import Dict, Optional, Sequence

from django.conf import settings

from lang.parser import DECLARATIONS
from oracle.traces import SiteTrace

from .base import Binary, Toolchain, program_hash
from .configs import CompilerConfig
from .exceptions import CompileFailed, ToolMissing, UnsupportedConfig
from .outcomes import classify
from .tracer import SANITIZER_ENV, trace_binary

logger = logging.getLogger(__name__)

PRELUDE_HEADER = 'ubf_prelude.h'


class NativeToolchain(Toolchain):
    def __init__(self, compiler_id: str, executable: str, debugger: Optional[str] = None,
                 symbolizer: Optional[str] = None):
        self.compiler_id = compiler_id
        self.executable = executable
        self.debugger = debugger
        self.symbolizer = symbolizer

    def compile(self, source_path, cfg: CompilerConfig, workdir,
                extra_sources: Sequence[Path] = ()) -> Binary:
        if not self.supports(cfg):
            raise UnsupportedConfig(f"{self.compiler_id} cannot build {cfg}")
        source_path = Path(source_path)
        workdir = Path(workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        header = workdir / PRELUDE_HEADER
        header.write_text(DECLARATIONS)
        output = workdir / f"{source_path.stem}-{cfg.config_id}"
        flags = cfg.flags()
        cmd = [self.executable, str(source_path), *map(str, extra_sources), *flags,
               '-include', str(header), '-o', str(output)]
        logger.debug(f"compiling: {' '.join(cmd)}")
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, errors='replace',
                                  timeout=getattr(settings, 'UBF_COMPILE_TIMEOUT', 60))
        except FileNotFoundError:
            raise ToolMissing(self.executable) from None
        except subprocess.TimeoutExpired:
            raise CompileFailed(source_path, "compilation timed out") from None
        if proc.returncode != 0:
            logger.error(f"{self.compiler_id} failed on {source_path.name} ({cfg})")
            raise CompileFailed(source_path, proc.stderr)
        return Binary(output, source_path, cfg, tuple(flags), program_hash(source_path.read_text()))

    def execute(self, binary: Binary, timeout: Optional[float] = None,
                env: Optional[Dict[str, str]] = None):
        run_env = dict(os.environ)
        run_env.update(SANITIZER_ENV)
        run_env.update(env or {})
        try:
            proc = subprocess.run([str(binary.path)], capture_output=True, text=True, errors='replace',
                                  env=run_env, timeout=self.exec_timeout(timeout))
        except subprocess.TimeoutExpired as exc:
            stdout = exc.stdout.decode('utf-8', 'replace') if isinstance(exc.stdout, bytes) else (exc.stdout or '')
            return classify(-9, stdout, '', timed_out=True)
        return classify(proc.returncode, proc.stdout, proc.stderr)

    def trace(self, binary: Binary, step_budget: Optional[int] = None) -> SiteTrace:
        if not self.debugger:
            raise ToolMissing(getattr(settings, 'UBF_DEBUGGER', 'gdb'))
        if not self.symbolizer:
            raise ToolMissing(getattr(settings, 'UBF_SYMBOLIZER', 'llvm-symbolizer'))
        return trace_binary(binary, self.debugger, self.symbolizer, step_budget)
