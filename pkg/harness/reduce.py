"""
Reducing findings with an external reducer (C-Reduce style).

The reducer is called as `<reducer> <interestingness script> <program>` in a
scratch directory and shrinks the program in place. The script asks the
`oracle` command whether the pair still yields FnBug.
"""
import logging
import shlex
import subprocess
import sys
from pathlib import Path
from typing import Optional

from django.conf import settings

from oracle.exceptions import OracleError
from toolchain.configs import CompilerConfig
from toolchain.exceptions import ToolchainError
from toolchain.injection import FnInjection

from .exceptions import ReducerFailed
from .findings import INJECTION_FILE, CampaignStore, Finding
from .replay import judge_source

logger = logging.getLogger(__name__)

PROGRAM_NAME = 'prog.c'
SCRIPT_NAME = 'interesting.sh'


def interestingness_script(finding: Finding, injection: Optional[Path]) -> str:
    manage = Path(settings.BASE_DIR) / 'manage.py'
    command = [sys.executable, str(manage), 'oracle', PROGRAM_NAME,
               '--pair', f"{finding.cfg_crash},{finding.cfg_nocrash}", '--expect', 'FnBug',
               '--identity', finding.program_hash]
    if injection is not None:
        command += ['--injection', str(injection)]
    return '#!/bin/sh\nexec ' + ' '.join(shlex.quote(part) for part in command) + ' >/dev/null 2>&1\n'


def reduce_hook(finding: Finding, store: CampaignStore, cfg, injection: FnInjection) -> Optional[str]:
    """Reduced source of finding, stored next to the program. No-op without a reducer."""
    if not cfg.reducer:
        return None
    workdir = store.root / 'reduce' / finding.id
    workdir.mkdir(parents=True, exist_ok=True)
    program = workdir / PROGRAM_NAME
    program.write_text(store.program_path(finding.program_hash).read_text())
    injection_path = store.root / INJECTION_FILE
    script = workdir / SCRIPT_NAME
    script.write_text(interestingness_script(finding, injection_path if injection_path.exists() else None))
    script.chmod(0o755)

    # Reducer gets the script and the program, in that order
    argv = shlex.split(cfg.reducer) + [str(script), str(program)]
    logger.info(f"reducing finding {finding.id}: {' '.join(argv)}")
    try:
        proc = subprocess.run(argv, cwd=workdir, capture_output=True, text=True,
                              timeout=getattr(settings, 'UBF_REDUCE_TIMEOUT', 3600))
    except FileNotFoundError:
        raise ReducerFailed(f"reducer not found: {argv[0]}") from None
    except subprocess.TimeoutExpired:
        raise ReducerFailed('reducer timed out') from None
    if proc.returncode != 0:
        raise ReducerFailed(f"reducer exited with {proc.returncode}: {proc.stderr.strip()[:200]}")

    # Re-check the reduced program under the original pair
    try:
        result = judge_source(program, CompilerConfig.parse(finding.cfg_crash), finding.nocrash,
                              workdir / 'check', injection, cfg.step_budget, cfg.exec_timeout,
                              identity=finding.program_hash)
    except (ToolchainError, OracleError) as exc:
        raise ReducerFailed(f"reduced program no longer builds or traces: {exc}") from exc
    if result.verdict is None or not result.verdict.is_fn_bug:
        raise ReducerFailed('reduced program lost the discrepancy')

    # Store next to the original program
    reduced = program.read_text()
    target = store.programs / f"{finding.program_hash}.reduced.c"
    target.write_text(reduced)
    store.update_finding(finding, reduced=target.name)
    return reduced
