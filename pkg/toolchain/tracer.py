"""
Executed-site traces of native binaries.

gdb runs the binary in batch mode under a Python script that single-steps
instructions while the pc maps to the program's source file and steps out of
every other frame. The recorded pcs are mapped to line and column by
llvm-symbolizer, since gdb does not expose columns.
"""
import logging
import os
import subprocess
from pathlib import Path
from typing import List, Optional

from django.conf import settings

from lang.tree import SourceLoc
from oracle.exceptions import DebuggerSpawnFailure, NoDebugInfo, StepBudgetExceeded
from oracle.traces import SiteTrace, Terminal

from .exceptions import RunTimeout, ToolMissing

logger = logging.getLogger(__name__)

GDB_SCRIPT = '''\
import os
import gdb

SOURCE = os.environ["UBF_TRACE_SOURCE"]
BUDGET = int(os.environ["UBF_TRACE_BUDGET"])
OUT = os.environ["UBF_TRACE_OUT"]

state = {"exit": None, "signal": None}


def on_exit(event):
    state["exit"] = getattr(event, "exit_code", 0)


def on_stop(event):
    if isinstance(event, gdb.SignalEvent):
        state["signal"] = event.stop_signal


def running():
    return state["exit"] is None and state["signal"] is None and gdb.selected_inferior().pid != 0


def in_source(pc):
    sal = gdb.find_pc_line(pc)
    return sal.symtab is not None and os.path.basename(sal.symtab.filename) == SOURCE


gdb.events.exited.connect(on_exit)
gdb.events.stop.connect(on_stop)
gdb.execute("set pagination off")
gdb.execute("set confirm off")
gdb.execute("set startup-with-shell off")
gdb.execute("break main")
gdb.execute("run", to_string=True)

binary = os.path.realpath(gdb.objfiles()[0].filename)
with open(OUT, "w") as out:
    for line in gdb.execute("info proc mappings", to_string=True).splitlines():
        fields = line.split()
        if fields and fields[0].startswith("0x") and os.path.realpath(fields[-1]) == binary:
            out.write("MAP %s\\n" % fields[0])
            break
    steps = 0
    last = None
    while running():
        if steps >= BUDGET:
            out.write("BUDGET\\n")
            break
        try:
            pc = gdb.selected_frame().pc()
        except gdb.error:
            break
        command = "finish"
        if in_source(pc):
            command = "stepi"
            if pc != last:
                out.write("PC %x\\n" % pc)
                last = pc
        steps += 1
        try:
            gdb.execute(command, to_string=True)
        except gdb.error:
            try:
                gdb.execute("stepi", to_string=True)
            except gdb.error:
                break
    if state["signal"] is not None:
        out.write("SIGNAL %s\\n" % state["signal"])
    elif state["exit"] is not None:
        out.write("EXIT %d\\n" % state["exit"])
'''

SANITIZER_ENV = {
    'ASAN_OPTIONS': 'detect_leaks=0:halt_on_error=1:symbolize=1',
    'UBSAN_OPTIONS': 'halt_on_error=1:print_stacktrace=1',
    'MSAN_OPTIONS': 'halt_on_error=1',
}


def _is_pie(path: Path) -> bool:
    header = path.read_bytes()[:18]
    return len(header) == 18 and header[:4] == b'\x7fELF' and int.from_bytes(header[16:18], 'little') == 3


def symbolize(symbolizer: str, binary: Path, addresses: List[int], source_name: str) -> List[SourceLoc]:
    """Source locations of addresses within source_name, in input order (unmapped addresses dropped)."""
    if not addresses:
        return []
    query = ''.join(f"0x{a:x}\n" for a in addresses)
    try:
        proc = subprocess.run([symbolizer, f'--obj={binary}'], input=query, capture_output=True,
                              text=True, timeout=getattr(settings, 'UBF_DEBUG_TIMEOUT', 120))
    except FileNotFoundError:
        raise ToolMissing(symbolizer) from None
    locs = []
    for block in proc.stdout.strip('\n').split('\n\n'):
        lines = block.splitlines()
        if len(lines) < 2:
            continue
        parts = lines[1].rsplit(':', 2)
        if len(parts) != 3 or os.path.basename(parts[0]) != source_name:
            continue
        line, column = int(parts[1]), int(parts[2])
        if line > 0:
            locs.append(SourceLoc(line, column))
    return locs


def trace_binary(binary, debugger: str, symbolizer: str, step_budget: Optional[int] = None,
                 timeout: Optional[float] = None) -> SiteTrace:
    path = Path(binary.path)
    workdir = path.parent
    script = workdir / 'ubf_trace.py'
    script.write_text(GDB_SCRIPT)
    steps = workdir / f"{path.name}.steps"
    budget = step_budget if step_budget is not None else getattr(settings, 'UBF_STEP_BUDGET', 2_000_000)
    env = dict(os.environ)
    env.update(SANITIZER_ENV)
    env.update({
        'UBF_TRACE_SOURCE': Path(binary.source).name,
        'UBF_TRACE_BUDGET': str(budget),
        'UBF_TRACE_OUT': str(steps),
    })
    cmd = [debugger, '-nx', '-batch', '-x', str(script), '--args', str(path)]
    logger.debug(f"tracing {path.name}: {' '.join(cmd)}")
    try:
        proc = subprocess.run(cmd, capture_output=True, text=True, errors='replace', env=env,
                              timeout=timeout or getattr(settings, 'UBF_DEBUG_TIMEOUT', 120))
    except FileNotFoundError:
        raise DebuggerSpawnFailure(f"debugger not found: {debugger}") from None
    except subprocess.TimeoutExpired:
        raise RunTimeout(f"debugger session on {path.name} timed out") from None
    if not steps.exists():
        raise DebuggerSpawnFailure(proc.stderr.strip() or f"{debugger} produced no trace")

    base = 0
    pcs = []
    terminal, truncated = Terminal.CRASH, False
    for line in steps.read_text().splitlines():
        tag, _, value = line.partition(' ')
        if tag == 'MAP':
            base = int(value, 16)
        elif tag == 'PC':
            pcs.append(int(value, 16))
        elif tag == 'BUDGET':
            terminal, truncated = Terminal.TIMEOUT, True
        elif tag == 'EXIT' and int(value) == 0:
            terminal = Terminal.NORMAL_EXIT
    if not pcs:
        raise NoDebugInfo(f"no instruction of {binary.source} was stepped in {path.name}")
    bias = base if _is_pie(path) else 0
    trace = SiteTrace.build(symbolize(symbolizer, path, [pc - bias for pc in pcs], Path(binary.source).name),
                            truncated, terminal)
    if not trace.sites:
        raise NoDebugInfo(f"{path.name} has no line table for {binary.source}")
    if truncated:
        raise StepBudgetExceeded(trace)
    return trace
