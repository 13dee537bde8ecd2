"""
Locating compilers and debugging tools, and choosing a toolchain per config.
"""
import logging
import shutil
from dataclasses import dataclass, field
from typing import Dict, Optional

from django.conf import settings

from .configs import CompilerConfig, family_of
from .exceptions import ToolMissing
from .injection import NO_INJECTION, FnInjection
from .native import NativeToolchain
from .sim import SimToolchain

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiscoveredTools:
    compilers: Dict[str, str] = field(default_factory=dict)
    debugger: Optional[str] = None
    symbolizer: Optional[str] = None

    @property
    def can_trace(self) -> bool:
        return bool(self.debugger and self.symbolizer)


def discover_tools() -> DiscoveredTools:
    """Compilers named by UBF_CC_<ID>, plus the debugger and symbolizer, resolved on PATH."""
    compilers = {}
    for compiler_id, executable in getattr(settings, 'UBF_COMPILERS', {}).items():
        path = shutil.which(executable)
        if path:
            compilers[compiler_id] = path
        else:
            logger.warning(f"compiler {compiler_id} not found at {executable}")
    debugger = shutil.which(getattr(settings, 'UBF_DEBUGGER', 'gdb'))
    symbolizer = shutil.which(getattr(settings, 'UBF_SYMBOLIZER', 'llvm-symbolizer'))
    return DiscoveredTools(compilers, debugger, symbolizer)


def get_toolchain(cfg: CompilerConfig, injection: FnInjection = NO_INJECTION,
                  tools: Optional[DiscoveredTools] = None, identity: Optional[str] = None):
    """Toolchain able to build cfg. identity stands in for the program hash in injection rules."""
    if family_of(cfg.compiler_id) == 'sim':
        return SimToolchain(injection, cfg.compiler_id, identity)
    tools = tools or discover_tools()
    executable = tools.compilers.get(cfg.compiler_id)
    if executable is None:
        raise ToolMissing(cfg.compiler_id)
    return NativeToolchain(cfg.compiler_id, executable, tools.debugger, tools.symbolizer)
