"""
Execution profiles: what one run of an instrumented seed observed.

Records are decoded in order against the set of live objects. A new range
that overlaps live objects retires them (their stack slots were reused), an
identical one is the same object seen again (a static local or a re-entered
block). Accesses are resolved once, at the first occurrence of their hook.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pycparser import c_ast

from lang import types as T
from lang.tree import Ast, SourceLoc
from match.sites import MatchSite, match_all
from toolchain.base import PROFILE_LOG_ENV
from toolchain.exceptions import RunTimeout
from toolchain.outcomes import TIMEOUT

from . import records as R
from .exceptions import (CorruptLog, NotAPointer, NotLive, ProfileError, RunCrashed, UnknownAddress,
                         UnknownDeclaration)
from .instrument import ACCESS, COND, HEAP, RANGE, InstrumentedProgram, instrument, role_of
from .runtime import RUNTIME_NAME, RUNTIME_SOURCE

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class MemObject:
    base: int
    size: int
    storage: str
    alloc_site: SourceLoc
    freed: Optional[SourceLoc] = None
    decl: Optional[int] = None
    scope: Optional[int] = None

    def contains(self, address: int) -> bool:
        return self.base <= address < self.base + self.size

    def overlaps(self, base: int, size: int) -> bool:
        return self.base < base + max(size, 1) and base < self.base + max(self.size, 1)

    def to_dict(self):
        out = asdict(self)
        out['alloc_site'] = str(self.alloc_site)
        out['freed'] = str(self.freed) if self.freed else None
        return out


@dataclass(frozen=True)
class Freed:
    """An access whose address lies in a heap block already released."""
    obj: MemObject


@dataclass
class SiteRecord:
    count: int = 0
    values: Dict[int, int] = field(default_factory=dict)
    address: Optional[int] = None
    target: Union[MemObject, Freed, None] = None
    _slot_counts: Dict[int, int] = field(default_factory=dict, repr=False)

    def slot_values(self) -> Tuple[int, ...]:
        return tuple(self.values[slot] for slot in sorted(self.values))


@dataclass
class ExecutionProfile:
    seed: Ast
    values: Dict[Tuple[int, str], SiteRecord] = field(default_factory=dict)
    objects: List[MemObject] = field(default_factory=list)
    stdout: str = ''

    def entry(self, site: MatchSite) -> Optional[SiteRecord]:
        return self.values.get((site.node_id, role_of(site)))

    def dumps(self) -> str:
        """Canonical JSON form; identical for identical runs of a deterministic seed."""
        values = {}
        for (nid, role), rec in sorted(self.values.items()):
            target = rec.target
            if isinstance(target, Freed):
                target = {'freed': self.objects.index(target.obj)}
            elif isinstance(target, MemObject):
                target = {'object': self.objects.index(target)}
            values[f"{nid}:{role}"] = {
                'count': rec.count,
                'values': list(rec.slot_values()),
                'offset': self._offset(rec),
                'target': target,
            }
        return json.dumps({
            'values': values,
            'objects': [self._stable(o) for o in self.objects],
            'stdout': self.stdout,
        }, sort_keys=True, indent=1)

    @staticmethod
    def _offset(rec):
        if rec.address is None:
            return None
        obj = rec.target.obj if isinstance(rec.target, Freed) else rec.target
        return rec.address - obj.base if obj is not None else None

    @staticmethod
    def _stable(obj: MemObject):
        # absolute addresses differ between runs of a native binary
        out = obj.to_dict()
        del out['base']
        return out


def _slot_types(seed: Ast, nid: int, role: str):
    node = seed.node(nid)
    if role == COND:
        parts = [node]
    elif isinstance(node, c_ast.ArrayRef):
        parts = [node.subscript]
    elif isinstance(node, c_ast.BinaryOp):
        parts = [node.left, node.right]
    else:
        parts = [node.lvalue, node.rvalue]
    types = []
    for part in parts:
        ctype = T.decay(seed.type_of(part))
        types.append(T.canonical(ctype) if isinstance(ctype, T.IntType) else None)
    return types


class _Decoder:
    def __init__(self, program: InstrumentedProgram):
        self.program = program
        self.seed = program.seed
        self.profile = ExecutionProfile(self.seed)
        self.live: List[MemObject] = []
        self.released: List[MemObject] = []
        self._types = {}

    def feed(self, rec: R.Record):
        hook = self.program.hooks.get(rec.hook)
        if hook is None:
            raise CorruptLog(f"record for unknown hook {rec.hook}")
        getattr(self, '_' + rec.name.lower())(hook, rec)

    def _range(self, hook, rec):
        base, size = rec.a, rec.b
        for obj in self.live:
            if obj.base == base and obj.size == size and obj.decl == (hook.node_id if hook.role == RANGE else None):
                return
        self.live = [o for o in self.live if not o.overlaps(base, size)]
        self.released = [o for o in self.released if not o.overlaps(base, size)]
        obj = MemObject(base, size, hook.storage, self.seed.locate(hook.node_id),
                        decl=hook.node_id if hook.role == RANGE else None)
        self.profile.objects.append(obj)
        self.live.append(obj)

    def _free(self, hook, rec):
        if rec.a == 0:
            return
        for obj in self.live:
            if obj.storage == HEAP and obj.base == rec.a:
                obj.freed = self.seed.locate(hook.node_id)
                self.live.remove(obj)
                self.released.append(obj)
                return
        logger.debug(f"free of untracked address 0x{rec.a:x}")

    def _scope(self, hook, rec):
        for obj in reversed(self.live):
            if obj.base == rec.a and obj.decl == hook.node_id:
                obj.scope = rec.b
                return

    def _value(self, hook, rec):
        key = (hook.node_id, hook.role)
        entry = self.profile.values.setdefault(key, SiteRecord())
        slot = rec.a
        seen = entry._slot_counts.get(slot, 0) + 1
        entry._slot_counts[slot] = seen
        if slot == 0:
            entry.count = seen
        if seen == 1:
            types = self._types.get(key)
            if types is None:
                types = self._types[key] = _slot_types(self.seed, *key)
            ctype = types[slot] if slot < len(types) else None
            entry.values[slot] = ctype.wrap(rec.b) if ctype is not None else rec.b

    def _access(self, hook, rec):
        entry = self.profile.values.setdefault((hook.node_id, ACCESS), SiteRecord())
        entry.count += 1
        if entry.count == 1:
            entry.address = rec.a
            entry.target = self.resolve(rec.a)

    def resolve(self, address: int):
        for obj in reversed(self.live):
            if obj.contains(address):
                return obj
        for obj in reversed(self.released):
            if obj.contains(address):
                return Freed(obj)
        return None


def decode_profile(program: InstrumentedProgram, records, stdout: str = '') -> ExecutionProfile:
    decoder = _Decoder(program)
    for rec in records:
        decoder.feed(rec)
    decoder.profile.stdout = stdout
    return decoder.profile


def run_profile(program: InstrumentedProgram, tc, workdir, timeout: Optional[float] = None) -> ExecutionProfile:
    """Build and run an instrumented seed once and decode its log."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    source = workdir / 'instrumented.c'
    source.write_text(program.source)
    runtime = workdir / RUNTIME_NAME
    runtime.write_text(RUNTIME_SOURCE)
    log = workdir / 'profile.log'
    if log.exists():
        log.unlink()
    binary = tc.compile(source, tc.profile_config(), workdir, extra_sources=[runtime])
    outcome = tc.execute(binary, timeout, env={PROFILE_LOG_ENV: str(log)})
    if outcome.status == TIMEOUT:
        raise RunTimeout(f"profiling run of {source} timed out")
    if not outcome.exited_normally:
        raise RunCrashed(outcome)
    profile = decode_profile(program, R.read_records(log), outcome.stdout)
    logger.debug(f"profile: {len(profile.values)} live sites, {len(profile.objects)} objects")
    return profile


def profile_seed(seed: Ast, kinds, tc, workdir, timeout: Optional[float] = None) -> ExecutionProfile:
    """One profiling run covering the sites of every kind."""
    sites = match_all(seed, kinds)
    program = instrument(seed, None, sites)
    return run_profile(program, tc, workdir, timeout)


# queries ---------------------------------------------------------------------

def q_liv(profile: ExecutionProfile, site: MatchSite) -> bool:
    entry = profile.entry(site)
    return entry is not None and entry.count > 0


def _live_entry(profile, site) -> SiteRecord:
    entry = profile.entry(site)
    if entry is None or entry.count == 0:
        raise NotLive(site)
    return entry


def q_val(profile: ExecutionProfile, site: MatchSite) -> Tuple[int, ...]:
    """Operand values at the first execution of site."""
    entry = _live_entry(profile, site)
    if role_of(site) == ACCESS:
        raise ProfileError(f"{site} records an address, not operand values")
    return entry.slot_values()


def q_addr(profile: ExecutionProfile, site: MatchSite) -> int:
    """Address dereferenced at the first execution of site."""
    if role_of(site) != ACCESS:
        raise NotAPointer(site)
    return _live_entry(profile, site).address


def q_mem(profile: ExecutionProfile, site: MatchSite) -> Union[MemObject, Freed]:
    if role_of(site) != ACCESS:
        raise NotAPointer(site)
    entry = _live_entry(profile, site)
    if entry.target is None:
        raise UnknownAddress(site, entry.address)
    return entry.target


def q_scp(profile: ExecutionProfile, decl_or_site) -> int:
    """Scope id of a declaration node id, or of the innermost scope around a site."""
    scopes = profile.seed.scopes
    if isinstance(decl_or_site, MatchSite):
        nid = decl_or_site.node_id
        if nid in scopes.node_scope:
            return scopes.node_scope[nid]
        raise UnknownDeclaration(f"no scope known for {decl_or_site}")
    if decl_or_site in scopes.decl_scope:
        return scopes.decl_scope[decl_or_site]
    if decl_or_site in scopes.node_scope:
        return scopes.node_scope[decl_or_site]
    raise UnknownDeclaration(f"no scope known for node {decl_or_site}")
