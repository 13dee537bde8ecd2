"""
Source-to-source instrumentation of seeds with logging intrinsics.

The seed must be in canonical form (see lang.printer.canonicalize): the
instrumented tree is built from a fresh parse of the seed's printed text, so
node ids of the copy equal the seed's and every hook refers to a seed node.

Hooks:
    operands  __ubf_value / __ubf_pair around the operands of a matched site
    cond      __ubf_value around a branch condition
    access    __ubf_access around a dereferenced pointer
    range     __ubf_range after the declaration of a loggable object
    scope     __ubf_scope after the declaration of a loggable object
    malloc    malloc() replaced by __ubf_malloc()
    free      free() replaced by __ubf_free()
"""
import copy
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional

from pycparser import c_ast

from lang import build as B
from lang import types as T
from lang.exceptions import LangError
from lang.parser import parse_program
from lang.printer import print_program, reparse
from lang.tree import Ast, has_side_effects
from match.kinds import UbKind
from match.sites import MatchSite, core_op, get_matched_exprs, is_step

from .exceptions import InstrumentError

logger = logging.getLogger(__name__)

OPERANDS = 'operands'
COND = 'cond'
ACCESS = 'access'
RANGE = 'range'
SCOPE = 'scope'
MALLOC = 'malloc'
FREE = 'free'

GLOBAL = 'global'
STACK = 'stack'
HEAP = 'heap'


@dataclass(frozen=True)
class Hook:
    pid: int
    role: str
    node_id: int
    storage: str = ''


@dataclass
class InstrumentedProgram:
    ast: Ast
    hooks: Dict[int, Hook]
    seed: Ast
    skipped: List[MatchSite] = field(default_factory=list)

    @property
    def source(self) -> str:
        return print_program(self.ast)


def role_of(site: MatchSite) -> str:
    if site.construct in ('if(x)', 'while(x)'):
        return COND
    if site.construct == '*p':
        return ACCESS
    return OPERANDS


class _Instrumenter:
    def __init__(self, seed: Ast):
        self.seed = seed
        self.work = reparse(seed)
        if len(self.work.nodes) != len(seed.nodes) or self.work.fingerprint() != seed.fingerprint():
            raise InstrumentError("seed is not in canonical form; canonicalize it first")
        self.hooks: Dict[int, Hook] = {}
        self.skipped: List[MatchSite] = []

    def hook(self, role, node_id, storage='') -> int:
        pid = len(self.hooks) + 1
        self.hooks[pid] = Hook(pid, role, node_id, storage)
        return pid

    # matched sites -----------------------------------------------------------

    def sites(self, sites: Iterable[MatchSite]):
        planned = []
        seen = set()
        for site in sites:
            role = role_of(site)
            if (site.node_id, role) in seen:
                continue
            seen.add((site.node_id, role))
            if self.seed.enclosing_statement(site.node_id) is None:
                raise InstrumentError(f"no enclosing statement for {site}")
            node = self.work.node(site.node_id)
            lvalue_copy = None
            if role == OPERANDS and isinstance(node, (c_ast.Assignment, c_ast.UnaryOp)):
                lvalue = node.expr if is_step(node) else node.lvalue
                if has_side_effects(lvalue):
                    logger.debug(f"skipping {site}: lvalue has side effects")
                    self.skipped.append(site)
                    continue
                lvalue_copy = copy.deepcopy(lvalue)
            planned.append((site, role, node, lvalue_copy))
        # parents are looked up before any wrapping changes the tree
        parents = {site.node_id: self.work.node(self.work.parent(site.node_id)) for site, role, node, _ in planned
                   if role == COND or (role == OPERANDS and is_step(node))}
        # increments are rewritten first so later wrappers see the replacement
        replaced = {}
        for site, role, node, lvalue_copy in planned:
            if role == OPERANDS and is_step(node):
                pid = self.hook(role, site.node_id)
                replacement = self._step(pid, node, lvalue_copy)
                B.replace_child(parents[site.node_id], node, replacement)
                replaced[id(node)] = replacement
        for site, role, node, lvalue_copy in planned:
            if role == OPERANDS and is_step(node):
                continue
            node = replaced.get(id(node), node)
            pid = self.hook(role, site.node_id)
            if role == COND:
                ctype = self._type(site.node_id)
                B.replace_child(parents[site.node_id], node, self._value(pid, 0, node, ctype))
            elif role == ACCESS:
                ptype = self._type(self.seed.nid(self.seed.node(site.node_id).expr))
                node.expr = B.cast(ptype, B.call('__ubf_access', B.int_literal(pid), node.expr))
            elif isinstance(node, c_ast.ArrayRef):
                ctype = self._type(self.seed.nid(self.seed.node(site.node_id).subscript))
                node.subscript = self._value(pid, 0, node.subscript, ctype)
            elif isinstance(node, c_ast.BinaryOp):
                seed_node = self.seed.node(site.node_id)
                node.left = self._value(pid, 0, node.left, self._type(self.seed.nid(seed_node.left)))
                node.right = self._value(pid, 1, node.right, self._type(self.seed.nid(seed_node.right)))
            else:
                rtype = self._type(self.seed.nid(self.seed.node(site.node_id).rvalue))
                node.rvalue = B.cast(rtype, B.call('__ubf_pair', B.int_literal(pid), lvalue_copy, node.rvalue))

    @staticmethod
    def _step(pid, node, lvalue_copy):
        """`++x` as `x += 1` logging (x, 1); postfix forms subtract the step back out."""
        op = core_op(node)
        logged = B.cast(T.INT, B.call('__ubf_pair', B.int_literal(pid), lvalue_copy, B.int_literal(1)))
        replacement = B.assign(node.expr, logged, op + '=')
        if node.op.startswith('p'):
            replacement = B.binop('-' if op == '+' else '+', replacement, B.int_literal(1))
        return replacement

    def _type(self, nid):
        ctype = T.decay(self.seed.type_of(nid))
        return T.canonical(ctype) if isinstance(ctype, T.IntType) else ctype

    @staticmethod
    def _value(pid, slot, expr, ctype):
        return B.cast(ctype, B.call('__ubf_value', B.int_literal(pid), B.int_literal(slot), expr))

    # objects -----------------------------------------------------------------

    def loggable(self, decl_nid) -> bool:
        decl = self.seed.node(decl_nid)
        if not isinstance(decl, c_ast.Decl) or not decl.name or 'extern' in (decl.storage or ()):
            return False
        ctype = self.seed.decl_type(decl_nid)
        if isinstance(ctype, T.FuncType):
            return False
        if isinstance(ctype, (T.ArrayType, T.StructType)):
            return True
        return decl_nid in self.seed.scopes.address_taken

    def range_statements(self, decl_nid, storage):
        name = self.seed.node(decl_nid).name
        scope = self.seed.scopes.decl_scope[decl_nid]
        rid = self.hook(RANGE, decl_nid, storage)
        sid = self.hook(SCOPE, decl_nid, storage)
        address = B.unop('&', B.ident(name))
        return [
            B.call('__ubf_range', B.int_literal(rid), address,
                   B.unop('sizeof', B.ident(name))),
            B.call('__ubf_scope', B.int_literal(sid), copy.deepcopy(address), B.int_literal(scope)),
        ]

    def objects(self):
        seed = self.seed
        for function in seed.functions:
            body = self.work.node(seed.nid(function.body))
            for nid, node in list(seed.walk(seed.nid(function.body))):
                if isinstance(node, c_ast.Compound):
                    self._log_block(nid)
            entry = []
            args = function.decl.type.args
            for param in (args.params if args is not None else ()):
                param_nid = seed.nid(param) if isinstance(param, c_ast.Decl) and param.name else None
                if param_nid is not None and not isinstance(seed.decl_type(param_nid), T.ArrayType) and self.loggable(param_nid):
                    entry.extend(self.range_statements(param_nid, STACK))
            if function.decl.name == 'main':
                for ext in seed.unit.ext:
                    if isinstance(ext, c_ast.Decl) and self.loggable(seed.nid(ext)):
                        entry.extend(self.range_statements(seed.nid(ext), GLOBAL))
            if entry:
                body.block_items = entry + list(body.block_items or ())

    def _log_block(self, block_nid):
        seed_block = self.seed.node(block_nid)
        items = []
        for seed_item, item in zip(seed_block.block_items or (), self.work.node(block_nid).block_items or ()):
            items.append(item)
            if isinstance(seed_item, c_ast.Decl) and self.loggable(self.seed.nid(seed_item)):
                storage = GLOBAL if 'static' in (seed_item.storage or ()) else STACK
                items.extend(self.range_statements(self.seed.nid(seed_item), storage))
        self.work.node(block_nid).block_items = items

    def heap(self):
        for nid, node in self.seed.walk():
            if not isinstance(node, c_ast.FuncCall) or not isinstance(node.name, c_ast.ID):
                continue
            if node.name.name not in ('malloc', 'free'):
                continue
            role = MALLOC if node.name.name == 'malloc' else FREE
            call = self.work.node(nid)
            pid = self.hook(role, nid, HEAP)
            call.name = B.ident('__ubf_' + role)
            call.args.exprs.insert(0, B.int_literal(pid))


def instrument(ast: Ast, kind: Optional[UbKind], sites: Iterable[MatchSite]) -> InstrumentedProgram:
    """Instrumented copy of a canonical seed logging the given sites, object ranges and heap events."""
    sites = list(sites)
    if kind is not None:
        matched = {s.node_id for s in get_matched_exprs(ast, kind)}
        for site in sites:
            if site.kind != kind or site.node_id not in matched:
                raise InstrumentError(f"{site} is not a {kind} site of this program")
    tool = _Instrumenter(ast)
    # operand wrapping first: the block rewrite below replaces block item lists
    tool.sites(sorted(sites, key=lambda s: (s.loc, s.node_id, s.kind.value)))
    tool.objects()
    tool.heap()
    text = print_program(tool.work)
    try:
        instrumented = parse_program(text)
    except LangError as exc:
        raise InstrumentError(f"instrumented program does not parse: {exc}") from exc
    logger.debug(f"{len(tool.hooks)} hooks, {len(tool.skipped)} sites skipped")
    return InstrumentedProgram(instrumented, tool.hooks, ast, tool.skipped)
