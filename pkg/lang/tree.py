"""
Parsed programs: the pycparser tree plus node ids, source locations, scope
resolution and expression types.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

from pycparser import c_ast

from . import types as T
from .exceptions import LangError, ParseError, UnknownNode
from .locations import Locator, TokenIndex
from .scopes import BUILTIN, resolve_scopes

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class SourceLoc:
    line: int
    offset: int

    def __str__(self):
        return f"{self.line},{self.offset}"

    @classmethod
    def parse(cls, text: str) -> 'SourceLoc':
        line, offset = text.replace(':', ',').split(',')
        return cls(int(line), int(offset))


_CHAR_PTR = T.PointerType(T.CHAR)
_VOID_PTR = T.PointerType(T.VOID)

# Functions and logging intrinsics declared by the parsing prelude.
BUILTIN_FUNCTIONS = {
    'printf': T.FuncType(T.INT, (_CHAR_PTR,), True),
    'malloc': T.FuncType(_VOID_PTR, (T.ULONG,)),
    'free': T.FuncType(T.VOID, (_VOID_PTR,)),
    '__ubf_value': T.FuncType(T.LLONG, (T.INT, T.INT, T.LLONG)),
    '__ubf_pair': T.FuncType(T.LLONG, (T.INT, T.LLONG, T.LLONG)),
    '__ubf_access': T.FuncType(_VOID_PTR, (T.INT, _VOID_PTR)),
    '__ubf_range': T.FuncType(T.VOID, (T.INT, _VOID_PTR, T.ULONG)),
    '__ubf_malloc': T.FuncType(_VOID_PTR, (T.INT, T.ULONG)),
    '__ubf_free': T.FuncType(T.VOID, (T.INT, _VOID_PTR)),
    '__ubf_scope': T.FuncType(T.VOID, (T.INT, _VOID_PTR, T.INT)),
}

STATEMENT_SLOTS = {
    'If': ('iftrue', 'iffalse'),
    'While': ('stmt',),
    'For': ('stmt',),
    'FuncDef': ('body',),
}

ARITH_OPS = frozenset({'+', '-', '*', '/', '%', '&', '|', '^'})
SHIFT_OPS = frozenset({'<<', '>>'})
COMPARE_OPS = frozenset({'<', '>', '<=', '>=', '==', '!=', '&&', '||'})


def slot_base(slot: str) -> str:
    return slot.split('[', 1)[0]


def const_eval(node) -> int:
    """Value of an integer constant expression (array dimensions, case-free subset)."""
    if isinstance(node, c_ast.Constant):
        if node.type == 'char':
            return T.parse_char_literal(node.value)
        return T.parse_int_literal(node.value)[0]
    if isinstance(node, c_ast.UnaryOp) and node.op in ('-', '+', '~'):
        value = const_eval(node.expr)
        return {'-': -value, '+': value, '~': ~value}[node.op]
    if isinstance(node, c_ast.BinaryOp) and node.op in ('+', '-', '*', '/', '%', '<<', '>>'):
        a, b = const_eval(node.left), const_eval(node.right)
        if node.op == '/':
            return int(a / b)
        if node.op == '%':
            return a - int(a / b) * b
        return {'+': a + b, '-': a - b, '*': a * b, '<<': a << b, '>>': a >> b}[node.op]
    if isinstance(node, c_ast.Cast):
        return const_eval(node.expr)
    raise LangError("array dimension is not an integer constant")


class Ast:
    """A parsed program of the C subset.

    Node ids are preorder indices over the translation unit, so they are stable
    for a given text. `origin` points at the tree an instrumented or mutated
    program was derived from.
    """

    def __init__(self, unit: c_ast.FileAST, includes=(), source: str = '', origin: 'Ast' = None):
        self.unit = unit
        self.includes = list(includes)
        self.source = source
        self.origin = origin
        self.nodes: List[c_ast.Node] = []
        self.parents: List[Optional[int]] = []
        self.slots: List[Optional[str]] = []
        self._ids: Dict[int, int] = {}
        self._number()
        self.locs = self._locate_all()
        self.structs: Dict[str, T.StructType] = {}
        self._decl_types: Dict[int, object] = {}
        self._expr_types: Dict[int, object] = {}
        self._collect_structs()
        self.scopes = resolve_scopes(self, set(BUILTIN_FUNCTIONS))

    # numbering and locations -------------------------------------------------

    def _number(self):
        stack = [(self.unit, None, None)]
        while stack:
            node, parent, slot = stack.pop()
            nid = len(self.nodes)
            self._ids[id(node)] = nid
            self.nodes.append(node)
            self.parents.append(parent)
            self.slots.append(slot)
            for child_slot, child in reversed(list(node.children())):
                stack.append((child, nid, child_slot))

    def _locate_all(self):
        locator = Locator(TokenIndex(self.source))
        tokens = locator.ix.tokens
        locs = []
        for nid, node in enumerate(self.nodes):
            if nid == 0:
                locs.append(SourceLoc(1, 1))
                continue
            try:
                i = locator.loc_token(node, self.is_statement(nid) or self.parents[nid] == 0)
            except (IndexError, TypeError, KeyError):
                i = None
            if i is None or not 0 <= i < len(tokens):
                locs.append(locs[self.parents[nid]])
            else:
                locs.append(SourceLoc(tokens[i].line, tokens[i].column))
        return locs

    def nid(self, node) -> int:
        try:
            return self._ids[id(node)]
        except KeyError:
            raise UnknownNode(repr(type(node).__name__)) from None

    def node(self, nid: int) -> c_ast.Node:
        if not isinstance(nid, int) or not 0 <= nid < len(self.nodes):
            raise UnknownNode(nid)
        return self.nodes[nid]

    def locate(self, nid: int) -> SourceLoc:
        self.node(nid)
        return self.locs[nid]

    def parent(self, nid: int) -> Optional[int]:
        self.node(nid)
        return self.parents[nid]

    def ancestors(self, nid: int):
        parent = self.parents[nid]
        while parent is not None:
            yield parent
            parent = self.parents[parent]

    def is_statement(self, nid: int) -> bool:
        parent = self.parents[nid]
        if parent is None:
            return False
        pnode = self.nodes[parent]
        slot = slot_base(self.slots[nid])
        if isinstance(pnode, c_ast.Compound):
            return slot == 'block_items'
        return slot in STATEMENT_SLOTS.get(type(pnode).__name__, ())

    def enclosing_statement(self, nid: int) -> Optional[int]:
        """Innermost statement inside a function that contains nid (nid itself included)."""
        current = nid
        while current is not None:
            if isinstance(self.nodes[current], c_ast.FuncDef):
                return None
            if self.is_statement(current) and not isinstance(self.nodes[self.parents[current]], c_ast.FuncDef):
                return current
            current = self.parents[current]
        return None

    def enclosing_function(self, nid: int) -> Optional[int]:
        for anc in [nid, *self.ancestors(nid)]:
            if isinstance(self.nodes[anc], c_ast.FuncDef):
                return anc
        return None

    def walk(self, root=None):
        """Preorder (nid, node) pairs below root (the whole unit by default)."""
        start = 0 if root is None else root
        end = start + 1
        while end < len(self.nodes) and self._within(end, start):
            end += 1
        for nid in range(start, end):
            yield nid, self.nodes[nid]

    def _within(self, nid, root):
        while nid is not None and nid > root:
            nid = self.parents[nid]
        return nid == root

    @property
    def functions(self) -> List[c_ast.FuncDef]:
        return [ext for ext in self.unit.ext if isinstance(ext, c_ast.FuncDef)]

    @property
    def globals(self) -> List[c_ast.Decl]:
        return [ext for ext in self.unit.ext
                if isinstance(ext, c_ast.Decl) and not isinstance(ext.type, c_ast.FuncDecl)]

    def function(self, name: str) -> Optional[c_ast.FuncDef]:
        nid = self.scopes.functions.get(name)
        return self.nodes[nid] if nid is not None else None

    def declaration_of(self, id_nid: int) -> Optional[int]:
        """Decl node id an identifier use resolves to (None for prelude names)."""
        target = self.scopes.resolution.get(id_nid)
        if target is None or target == BUILTIN:
            return None
        return target

    def names(self) -> set:
        return {n.name for n in self.nodes if isinstance(n, (c_ast.ID, c_ast.Decl)) and n.name}

    # types -----------------------------------------------------------------

    def _collect_structs(self):
        for nid, node in enumerate(self.nodes):
            if isinstance(node, c_ast.Struct) and node.decls is not None:
                struct = self.struct(node.name)
                if struct.complete:
                    loc = self.locs[nid]
                    raise ParseError(loc.line, loc.offset, f"redefinition of struct {node.name}")
                members = [(d.name, self.type_of_declarator(d.type)) for d in node.decls]
                struct.layout(members)

    def struct(self, tag: str) -> T.StructType:
        if tag not in self.structs:
            self.structs[tag] = T.StructType(tag)
        return self.structs[tag]

    def type_of_declarator(self, node):
        if isinstance(node, c_ast.TypeDecl):
            return self.type_of_declarator(node.type)
        if isinstance(node, c_ast.IdentifierType):
            ctype = T.scalar_from_names(node.names)
            if ctype is None:
                raise LangError(f"unsupported type {' '.join(node.names)}")
            return ctype
        if isinstance(node, c_ast.Struct):
            return self.struct(node.name)
        if isinstance(node, c_ast.PtrDecl):
            return T.PointerType(self.type_of_declarator(node.type))
        if isinstance(node, c_ast.ArrayDecl):
            return T.ArrayType(self.type_of_declarator(node.type), const_eval(node.dim))
        if isinstance(node, c_ast.FuncDecl):
            params = []
            variadic = False
            for p in (node.args.params if node.args is not None else ()):
                if isinstance(p, c_ast.EllipsisParam):
                    variadic = True
                    continue
                ptype = self.type_of_declarator(p.type)
                if not isinstance(ptype, T.VoidType):
                    params.append(T.decay(ptype))
            return T.FuncType(self.type_of_declarator(node.type), tuple(params), variadic)
        if isinstance(node, c_ast.Typename):
            return self.type_of_declarator(node.type)
        if isinstance(node, c_ast.Decl):
            return self.type_of_declarator(node.type)
        raise LangError(f"unsupported declarator {type(node).__name__}")

    def decl_type(self, decl_nid: int):
        if decl_nid not in self._decl_types:
            self._decl_types[decl_nid] = self.type_of_declarator(self.nodes[decl_nid].type)
        return self._decl_types[decl_nid]

    def type_of(self, node_or_nid):
        """Static type of an expression (arrays are not decayed)."""
        nid = node_or_nid if isinstance(node_or_nid, int) else self.nid(node_or_nid)
        if nid not in self._expr_types:
            self._expr_types[nid] = self._infer(nid, self.nodes[nid])
        return self._expr_types[nid]

    def _infer(self, nid, n):
        if isinstance(n, c_ast.ID):
            target = self.scopes.resolution.get(nid)
            if target == BUILTIN:
                return BUILTIN_FUNCTIONS[n.name]
            return self.decl_type(target)
        if isinstance(n, c_ast.Constant):
            if n.type == 'char':
                return T.INT
            if n.type == 'string':
                return T.ArrayType(T.CHAR, len(n.value))
            return T.parse_int_literal(n.value)[1]
        if isinstance(n, c_ast.UnaryOp):
            if n.op == 'sizeof':
                return T.ULONG
            inner = self.type_of(n.expr)
            if n.op in ('-', '+', '~'):
                return T.promote(inner)
            if n.op == '!':
                return T.INT
            if n.op == '*':
                target = T.decay(inner)
                if not isinstance(target, T.PointerType):
                    raise LangError("dereference of a non-pointer")
                return target.target
            if n.op == '&':
                return T.PointerType(inner)
            return inner
        if isinstance(n, c_ast.BinaryOp):
            left, right = T.decay(self.type_of(n.left)), T.decay(self.type_of(n.right))
            if n.op in COMPARE_OPS:
                return T.INT
            if n.op in SHIFT_OPS:
                return T.promote(left)
            if isinstance(left, T.PointerType) and isinstance(right, T.PointerType):
                return T.LONG
            if isinstance(left, T.PointerType):
                return left
            if isinstance(right, T.PointerType):
                return right
            return T.usual_arithmetic(left, right)
        if isinstance(n, c_ast.Assignment):
            return T.decay(self.type_of(n.lvalue))
        if isinstance(n, c_ast.Cast):
            return self.type_of_declarator(n.to_type)
        if isinstance(n, c_ast.ArrayRef):
            base = T.decay(self.type_of(n.name))
            if not isinstance(base, T.PointerType):
                base = T.decay(self.type_of(n.subscript))
            return base.target
        if isinstance(n, c_ast.StructRef):
            base = self.type_of(n.name)
            if n.type == '->':
                base = T.decay(base).target
            return base.field(n.field.name).type
        if isinstance(n, c_ast.FuncCall):
            ftype = self.type_of(n.name)
            return ftype.ret
        if isinstance(n, c_ast.TernaryOp):
            a, b = T.decay(self.type_of(n.iftrue)), T.decay(self.type_of(n.iffalse))
            if isinstance(a, T.IntType) and isinstance(b, T.IntType):
                return T.usual_arithmetic(a, b)
            return a if isinstance(a, T.PointerType) else b
        if isinstance(n, c_ast.ExprList):
            return self.type_of(n.exprs[-1])
        if isinstance(n, c_ast.InitList):
            return T.VOID
        raise LangError(f"no type for {type(n).__name__}")

    # comparison ------------------------------------------------------------

    def fingerprint(self):
        """Structural identity of the tree, ignoring coordinates."""
        return _fingerprint(self.unit), tuple(self.includes)

    def __repr__(self):
        return f"<Ast {len(self.nodes)} nodes, {len(self.functions)} functions>"


def _fingerprint(node):
    attrs = tuple((name, _freeze(getattr(node, name))) for name in node.attr_names)
    return (type(node).__name__, attrs, tuple(_fingerprint(c) for _, c in node.children()))


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def has_side_effects(node) -> bool:
    """Calls, assignments and increments anywhere in node."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (c_ast.FuncCall, c_ast.Assignment)):
            return True
        if isinstance(n, c_ast.UnaryOp) and n.op in ('++', '--', 'p++', 'p--'):
            return True
        stack.extend(c for _, c in n.children())
    return False
