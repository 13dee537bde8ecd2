"""
Static matching of the code constructs each UB kind is planted into.

Compound forms are matched through their binary operator core: `x += y` is an
`x op y` construct whose operands are the lvalue and the rvalue, and `++x`,
`x++`, `--x` and `x--` are `x + 1` and `x - 1`.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

from pycparser import c_ast

from lang import types as T
from lang.tree import Ast, SourceLoc

from .kinds import UbKind

logger = logging.getLogger(__name__)

_OVERFLOW_OPS = frozenset({'+', '-', '*'})
_SHIFT_OPS = frozenset({'<<', '>>'})
_DIVIDE_OPS = frozenset({'/', '%'})


@dataclass(frozen=True)
class MatchSite:
    node_id: int
    kind: UbKind
    loc: SourceLoc
    construct: str

    def __str__(self):
        return f"{self.kind}@{self.loc}"


_STEP_OPS = {'++': '+', 'p++': '+', '--': '-', 'p--': '-'}


def is_step(node) -> bool:
    """Prefix or postfix increment or decrement."""
    return isinstance(node, c_ast.UnaryOp) and node.op in _STEP_OPS


def core_op(node) -> Optional[str]:
    """Binary operator computed by a BinaryOp, a compound assignment or an increment."""
    if isinstance(node, c_ast.BinaryOp):
        return node.op
    if isinstance(node, c_ast.Assignment) and node.op != '=':
        return node.op[:-1]
    if is_step(node):
        return _STEP_OPS[node.op]
    return None


def operands(node):
    """(left, right) operand nodes of an arithmetic construct; right is None for increments."""
    if isinstance(node, c_ast.BinaryOp):
        return node.left, node.right
    if is_step(node):
        return node.expr, None
    return node.lvalue, node.rvalue


def arithmetic_type(ast: Ast, node) -> Optional[T.IntType]:
    """Type the operator core of node is computed in, None for pointer arithmetic."""
    if is_step(node):
        ctype = T.decay(ast.type_of(node.expr))
        if not T.is_integer(ctype):
            return None
        # a char or short is stepped in int and cannot overflow it
        ctype = T.canonical(ctype)
        return ctype if T.promote(ctype) == ctype else None
    left, right = (T.decay(ast.type_of(n)) for n in operands(node))
    if not (T.is_integer(left) and T.is_integer(right)):
        return None
    if core_op(node) in _SHIFT_OPS:
        return T.promote(T.canonical(left))
    return T.usual_arithmetic(left, right)


def _match_node(ast: Ast, nid: int, node, kind: UbKind) -> Optional[str]:
    if kind is UbKind.BUF_OVERFLOW_ARRAY:
        if isinstance(node, c_ast.ArrayRef) and isinstance(ast.type_of(node.name), T.ArrayType):
            # &a[x] computes an address without accessing the element
            parent = ast.parents[nid]
            pnode = ast.nodes[parent] if parent is not None else None
            if isinstance(pnode, c_ast.UnaryOp) and pnode.op == '&':
                return None
            return 'a[x]'
        return None
    if kind in (UbKind.BUF_OVERFLOW_POINTER, UbKind.USE_AFTER_FREE,
                UbKind.USE_AFTER_SCOPE, UbKind.NULL_PTR_DEREF):
        if isinstance(node, c_ast.UnaryOp) and node.op == '*':
            return '*p'
        return None
    if kind is UbKind.USE_OF_UNINIT_MEMORY:
        parent = ast.parents[nid]
        if parent is None or ast.slots[nid] != 'cond':
            return None
        pnode = ast.nodes[parent]
        if isinstance(pnode, (c_ast.If, c_ast.While)) and T.is_integer(T.decay(ast.type_of(nid))):
            return 'if(x)' if isinstance(pnode, c_ast.If) else 'while(x)'
        return None

    op = core_op(node)
    if op is None:
        return None
    compound = isinstance(node, c_ast.Assignment) or is_step(node)
    if kind is UbKind.INTEGER_OVERFLOW and op in _OVERFLOW_OPS:
        ctype = arithmetic_type(ast, node)
        if ctype is not None and ctype.signed:
            return 'x op= y' if compound else 'x op y'
    elif kind is UbKind.SHIFT_OVERFLOW and op in _SHIFT_OPS:
        if arithmetic_type(ast, node) is not None:
            return 'x<<=y' if compound else 'x<<y'
    elif kind is UbKind.DIVIDE_BY_ZERO and op in _DIVIDE_OPS:
        if arithmetic_type(ast, node) is not None:
            return 'x/=y' if compound else 'x/y'
    return None


def unevaluated(ast: Ast, nid: int) -> bool:
    """Inside a declarator or a sizeof operand."""
    for a in ast.ancestors(nid):
        node = ast.nodes[a]
        if isinstance(node, (c_ast.ArrayDecl, c_ast.Typename)):
            return True
        if isinstance(node, c_ast.UnaryOp) and node.op == 'sizeof':
            return True
    return False


def get_matched_exprs(ast: Ast, kind: UbKind) -> List[MatchSite]:
    """Every expression inside a function body whose form matches kind, in source order."""
    sites = []
    for function in ast.functions:
        for nid, node in ast.walk(ast.nid(function.body)):
            if unevaluated(ast, nid):
                continue
            construct = _match_node(ast, nid, node, kind)
            if construct is not None:
                sites.append(MatchSite(nid, kind, ast.locate(nid), construct))
    sites.sort(key=lambda s: (s.loc, s.node_id))
    logger.debug(f"{len(sites)} {kind} sites")
    return sites


def match_all(ast: Ast, kinds) -> List[MatchSite]:
    out = []
    for kind in kinds:
        out.extend(get_matched_exprs(ast, kind))
    return out


def conditionally_evaluated(ast: Ast, nid: int, anchor: int) -> bool:
    """True if nid may be skipped the first time its anchor statement runs."""
    child = nid
    for parent in ast.ancestors(nid):
        pnode = ast.nodes[parent]
        slot = ast.slots[child]
        if isinstance(pnode, c_ast.BinaryOp) and pnode.op in ('&&', '||') and slot == 'right':
            return True
        if isinstance(pnode, c_ast.TernaryOp) and slot in ('iftrue', 'iffalse'):
            return True
        if isinstance(pnode, c_ast.For) and slot == 'next':
            return True
        if parent == anchor:
            return False
        child = parent
    return False
