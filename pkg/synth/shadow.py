"""
Shadow statements: the declarations and assignments inserted in front of a
matched site, plus the rewrite of the site itself, that make its first
execution violate the construct's no-UB condition.

Every synthesizer reads the seed's first-occurrence profile of the site and
computes constants from it, so the shadow statement is straight-line code
whose effect is known before the program is ever run.
"""
import copy
import logging
import random
from dataclasses import dataclass
from typing import Optional, Tuple

from django.conf import settings
from pycparser import c_ast

from lang import build as B
from lang import types as T
from lang.printer import print_node
from lang.tree import Ast, has_side_effects
from match.kinds import UbKind
from match.sites import MatchSite, arithmetic_type, conditionally_evaluated, core_op, is_step, operands
from profiler.profile import ExecutionProfile, Freed, q_addr, q_liv, q_mem, q_scp, q_val
from profiler.exceptions import NotLive

from .exceptions import NoEligibleTarget, SynthesisBudgetExhausted, SynthesisError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Rewrite:
    """Add `aux` to the child `attr` of the target (to the target itself when attr is None)."""
    attr: Optional[str]
    aux: str


@dataclass(frozen=True)
class ShadowStmt:
    kind: UbKind
    anchor: int
    target: int
    decls: Tuple[c_ast.Node, ...] = ()
    assigns: Tuple[c_ast.Node, ...] = ()
    rewrites: Tuple[Rewrite, ...] = ()
    summary: str = ''


class FreshNames:
    """Auxiliary variable names that collide with nothing in the seed."""

    def __init__(self, ast: Ast):
        self.taken = set(ast.names())
        self.counts = {}

    def take(self, stem: str) -> str:
        n = self.counts.get(stem, 0)
        while f"ubf_{stem}{n}" in self.taken:
            n += 1
        name = f"ubf_{stem}{n}"
        self.taken.add(name)
        self.counts[stem] = n + 1
        return name


def _redzone() -> int:
    return getattr(settings, 'UBF_REDZONE_BYTES', 32)


def _int_type(ast: Ast, node) -> T.IntType:
    return T.canonical(T.decay(ast.type_of(node)))


def _aux(names, stem, ctype, value):
    """Declaration and assignment of a fresh auxiliary holding value."""
    name = names.take(stem)
    return name, B.decl(name, ctype), B.assign(B.ident(name), B.int_literal(value, ctype))


def _fits(ctype: T.IntType, value: int) -> T.IntType:
    if ctype.contains(value):
        return ctype
    if T.LLONG.contains(value):
        return T.LLONG
    raise NoEligibleTarget(f"{value} has no representable auxiliary type")


def _assignable(ast: Ast, expr) -> bool:
    """An lvalue of pointer type that can be assigned without side effects."""
    if has_side_effects(expr):
        return False
    if not isinstance(T.decay(ast.type_of(expr)), T.PointerType) or isinstance(ast.type_of(expr), T.ArrayType):
        return False
    if isinstance(expr, c_ast.ID):
        return True
    if isinstance(expr, c_ast.UnaryOp):
        return expr.op == '*'
    return isinstance(expr, (c_ast.ArrayRef, c_ast.StructRef))


# buffer kinds ------------------------------------------------------------------

def _array_overflow(ast, site, profile, names):
    node = ast.node(site.node_id)
    atype = ast.type_of(node.name)
    if not isinstance(atype, T.ArrayType) or not atype.length:
        raise NoEligibleTarget(f"{site}: array of unknown length")
    elem = atype.elem.size
    size = atype.length * elem
    (x,) = q_val(profile, site)
    # one element past the end; one before the start is the same distance
    if elem > _redzone():
        raise NoEligibleTarget(f"{site}: element of {elem} bytes exceeds the redzone")
    v = atype.length
    distance = (v + 1) * elem - size
    xhat = v - x
    ctype = _fits(T.promote(_int_type(ast, node.subscript)), xhat)
    name, decl, assign = _aux(names, 'x', ctype, xhat)
    return (decl,), (assign,), (Rewrite('subscript', name),), f"{name}={xhat} index={v} overflow={distance}B"


def _pointer_overflow(ast, site, profile, names):
    node = ast.node(site.node_id)
    obj = q_mem(profile, site)
    if isinstance(obj, Freed):
        raise NoEligibleTarget(f"{site}: pointer into a freed block")
    ptype = T.decay(ast.type_of(node.expr))
    elem = ptype.target.size if isinstance(ptype, T.PointerType) else 0
    if elem <= 0:
        raise NoEligibleTarget(f"{site}: pointee has no size")
    offset = q_addr(profile, site) - obj.base
    chat = max(1, (obj.size - offset) // elem)
    distance = offset + (chat + 1) * elem - obj.size
    if distance > _redzone():
        chat = -(offset // elem) - 1
        distance = elem - offset % elem
        if distance > _redzone():
            raise NoEligibleTarget(f"{site}: no overflow within the redzone")
    name, decl, assign = _aux(names, 'c', _fits(T.INT, chat), chat)
    return (decl,), (assign,), (Rewrite('expr', name),), f"{name}={chat} overflow={distance}B"


def _use_after_free(ast, site, profile, names):
    node = ast.node(site.node_id)
    obj = q_mem(profile, site)
    if isinstance(obj, Freed) or obj.storage != 'heap':
        raise NoEligibleTarget(f"{site}: not a live heap block")
    if has_side_effects(node.expr):
        raise NoEligibleTarget(f"{site}: pointer expression has side effects")
    offset = q_addr(profile, site) - obj.base
    pointer = copy.deepcopy(node.expr)
    if offset:
        pointer = B.binop('-', B.cast(T.PointerType(T.CHAR), pointer), B.int_literal(offset))
    release = B.call('free', pointer)
    return (), (release,), (), f"free({print_node(pointer)})"


def _null_deref(ast, site, profile, names):
    node = ast.node(site.node_id)
    if not _assignable(ast, node.expr):
        raise NoEligibleTarget(f"{site}: pointer is not an assignable lvalue")
    assign = B.assign(copy.deepcopy(node.expr), B.int_literal(0))
    return (), (assign,), (), f"{print_node(node.expr)}=0"


def _has_earlier_block(ast: Ast, anchor: int) -> bool:
    function = ast.enclosing_function(anchor)
    body = ast.nid(ast.node(function).body)
    ancestors = set(ast.ancestors(anchor))
    for nid, node in ast.walk(body):
        if nid == body or nid in ancestors or not isinstance(node, c_ast.Compound):
            continue
        if nid < anchor:
            return True
    return False


def _use_after_scope(ast, site, profile, names, anchor):
    node = ast.node(site.node_id)
    if not _assignable(ast, node.expr):
        raise NoEligibleTarget(f"{site}: pointer is not an assignable lvalue")
    pointee = T.decay(ast.type_of(node.expr)).target
    if not isinstance(pointee, (T.IntType, T.PointerType, T.StructType)) or \
            (isinstance(pointee, T.StructType) and not pointee.tag):
        raise NoEligibleTarget(f"{site}: cannot declare an object of type {pointee}")
    if not _has_earlier_block(ast, anchor):
        raise NoEligibleTarget(f"{site}: no block precedes the use")
    use_scope = q_scp(profile, site)
    name = names.take('s')
    block = B.compound([
        B.decl(name, T.canonical(pointee) if isinstance(pointee, T.IntType) else pointee),
        B.assign(copy.deepcopy(node.expr), B.unop('&', B.ident(name))),
    ])
    return (), (block,), (), f"{print_node(node.expr)}=&{name} (inner to scope {use_scope})"


# arithmetic kinds ---------------------------------------------------------------

def _apply(op, a, b):
    return a + b if op == '+' else a - b if op == '-' else a * b


def _feasible(ctype: T.IntType, current: int):
    """Values v with v - current representable, so `current + (v - current)` cannot overflow."""
    return ctype.min + max(current, 0), ctype.max + min(current, 0)


def _step_overflow(ast, site, node, op, ctype):
    if has_side_effects(node.expr):
        raise NoEligibleTarget(f"{site}: lvalue has side effects")
    value = ctype.max if op == '+' else ctype.min
    assign = B.assign(copy.deepcopy(node.expr), B.int_literal(value, ctype))
    return (), (assign,), (), f"{print_node(node.expr)}={value} ({value} {op} 1)"


def _integer_overflow(ast, site, profile, names, rng):
    node = ast.node(site.node_id)
    op = core_op(node)
    ctype = arithmetic_type(ast, node)
    if is_step(node):
        return _step_overflow(ast, site, node, op, ctype)
    compound = isinstance(node, c_ast.Assignment)
    if compound and has_side_effects(node.lvalue):
        raise NoEligibleTarget(f"{site}: lvalue has side effects")
    x, y = q_val(profile, site)
    if compound:
        ltype = _int_type(ast, node.lvalue)
        first = (max(ctype.min, ltype.min), min(ctype.max, ltype.max))
    else:
        first = _feasible(ctype, x)
    second = _feasible(ctype, y)
    draws = getattr(settings, 'UBF_MONTE_CARLO_DRAWS', 64)
    chosen = None
    for _ in range(draws):
        v0, v1 = rng.randint(*first), rng.randint(*second)
        if not ctype.contains(_apply(op, v0, v1)):
            chosen = (v0, v1)
            break
    if chosen is None:
        boundary = [(a, b) for a in (first[1], first[0]) for b in (second[1], second[0])]
        chosen = next(((a, b) for a, b in boundary if not ctype.contains(_apply(op, a, b))), None)
    if chosen is None:
        raise SynthesisBudgetExhausted(f"{site}: no overflowing operands after {draws} draws")
    v0, v1 = chosen
    yname, ydecl, yassign = _aux(names, 'y', ctype, v1 - y)
    if compound:
        assigns = (B.assign(copy.deepcopy(node.lvalue), B.int_literal(v0, ltype)), yassign)
        return (ydecl,), assigns, (Rewrite('rvalue', yname),), \
            f"{print_node(node.lvalue)}={v0} {yname}={v1 - y} ({v0} {op} {v1})"
    xname, xdecl, xassign = _aux(names, 'x', ctype, v0 - x)
    return (xdecl, ydecl), (xassign, yassign), (Rewrite('left', xname), Rewrite('right', yname)), \
        f"{xname}={v0 - x} {yname}={v1 - y} ({v0} {op} {v1})"


def _shift_amount(ast, right, y, v):
    rtype = T.promote(_int_type(ast, right))
    yhat = v - y
    if not rtype.signed:
        return rtype, rtype.wrap(yhat)
    if not rtype.contains(yhat):
        raise NoEligibleTarget(f"adjustment {yhat} does not fit {rtype}")
    return rtype, yhat


def _shift_overflow(ast, site, profile, names):
    node = ast.node(site.node_id)
    _, right = operands(node)
    width = arithmetic_type(ast, node).width
    _, y = q_val(profile, site)
    rtype, yhat = _shift_amount(ast, right, y, width)
    name, decl, assign = _aux(names, 'y', rtype, yhat)
    attr = 'rvalue' if isinstance(node, c_ast.Assignment) else 'right'
    return (decl,), (assign,), (Rewrite(attr, name),), f"{name}={yhat} amount={width}"


def _divide_by_zero(ast, site, profile, names):
    node = ast.node(site.node_id)
    ctype = arithmetic_type(ast, node)
    _, y = q_val(profile, site)
    if ctype.signed:
        if not ctype.contains(-y):
            raise NoEligibleTarget(f"{site}: -({y}) does not fit {ctype}")
        yhat = -y
    else:
        yhat = ctype.wrap(-y)
    name, decl, assign = _aux(names, 'y', ctype, yhat)
    attr = 'rvalue' if isinstance(node, c_ast.Assignment) else 'right'
    return (decl,), (assign,), (Rewrite(attr, name),), f"{name}={yhat}"


def _uninit_condition(ast, site, profile, names):
    name = names.take('u')
    return (B.decl(name, T.INT),), (), (Rewrite(None, name),), f"{name} uninitialized"


def syn_shadow_stmt(site: MatchSite, profile: ExecutionProfile, kind: UbKind,
                    rng: Optional[random.Random] = None, names: Optional[FreshNames] = None) -> ShadowStmt:
    """Shadow statement that makes the first execution of site exhibit kind."""
    ast = profile.seed
    if site.kind != kind:
        raise SynthesisError(f"{site} is not a {kind} site")
    if not q_liv(profile, site):
        raise NotLive(site)
    anchor = ast.enclosing_statement(site.node_id)
    if anchor is None:
        raise SynthesisError(f"{site} is not inside a function body")
    if conditionally_evaluated(ast, site.node_id, anchor):
        raise NoEligibleTarget(f"{site} is conditionally evaluated")
    names = names or FreshNames(ast)
    rng = rng or random.Random(0)

    if kind is UbKind.BUF_OVERFLOW_ARRAY:
        parts = _array_overflow(ast, site, profile, names)
    elif kind is UbKind.BUF_OVERFLOW_POINTER:
        parts = _pointer_overflow(ast, site, profile, names)
    elif kind is UbKind.USE_AFTER_FREE:
        parts = _use_after_free(ast, site, profile, names)
    elif kind is UbKind.USE_AFTER_SCOPE:
        parts = _use_after_scope(ast, site, profile, names, anchor)
    elif kind is UbKind.NULL_PTR_DEREF:
        parts = _null_deref(ast, site, profile, names)
    elif kind is UbKind.INTEGER_OVERFLOW:
        parts = _integer_overflow(ast, site, profile, names, rng)
    elif kind is UbKind.SHIFT_OVERFLOW:
        parts = _shift_overflow(ast, site, profile, names)
    elif kind is UbKind.DIVIDE_BY_ZERO:
        parts = _divide_by_zero(ast, site, profile, names)
    else:
        parts = _uninit_condition(ast, site, profile, names)
    decls, assigns, rewrites, summary = parts
    logger.debug(f"{site}: {summary}")
    return ShadowStmt(kind, anchor, site.node_id, decls, assigns, rewrites, summary)
