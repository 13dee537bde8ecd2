"""
Constructors for pycparser nodes used by instrumentation and synthesis.
"""
from pycparser import c_ast

from . import types as T

_SUFFIX_TYPES = {
    '': 'int',
    'U': 'unsigned int',
    'L': 'long int',
    'UL': 'unsigned long int',
    'LL': 'long long int',
    'ULL': 'unsigned long long int',
}


def ident(name):
    return c_ast.ID(name)


def int_literal(value: int, ctype: T.IntType = T.INT):
    """A literal of the given value, negative values as unary minus."""
    ctype = T.canonical(ctype)
    if value < 0:
        magnitude = -value
        if magnitude > ctype.max:
            # the minimum of a signed type has no literal spelling
            return c_ast.BinaryOp('-', c_ast.UnaryOp('-', int_literal(magnitude - 1, ctype)),
                                  c_ast.Constant('int', '1'))
        return c_ast.UnaryOp('-', int_literal(magnitude, ctype))
    text = T.int_literal_text(value, ctype)
    suffix = text.lstrip('0123456789')
    return c_ast.Constant(_SUFFIX_TYPES[suffix], text)


def typename(ctype):
    """Typename node for a cast to ctype."""
    return c_ast.Typename(name=None, quals=[], align=None, type=_declarator(ctype, None))


def _declarator(ctype, name):
    if isinstance(ctype, T.PointerType):
        return c_ast.PtrDecl(quals=[], type=_declarator(ctype.target, name))
    if isinstance(ctype, T.ArrayType):
        return c_ast.ArrayDecl(type=_declarator(ctype.elem, name),
                               dim=c_ast.Constant('int', str(ctype.length)), dim_quals=[])
    if isinstance(ctype, T.StructType):
        base = c_ast.Struct(name=ctype.tag, decls=None)
    elif isinstance(ctype, T.IntType):
        base = c_ast.IdentifierType(names=T.canonical(ctype).name.split())
    elif isinstance(ctype, T.VoidType):
        base = c_ast.IdentifierType(names=['void'])
    else:
        raise ValueError(f"no declarator for {ctype}")
    return c_ast.TypeDecl(declname=name, quals=[], align=None, type=base)


def cast(ctype, expr):
    return c_ast.Cast(typename(ctype), expr)


def decl(name, ctype, init=None):
    return c_ast.Decl(name=name, quals=[], align=[], storage=[], funcspec=[],
                      type=_declarator(ctype, name), init=init, bitsize=None)


def assign(lvalue, rvalue, op='='):
    return c_ast.Assignment(op, lvalue, rvalue)


def binop(op, left, right):
    return c_ast.BinaryOp(op, left, right)


def unop(op, expr):
    return c_ast.UnaryOp(op, expr)


def call(name, *args):
    return c_ast.FuncCall(ident(name), c_ast.ExprList(list(args)))


def compound(items):
    return c_ast.Compound(block_items=list(items))


def replace_child(parent, old, new):
    """Put new where old sits among parent's children."""
    for slot in parent.__slots__:
        if slot in ('coord', '__weakref__'):
            continue
        value = getattr(parent, slot, None)
        if value is old:
            setattr(parent, slot, new)
            return
        if isinstance(value, list):
            for i, item in enumerate(value):
                if item is old:
                    value[i] = new
                    return
    raise ValueError(f"{type(old).__name__} is not a child of {type(parent).__name__}")
