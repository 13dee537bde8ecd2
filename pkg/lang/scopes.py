"""
Lexical scope resolution: maps every identifier use to its declaration and
every declaration to the scope that owns it. Scope 0 is file scope; each
function body, nested block and `for` statement opens a new scope.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from pycparser import c_ast

from .exceptions import ParseError

GLOBAL_SCOPE = 0

# Resolution target of names declared by the parsing prelude (printf, malloc, ...).
BUILTIN = -1


@dataclass
class ScopeInfo:
    parent: Dict[int, Optional[int]] = field(default_factory=lambda: {GLOBAL_SCOPE: None})
    owner: Dict[int, int] = field(default_factory=lambda: {GLOBAL_SCOPE: 0})
    function: Dict[int, Optional[int]] = field(default_factory=lambda: {GLOBAL_SCOPE: None})
    decl_scope: Dict[int, int] = field(default_factory=dict)
    resolution: Dict[int, int] = field(default_factory=dict)
    node_scope: Dict[int, int] = field(default_factory=dict)
    address_taken: Set[int] = field(default_factory=set)
    functions: Dict[str, int] = field(default_factory=dict)

    def chain(self, scope: int) -> List[int]:
        """scope followed by its ancestors up to file scope."""
        out = []
        while scope is not None:
            out.append(scope)
            scope = self.parent[scope]
        return out

    def is_within(self, inner: int, outer: int) -> bool:
        return outer in self.chain(inner)

    def depth(self, scope: int) -> int:
        return len(self.chain(scope)) - 1


class _Resolver:
    def __init__(self, ast, builtins):
        self.ast = ast
        self.builtins = builtins
        self.info = ScopeInfo()
        self.stack = [(GLOBAL_SCOPE, {})]
        self.current_function = None

    def push(self, owner_nid):
        sid = len(self.info.parent)
        self.info.parent[sid] = self.stack[-1][0]
        self.info.owner[sid] = owner_nid
        self.info.function[sid] = self.current_function
        self.stack.append((sid, {}))
        return sid

    def pop(self):
        self.stack.pop()

    def declare(self, name, decl):
        nid = self.ast.nid(decl)
        sid, names = self.stack[-1]
        names[name] = nid
        self.info.decl_scope[nid] = sid

    def lookup(self, name):
        for _, names in reversed(self.stack):
            if name in names:
                return names[name]
        if name in self.builtins:
            return BUILTIN
        return None

    def visit(self, node):
        self.info.node_scope[self.ast.nid(node)] = self.stack[-1][0]
        method = getattr(self, 'visit_' + type(node).__name__, None)
        if method is not None:
            method(node)
        else:
            for _, child in node.children():
                self.visit(child)

    def visit_FuncDef(self, node):
        name = node.decl.name
        self.declare(name, node.decl)
        self.info.functions[name] = self.ast.nid(node)
        self.current_function = self.ast.nid(node)
        self.push(self.ast.nid(node))
        args = node.decl.type.args
        if args is not None:
            for param in args.params:
                if isinstance(param, c_ast.Decl) and param.name:
                    self.info.node_scope[self.ast.nid(param)] = self.stack[-1][0]
                    self.declare(param.name, param)
        self.info.node_scope[self.ast.nid(node.body)] = self.stack[-1][0]
        for item in node.body.block_items or ():
            self.visit(item)
        self.pop()
        self.current_function = None

    def visit_Decl(self, node):
        if node.name:
            self.declare(node.name, node)
        if isinstance(node.type, c_ast.FuncDecl):
            return
        if node.init is not None:
            self.visit(node.init)

    def visit_Compound(self, node):
        self.push(self.ast.nid(node))
        for item in node.block_items or ():
            self.visit(item)
        self.pop()

    def visit_For(self, node):
        self.push(self.ast.nid(node))
        for part in (node.init, node.cond, node.next, node.stmt):
            if part is not None:
                self.visit(part)
        self.pop()

    def visit_ID(self, node):
        target = self.lookup(node.name)
        if target is None:
            loc = self.ast.locate(self.ast.nid(node))
            raise ParseError(loc.line, loc.offset, f"undeclared identifier '{node.name}'")
        self.info.resolution[self.ast.nid(node)] = target

    def visit_StructRef(self, node):
        self.visit(node.name)

    def visit_Cast(self, node):
        self.visit(node.expr)

    def visit_UnaryOp(self, node):
        if node.op == 'sizeof' and isinstance(node.expr, c_ast.Typename):
            return
        self.visit(node.expr)
        if node.op == '&':
            base = node.expr
            while isinstance(base, c_ast.ArrayRef) or (isinstance(base, c_ast.StructRef) and base.type == '.'):
                base = base.name
            if isinstance(base, c_ast.ID):
                target = self.info.resolution.get(self.ast.nid(base))
                if target is not None and target != BUILTIN:
                    self.info.address_taken.add(target)

    def visit_Typename(self, node):
        return


def resolve_scopes(ast, builtins) -> ScopeInfo:
    resolver = _Resolver(ast, builtins)
    resolver.info.owner[GLOBAL_SCOPE] = ast.nid(ast.unit)
    resolver.info.node_scope[ast.nid(ast.unit)] = GLOBAL_SCOPE
    for ext in ast.unit.ext:
        resolver.visit(ext)
    return resolver.info
