"""
Front end for the supported C subset.

`#include` lines are kept verbatim and blanked before parsing; every other
preprocessor directive is rejected. A fixed prelude declares the fixed-width
typedefs, the library functions the subset may call and the profiling
intrinsics, followed by a `#line` directive so coordinates refer to the input.
"""
import logging
import re
import threading

from pycparser import c_ast, c_parser

from . import types as T
from .exceptions import LangError, ParseError
from .tree import Ast, BUILTIN_FUNCTIONS

logger = logging.getLogger(__name__)

INPUT_NAME = '<input>'

# Declarations a real compiler needs in front of a program of the subset.
DECLARATIONS = T.typedef_prelude() + """\
int printf(const char *fmt, ...);
void *malloc(unsigned long size);
void free(void *ptr);
long long __ubf_value(int site, int slot, long long value);
long long __ubf_pair(int site, long long x, long long y);
void *__ubf_access(int site, void *addr);
void __ubf_range(int site, void *base, unsigned long size);
void *__ubf_malloc(int site, unsigned long size);
void __ubf_free(int site, void *ptr);
void __ubf_scope(int site, void *base, int scope);
"""

PRELUDE = DECLARATIONS + f'#line 1 "{INPUT_NAME}"\n'

_INCLUDE = re.compile(r'^\s*#\s*include\s*[<"][^>"]+[>"]\s*$')
_COMMENT_OR_LITERAL = re.compile(r'''//[^\n]*|/\*.*?\*/|"(?:\\.|[^\\"\n])*"|'(?:\\.|[^\\'\n])*\'''', re.S)
_ERROR_LOCATION = re.compile(r'^[^:]*:(\d+):(\d+):\s*(.*)$', re.S)
_PRELUDE_NAMES = set(T.TYPEDEFS) | set(BUILTIN_FUNCTIONS)
_TYPED = (c_ast.ID, c_ast.Constant, c_ast.UnaryOp, c_ast.BinaryOp, c_ast.Assignment, c_ast.TernaryOp,
          c_ast.Cast, c_ast.ArrayRef, c_ast.StructRef, c_ast.FuncCall)

_local = threading.local()


def _parser() -> c_parser.CParser:
    if not hasattr(_local, 'parser'):
        _local.parser = c_parser.CParser()
    return _local.parser


def _strip_comments(text: str) -> str:
    def blank(m):
        chunk = m.group()
        if chunk[0] in '"\'':
            return chunk
        return re.sub(r'[^\n]', ' ', chunk)
    return _COMMENT_OR_LITERAL.sub(blank, text)


def split_includes(source: str):
    """Separate `#include` lines from the code. Returns (includes, code) with line numbers kept."""
    includes = []
    lines = []
    for lineno, line in enumerate(_strip_comments(source).split('\n'), start=1):
        stripped = line.strip()
        if stripped.startswith('#'):
            if not _INCLUDE.match(line):
                raise ParseError(lineno, line.index('#') + 1, f"unsupported preprocessor directive: {stripped}")
            includes.append(stripped)
            lines.append('')
        else:
            lines.append(line)
    return includes, '\n'.join(lines)


def parse_program(source: str) -> Ast:
    """Parse a program of the C subset.

    Raises ParseError(line, offset, message) for syntax errors and for any
    construct outside the subset.
    """
    includes, code = split_includes(source)
    try:
        unit = _parser().parse(PRELUDE + code, filename='<prelude>')
    except c_parser.ParseError as exc:
        m = _ERROR_LOCATION.match(str(exc))
        if m:
            raise ParseError(int(m.group(1)), int(m.group(2)), m.group(3)) from None
        raise ParseError(1, 1, str(exc)) from None
    except (AssertionError, IndexError, ValueError) as exc:
        raise ParseError(1, 1, f"parser failure: {exc}") from None

    user = [ext for ext in unit.ext if ext.coord is not None and ext.coord.file == INPUT_NAME]
    for ext in user:
        if isinstance(ext, c_ast.Decl) and ext.name in _PRELUDE_NAMES:
            raise ParseError(ext.coord.line, ext.coord.column or 1, f"redeclaration of builtin '{ext.name}'")
    unit = c_ast.FileAST(user)
    try:
        ast = Ast(unit, includes, code)
    except ParseError:
        raise
    except LangError as exc:
        raise ParseError(1, 1, str(exc)) from None
    SubsetValidator(ast).check()
    logger.debug(f"parsed program with {len(ast.nodes)} nodes")
    return ast


class SubsetValidator(c_ast.NodeVisitor):
    """Rejects constructs outside the supported subset."""

    _FORBIDDEN = {
        'Union': 'unions',
        'Enum': 'enums',
        'Typedef': 'typedefs',
        'Goto': 'goto',
        'Label': 'labels',
        'Switch': 'switch statements',
        'Case': 'switch statements',
        'Default': 'switch statements',
        'DoWhile': 'do-while loops',
        'CompoundLiteral': 'compound literals',
        'NamedInitializer': 'designated initializers',
        'Pragma': 'pragmas',
        'EllipsisParam': 'variadic functions',
        'StaticAssert': 'static assertions',
        'Alignas': 'alignment specifiers',
    }

    def __init__(self, ast: Ast):
        self.ast = ast

    def fail(self, node, message):
        loc = self.ast.locate(self.ast.nid(node))
        raise ParseError(loc.line, loc.offset, message)

    def check(self):
        for ext in self.ast.unit.ext:
            self.visit(ext)
        for nid, node in enumerate(self.ast.nodes):
            if isinstance(node, _TYPED) and not self._in_type(nid):
                try:
                    self.ast.type_of(nid)
                except (LangError, AttributeError, KeyError) as exc:
                    self.fail(node, f"ill-typed expression: {exc}")
        if self.ast.function('main') is None and self.ast.unit.ext:
            raise ParseError(1, 1, "program has no main function")

    def _in_type(self, nid):
        """Struct field names and array dimensions are not expressions of their own."""
        parent = self.ast.parents[nid]
        if parent is None:
            return True
        pnode = self.ast.nodes[parent]
        if isinstance(pnode, c_ast.StructRef) and self.ast.slots[nid] == 'field':
            return True
        return isinstance(pnode, c_ast.ArrayDecl)

    def generic_visit(self, node):
        name = type(node).__name__
        if name in self._FORBIDDEN:
            self.fail(node, f"{self._FORBIDDEN[name]} are not supported")
        for _, child in node.children():
            self.visit(child)

    def visit_FuncDef(self, node):
        if node.param_decls:
            self.fail(node, "K&R parameter declarations are not supported")
        self.generic_visit(node)

    def visit_Decl(self, node):
        if node.bitsize is not None:
            self.fail(node, "bit-fields are not supported")
        if node.init is not None and isinstance(node.init, c_ast.Constant) and node.init.type == 'string':
            self.fail(node, "string initializers are not supported")
        try:
            ctype = self.ast.type_of_declarator(node.type)
        except LangError as exc:
            self.fail(node, str(exc))
        if isinstance(ctype, T.StructType) and not ctype.complete and node.name:
            self.fail(node, f"incomplete type struct {ctype.tag}")
        self.generic_visit(node)

    def visit_IdentifierType(self, node):
        if T.scalar_from_names(node.names) is None:
            self.fail(node, f"unsupported type '{' '.join(node.names)}'")

    def visit_Constant(self, node):
        if node.type == 'string':
            parent = self.ast.nodes[self.ast.parents[self.ast.nid(node)]]
            grand = self.ast.parents[self.ast.parents[self.ast.nid(node)]]
            call = self.ast.nodes[grand] if grand is not None else None
            if not (isinstance(parent, c_ast.ExprList) and parent.exprs and parent.exprs[0] is node
                    and isinstance(call, c_ast.FuncCall) and isinstance(call.name, c_ast.ID)
                    and call.name.name == 'printf'):
                self.fail(node, "string literals are only supported as printf formats")
        elif node.type.endswith('int'):
            try:
                T.parse_int_literal(node.value)
            except LangError as exc:
                self.fail(node, str(exc))
        elif node.type != 'char':
            self.fail(node, f"{node.type} constants are not supported")

    def visit_ExprList(self, node):
        parent = self.ast.nodes[self.ast.parents[self.ast.nid(node)]]
        if not isinstance(parent, c_ast.FuncCall):
            self.fail(node, "comma expressions are not supported")
        self.generic_visit(node)

    def visit_FuncCall(self, node):
        if not isinstance(node.name, c_ast.ID):
            self.fail(node, "calls through function pointers are not supported")
        ftype = self.ast.type_of(node.name)
        if not isinstance(ftype, T.FuncType):
            self.fail(node, f"'{node.name.name}' is not a function")
        self.generic_visit(node)

    def visit_UnaryOp(self, node):
        if node.op == '_Alignof':
            self.fail(node, "_Alignof is not supported")
        self.generic_visit(node)
