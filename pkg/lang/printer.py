"""
Canonical printer. Output is one statement per line, so a (line, offset) pair
names a single statement; downstream stages always work on printed text.
"""
from pycparser import c_ast, c_generator

from .parser import parse_program
from .tree import Ast


class ProgramPrinter(c_generator.CGenerator):
    """CGenerator with parenthesised operands everywhere except simple nodes."""

    def __init__(self):
        super().__init__(reduce_parentheses=False)

    def visit_FileAST(self, n):
        out = []
        previous = None
        for ext in n.ext:
            if isinstance(ext, c_ast.FuncDef):
                if previous is not None and not isinstance(previous, c_ast.FuncDef):
                    out.append('\n')
                out.append(self.visit(ext))
            else:
                out.append(self.visit(ext) + ';\n')
            previous = ext
        return ''.join(out)


def print_node(node) -> str:
    return ProgramPrinter().visit(node)


def print_program(ast: Ast) -> str:
    body = ProgramPrinter().visit(ast.unit)
    if not ast.includes:
        return body
    return '\n'.join(ast.includes) + '\n' + body


def reparse(ast: Ast) -> Ast:
    """Fresh tree for the printed text of ast (same node ids when ast is canonical)."""
    return parse_program(print_program(ast))


def canonicalize(source: str) -> Ast:
    """Parse source and re-parse its printed form, so locations refer to printed text."""
    return reparse(parse_program(source))


_CONTROL_STATEMENTS = (c_ast.If, c_ast.While, c_ast.DoWhile, c_ast.For, c_ast.Switch, c_ast.Compound)


def statement_text(ast: Ast, nid: int) -> str:
    """Whitespace-normalized source of the statement holding nid, or of nid alone inside a control header."""
    stmt = ast.enclosing_statement(nid)
    target = ast.node(nid)
    if stmt is not None and not isinstance(ast.node(stmt), _CONTROL_STATEMENTS):
        target = ast.node(stmt)
    return ' '.join(print_node(target).split())
