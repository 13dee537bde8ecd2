"""
Source locations of tree nodes.

pycparser coordinates are exact for leaf tokens (identifiers, constants,
keywords, type names) but some operator nodes borrow the coordinate of an
operand. Locations are therefore recomputed from a token list of the parsed
text: each expression gets the token span it covers, parentheses that wrap
an operand are folded into the enclosing span, and statements start at their
first token.
"""
import re
from dataclasses import dataclass

from pycparser import c_ast

from .exceptions import ParseError

_TOKEN = re.compile(r'''
    (?P<ws>\s+)
  | (?P<id>[A-Za-z_]\w*)
  | (?P<num>(?:0[xX][0-9a-fA-F]+|\d+)[uUlL]*)
  | (?P<chr>'(?:\\.|[^\\'\n])+')
  | (?P<str>"(?:\\.|[^\\"\n])*")
  | (?P<punct>\.\.\.|<<=|>>=|->|\+\+|--|<<|>>|<=|>=|==|!=|&&|\|\||[-+*/%&|^]=|[-+*/%&|^!~<>=?:;,.(){}\[\]])
''', re.X)

DECL_WORDS = frozenset({
    'struct', 'const', 'static', 'volatile', 'unsigned', 'signed', 'int', 'char',
    'short', 'long', 'void', 'extern', 'register', 'inline',
})

_PREFIX_OPS = frozenset({'-', '+', '!', '~', '*', '&', '++', '--'})


@dataclass(frozen=True)
class Token:
    text: str
    line: int
    column: int


class TokenIndex:
    """Tokens of a source text plus bracket matching and (line, column) lookup."""

    def __init__(self, text: str):
        self.tokens = []
        self._at = {}
        line, line_start, pos = 1, 0, 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None:
                raise ParseError(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
            kind = m.lastgroup
            if kind == 'ws':
                chunk = m.group()
                newlines = chunk.count('\n')
                if newlines:
                    line += newlines
                    line_start = pos + chunk.rfind('\n') + 1
            else:
                tok = Token(m.group(), line, pos - line_start + 1)
                self._at[(tok.line, tok.column)] = len(self.tokens)
                self.tokens.append(tok)
            pos = m.end()
        self.match = self._match_brackets()

    def _match_brackets(self):
        pairs = {')': '(', ']': '[', '}': '{'}
        match = [-1] * len(self.tokens)
        stack = []
        for i, tok in enumerate(self.tokens):
            if tok.text in ('(', '[', '{'):
                stack.append(i)
            elif tok.text in pairs:
                if stack and self.tokens[stack[-1]].text == pairs[tok.text]:
                    j = stack.pop()
                    match[i], match[j] = j, i
        return match

    def index(self, coord):
        if coord is None:
            return None
        return self._at.get((coord.line, coord.column))

    def text(self, i):
        if 0 <= i < len(self.tokens):
            return self.tokens[i].text
        return None


class Locator:
    """Computes the first token of every node."""

    def __init__(self, index: TokenIndex):
        self.ix = index
        self._spans = {}

    def _wrap(self, span):
        first, last = span
        match = self.ix.match
        while (self.ix.text(first - 1) == '(' and self.ix.text(last + 1) == ')'
               and match[first - 1] == last + 1):
            first -= 1
            last += 1
        return first, last

    def _min_token(self, node):
        best = None
        stack = [node]
        while stack:
            n = stack.pop()
            i = self.ix.index(getattr(n, 'coord', None))
            if i is not None and (best is None or i < best):
                best = i
            stack.extend(c for _, c in n.children())
        return best

    def span(self, node):
        """(first, last) token indices of an expression, parentheses excluded."""
        key = id(node)
        if key not in self._spans:
            self._spans[key] = self._compute(node)
        return self._spans[key]

    def outer(self, node):
        return self._wrap(self.span(node))

    def _compute(self, n):
        ix = self.ix
        if isinstance(n, (c_ast.ID, c_ast.Constant)):
            i = ix.index(n.coord)
            if i is None:
                i = self._min_token(n)
            last = i
            while isinstance(n, c_ast.Constant) and n.type == 'string' and (ix.text(last + 1) or '').startswith('"'):
                last += 1
            return i, last
        if isinstance(n, c_ast.UnaryOp):
            if n.op == 'sizeof':
                i = ix.index(n.coord)
                if i is None:
                    i = self._min_token(n)
                    while ix.text(i - 1) not in (None, 'sizeof'):
                        i -= 1
                    i -= 1
                if ix.text(i + 1) == '(':
                    return i, ix.match[i + 1]
                return i, self.outer(n.expr)[1]
            inner = self.outer(n.expr)
            if n.op in ('p++', 'p--'):
                return inner[0], inner[1] + 1
            return inner[0] - 1, inner[1]
        if isinstance(n, c_ast.BinaryOp):
            return self.outer(n.left)[0], self.outer(n.right)[1]
        if isinstance(n, c_ast.Assignment):
            return self.outer(n.lvalue)[0], self.outer(n.rvalue)[1]
        if isinstance(n, c_ast.TernaryOp):
            return self.outer(n.cond)[0], self.outer(n.iffalse)[1]
        if isinstance(n, c_ast.Cast):
            first = ix.index(n.coord)
            last = self.outer(n.expr)[1]
            if first is None or ix.text(first) != '(':
                # the type's own tokens sit between the parentheses
                first = self._min_token(n.to_type)
                while first is not None and ix.text(first) != '(':
                    first -= 1
            return first, last
        if isinstance(n, c_ast.ArrayRef):
            base = self.outer(n.name)
            return base[0], ix.match[base[1] + 1]
        if isinstance(n, c_ast.StructRef):
            base = self.outer(n.name)
            return base[0], ix.index(n.field.coord)
        if isinstance(n, c_ast.FuncCall):
            base = self.outer(n.name)
            return base[0], ix.match[base[1] + 1]
        if isinstance(n, c_ast.ExprList):
            return self.outer(n.exprs[0])[0], self.outer(n.exprs[-1])[1]
        if isinstance(n, c_ast.InitList):
            first = self.outer(n.exprs[0])[0] - 1
            return first, ix.match[first]
        first = self._min_token(n)
        return first, first

    def statement_start(self, n):
        ix = self.ix
        if isinstance(n, (c_ast.Decl, c_ast.FuncDef, c_ast.DeclList)):
            i = self._min_token(n)
            while ix.text(i - 1) in DECL_WORDS:
                i -= 1
            return i
        if isinstance(n, (c_ast.Compound, c_ast.If, c_ast.While, c_ast.For, c_ast.Return,
                          c_ast.Break, c_ast.Continue, c_ast.EmptyStatement)):
            i = ix.index(n.coord)
            return i if i is not None else self._min_token(n)
        return self.outer(n)[0]

    def loc_token(self, n, is_statement):
        if is_statement:
            return self.statement_start(n)
        if isinstance(n, (c_ast.ID, c_ast.Constant, c_ast.UnaryOp, c_ast.BinaryOp, c_ast.Assignment,
                          c_ast.TernaryOp, c_ast.Cast, c_ast.ArrayRef, c_ast.StructRef,
                          c_ast.FuncCall, c_ast.ExprList, c_ast.InitList)):
            return self.span(n)[0]
        if isinstance(n, (c_ast.Decl, c_ast.FuncDef)):
            return self.statement_start(n)
        return self._min_token(n)
