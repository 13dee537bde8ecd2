import difflib

from django.test import SimpleTestCase
from pycparser import c_ast

from . import build
from . import types as T
from .exceptions import ParseError, UnknownNode
from .parser import parse_program
from .printer import print_node, print_program
from .scopes import GLOBAL_SCOPE
from .tree import SourceLoc

FIG4_SEED = """\
struct a { int x; };
struct a b[2];
struct a *c = b, *d = b;
int k = 0;
int main() {
  *c = *b;
  *c = *(d + k);
  return c->x;
}
"""

ARRAY_SNIPPET = """\
int a[5];
int x = 1;
int main() {
  a[x] = 1;
  return 0;
}
"""

SCOPED = """\
int a, b;
int *s;
int main() {
  s = &a;
  for (b = 0; b <= 3; b++) {
    int i = *s;
    s = &i;
  }
  if (b > 2) {
    printf("%d\\n", b);
  }
  return 0;
}
"""


def nodes_of(ast, cls, **attrs):
    return [nid for nid, node in ast.walk()
            if isinstance(node, cls) and all(getattr(node, k) == v for k, v in attrs.items())]


def canonical(source):
    return parse_program(print_program(parse_program(source)))


class ParseProgramTests(SimpleTestCase):
    def test_minimal_program(self):
        ast = parse_program("int main(){return 0;}")
        self.assertEqual(len(ast.functions), 1)
        (ret,) = nodes_of(ast, c_ast.Return)
        self.assertEqual(ast.locate(ret), SourceLoc(1, 12))

    def test_array_snippet_has_one_subscript(self):
        ast = parse_program(ARRAY_SNIPPET)
        self.assertEqual(len(nodes_of(ast, c_ast.ArrayRef)), 1)

    def test_fig4_seed_dereferences(self):
        ast = parse_program(FIG4_SEED)
        derefs = nodes_of(ast, c_ast.UnaryOp, op='*')
        main = ast.nid(ast.function('main'))
        self.assertTrue(all(ast.enclosing_function(n) == main for n in derefs))
        texts = {print_node(ast.nodes[n]) for n in derefs}
        self.assertEqual(texts, {'*b', '*c', '*(d + k)'})

    def test_includes_are_kept(self):
        source = "#include <stdio.h>\nint main() {\n  printf(\"%d\\n\", 1);\n  return 0;\n}\n"
        ast = parse_program(source)
        self.assertEqual(ast.includes, ['#include <stdio.h>'])
        self.assertTrue(print_program(ast).startswith('#include <stdio.h>\n'))

    def test_fixed_width_types(self):
        ast = parse_program("int main() {\n  uint8_t u = 200;\n  int64_t w = u;\n  return (int) w;\n}\n")
        decls = [n for n in nodes_of(ast, c_ast.Decl) if ast.nodes[n].name in ('u', 'w')]
        self.assertEqual([ast.decl_type(n).width for n in decls], [8, 64])

    def test_scopes(self):
        ast = parse_program(SCOPED)
        decls = {ast.nodes[n].name: n for n in nodes_of(ast, c_ast.Decl)}
        scopes = ast.scopes
        self.assertEqual(scopes.decl_scope[decls['s']], GLOBAL_SCOPE)
        self.assertEqual(scopes.decl_scope[decls['a']], scopes.decl_scope[decls['b']])
        inner = scopes.decl_scope[decls['i']]
        self.assertGreater(scopes.depth(inner), 1)
        self.assertIn(decls['i'], scopes.address_taken)

    def test_identifier_resolution(self):
        ast = parse_program(SCOPED)
        for nid in nodes_of(ast, c_ast.ID):
            name = ast.nodes[nid].name
            if name == 'printf':
                self.assertIsNone(ast.declaration_of(nid))
            else:
                self.assertEqual(ast.nodes[ast.declaration_of(nid)].name, name)

    def test_expression_types(self):
        ast = parse_program(FIG4_SEED)
        (sum_nid,) = nodes_of(ast, c_ast.BinaryOp, op='+')
        self.assertIsInstance(ast.type_of(sum_nid), T.PointerType)
        self.assertEqual(ast.type_of(sum_nid).target.size, 4)
        self.assertEqual(ast.struct('a').size, 4)


class RejectionTests(SimpleTestCase):
    def assertRejected(self, source, line=None):
        with self.assertRaises(ParseError) as ctx:
            parse_program(source)
        if line is not None:
            self.assertEqual(ctx.exception.line, line)
        return ctx.exception

    def test_union(self):
        self.assertRejected("union u { int a; };\nint main() { return 0; }\n", line=1)

    def test_goto(self):
        self.assertRejected("int main() {\n  goto end;\nend:\n  return 0;\n}\n", line=2)

    def test_bitfield(self):
        self.assertRejected("struct s { int a : 3; };\nint main() { return 0; }\n")

    def test_undeclared_identifier(self):
        err = self.assertRejected("int main() {\n  return y;\n}\n", line=2)
        self.assertIn("undeclared", err.message)

    def test_preprocessor_directive(self):
        self.assertRejected("#define N 3\nint main() { return N; }\n", line=1)

    def test_syntax_error(self):
        self.assertRejected("int main() {\n  return 0\n}\n")

    def test_float_constant(self):
        self.assertRejected("int main() { return 1.5; }\n")

    def test_missing_main(self):
        self.assertRejected("int f() { return 0; }\n")

    def test_builtin_redeclaration(self):
        self.assertRejected("int printf(const char *f);\nint main() { return 0; }\n")

    def test_error_text(self):
        err = self.assertRejected("int main() {\n  return y;\n}\n")
        self.assertTrue(str(err).startswith("2:"))


class PrintProgramTests(SimpleTestCase):
    def test_round_trip(self):
        for source in (FIG4_SEED, ARRAY_SNIPPET, SCOPED):
            first = parse_program(source)
            again = parse_program(print_program(first))
            self.assertEqual(first.fingerprint(), again.fingerprint())

    def test_printer_is_deterministic(self):
        ast = parse_program(SCOPED)
        self.assertEqual(print_program(ast), print_program(parse_program(SCOPED)))

    def test_empty_unit(self):
        self.assertEqual(print_program(parse_program("")), "")

    def test_one_statement_per_line(self):
        ast = canonical(SCOPED)
        seen = {}
        for nid, _ in ast.walk():
            if ast.is_statement(nid):
                loc = ast.locate(nid)
                self.assertNotIn(loc, seen)
                seen[loc] = nid

    def test_insertion_shifts_following_lines(self):
        ast = canonical(FIG4_SEED)
        old = print_program(ast).splitlines()
        body = ast.function('main').body
        body.block_items.insert(1, build.decl('ubf_z0', T.INT, build.int_literal(0)))
        new_text = print_program(ast)
        changes = [l for l in difflib.ndiff(old, new_text.splitlines()) if l[:1] in '+-']
        self.assertEqual(len(changes), 1)
        self.assertTrue(changes[0].startswith('+'))
        self.assertIn('ubf_z0', changes[0])

    def test_insertion_locality(self):
        before = canonical(FIG4_SEED)
        text = print_program(before)
        after_ast = parse_program(text)
        body = after_ast.function('main').body
        body.block_items.insert(1, build.decl('ubf_z0', T.INT))
        after = parse_program(print_program(after_ast))
        inserted_line = min(after.locate(n).line for n in nodes_of(after, c_ast.Decl)
                            if after.nodes[n].name == 'ubf_z0')
        old = sorted((loc, type(before.nodes[n]).__name__) for n, loc in enumerate(before.locs)
                     if loc.line < inserted_line)
        new = sorted((loc, type(after.nodes[n]).__name__) for n, loc in enumerate(after.locs)
                     if loc.line < inserted_line)
        self.assertEqual(old, new)

    def test_negative_literal_builder(self):
        ast = parse_program("int main() { return 0; }\n")
        ret = ast.function('main').body.block_items[0]
        ret.expr = build.int_literal(-2147483648, T.INT)
        again = parse_program(print_program(ast))
        self.assertEqual(again.type_of(again.function('main').body.block_items[0].expr), T.INT)


class LocateTests(SimpleTestCase):
    def test_fig4_dereference_location(self):
        ast = parse_program(FIG4_SEED)
        (nid,) = [n for n in nodes_of(ast, c_ast.UnaryOp, op='*')
                  if isinstance(ast.nodes[n].expr, c_ast.BinaryOp)]
        self.assertEqual(ast.locate(nid), SourceLoc(7, 8))

    def test_first_token_of_file(self):
        ast = parse_program(FIG4_SEED)
        self.assertEqual(ast.locate(ast.nid(ast.unit.ext[0])), SourceLoc(1, 1))

    def test_unknown_node(self):
        ast = parse_program(FIG4_SEED)
        with self.assertRaises(UnknownNode):
            ast.locate(len(ast.nodes) + 5)

    def test_locations_match_printed_text(self):
        ast = canonical(FIG4_SEED)
        lines = ast.source.split('\n')
        for nid in nodes_of(ast, c_ast.ID):
            loc = ast.locate(nid)
            name = ast.nodes[nid].name
            self.assertEqual(lines[loc.line - 1][loc.offset - 1:loc.offset - 1 + len(name)], name)

    def test_statement_locations_are_monotonic(self):
        ast = canonical(SCOPED)
        locs = [ast.locate(nid) for nid, _ in ast.walk() if ast.is_statement(nid)]
        self.assertEqual(locs, sorted(locs))

    def test_source_loc_text(self):
        self.assertEqual(str(SourceLoc(10, 8)), "10,8")
        self.assertEqual(SourceLoc.parse("10:8"), SourceLoc(10, 8))
