from django.test import SimpleTestCase
from pycparser import c_ast

from lang.parser import parse_program
from lang.printer import print_node

from .kinds import CONSTRUCTS, KIND_CHOICES, UbKind
from .sites import conditionally_evaluated, get_matched_exprs, match_all

FIG6_SNIPPET = """\
int a[5];
int x = 1;
int main() {
  a[x] = 1;
  return 0;
}
"""

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

MIXED = """\
int g[4];
unsigned int u = 3;
int f(int n) {
  int t = n << 2;
  t += n * 3;
  t /= n + 1;
  if (t) {
    t = t % 7;
  }
  while (n > 0) {
    n -= 1;
  }
  return t + g[n];
}
int main() {
  int *p = &g[1];
  int m[2][3];
  int s = sizeof(g[0]);
  m[1][2] = u << 1;
  return f(*p) + s + m[1][2] + (u / 2U);
}
"""


class KindTests(SimpleTestCase):
    def test_parse_accepts_several_spellings(self):
        self.assertIs(UbKind.parse('DivideByZero'), UbKind.DIVIDE_BY_ZERO)
        self.assertIs(UbKind.parse('divide-by-zero'), UbKind.DIVIDE_BY_ZERO)
        self.assertIs(UbKind.parse('USE_AFTER_FREE'), UbKind.USE_AFTER_FREE)
        with self.assertRaises(ValueError):
            UbKind.parse('stack-exhaustion')

    def test_every_kind_has_choices_and_constructs(self):
        self.assertEqual(len(KIND_CHOICES), 9)
        self.assertEqual(set(CONSTRUCTS), set(UbKind))


class MatchTests(SimpleTestCase):
    def test_fig6_snippet_has_one_array_site(self):
        ast = parse_program(FIG6_SNIPPET)
        (site,) = get_matched_exprs(ast, UbKind.BUF_OVERFLOW_ARRAY)
        self.assertEqual(print_node(ast.nodes[site.node_id]), 'a[x]')
        self.assertEqual(site.construct, 'a[x]')

    def test_fig4_pointer_sites(self):
        ast = parse_program(FIG4_SEED)
        sites = get_matched_exprs(ast, UbKind.BUF_OVERFLOW_POINTER)
        texts = {print_node(ast.nodes[s.node_id]) for s in sites}
        self.assertEqual(texts, {'*b', '*c', '*(d + k)'})

    def test_pointer_free_program_has_no_pointer_sites(self):
        ast = parse_program(FIG6_SNIPPET)
        self.assertEqual(get_matched_exprs(ast, UbKind.USE_AFTER_FREE), [])

    def test_matching_is_deterministic(self):
        first = match_all(parse_program(MIXED), list(UbKind))
        second = match_all(parse_program(MIXED), list(UbKind))
        self.assertEqual(first, second)

    def test_sites_are_in_source_order(self):
        ast = parse_program(MIXED)
        for kind in UbKind:
            sites = get_matched_exprs(ast, kind)
            self.assertEqual(sites, sorted(sites, key=lambda s: (s.loc, s.node_id)))

    def test_constructs_belong_to_their_kind(self):
        ast = parse_program(MIXED)
        for site in match_all(ast, list(UbKind)):
            self.assertIn(site.construct, CONSTRUCTS[site.kind])

    def test_compound_assignments_match_through_their_operator(self):
        ast = parse_program(MIXED)
        constructs = {s.construct for s in match_all(ast, list(UbKind))}
        self.assertTrue({'x op= y', 'x/=y', 'x<<y', 'x/y', 'if(x)', 'while(x)'} <= constructs)

    def test_sizeof_and_declarators_are_skipped(self):
        ast = parse_program(MIXED)
        arrays = [print_node(ast.nodes[s.node_id]) for s in get_matched_exprs(ast, UbKind.BUF_OVERFLOW_ARRAY)]
        self.assertEqual(sorted(arrays), sorted(['g[n]', 'm[1]', 'm[1][2]', 'm[1]', 'm[1][2]']))

    def test_unsigned_arithmetic_is_not_an_overflow_site(self):
        ast = parse_program(MIXED)
        texts = {print_node(ast.nodes[s.node_id]) for s in get_matched_exprs(ast, UbKind.INTEGER_OVERFLOW)}
        self.assertNotIn('u << 1', texts)
        self.assertIn('n * 3', texts)
        self.assertIn('t + g[n]', texts)

    def test_increments_are_overflow_sites(self):
        ast = parse_program("int main() {\n  int x = 1;\n  int y = 2;\n  ++x;\n  x += y;\n  x--;\n  return x;\n}\n")
        sites = get_matched_exprs(ast, UbKind.INTEGER_OVERFLOW)
        self.assertEqual([print_node(ast.nodes[s.node_id]) for s in sites], ['++x', 'x += y', 'x--'])
        self.assertEqual({s.construct for s in sites}, {'x op= y'})

    def test_narrow_and_unsigned_increments_are_not_overflow_sites(self):
        ast = parse_program("int main() {\n  char c = 1;\n  unsigned int u = 1;\n  c++;\n  --u;\n  return c;\n}\n")
        self.assertEqual(get_matched_exprs(ast, UbKind.INTEGER_OVERFLOW), [])

    def test_address_of_an_element_is_not_an_array_site(self):
        ast = parse_program("int a[3];\nint main() {\n  int *p = &a[2];\n  return *p + a[0];\n}\n")
        sites = get_matched_exprs(ast, UbKind.BUF_OVERFLOW_ARRAY)
        self.assertEqual([print_node(ast.nodes[s.node_id]) for s in sites], ['a[0]'])

    def test_matching_is_complete(self):
        """Every dereference and every signed + - * inside a body is found."""
        ast = parse_program(MIXED)
        derefs = {nid for nid, node in ast.walk()
                  if isinstance(node, c_ast.UnaryOp) and node.op == '*'}
        self.assertEqual({s.node_id for s in get_matched_exprs(ast, UbKind.NULL_PTR_DEREF)}, derefs)
        divisions = {nid for nid, node in ast.walk()
                     if (isinstance(node, c_ast.BinaryOp) and node.op in ('/', '%'))
                     or (isinstance(node, c_ast.Assignment) and node.op in ('/=', '%='))}
        self.assertEqual({s.node_id for s in get_matched_exprs(ast, UbKind.DIVIDE_BY_ZERO)}, divisions)


class ConditionalTests(SimpleTestCase):
    def test_right_operand_of_logical_and(self):
        ast = parse_program("int main() {\n  int x = 1;\n  int y = x && 4 / x;\n  return y;\n}\n")
        (site,) = get_matched_exprs(ast, UbKind.DIVIDE_BY_ZERO)
        anchor = ast.enclosing_statement(site.node_id)
        self.assertTrue(conditionally_evaluated(ast, site.node_id, anchor))

    def test_plain_operand(self):
        ast = parse_program("int main() {\n  int x = 1;\n  int y = 4 / x;\n  return y;\n}\n")
        (site,) = get_matched_exprs(ast, UbKind.DIVIDE_BY_ZERO)
        anchor = ast.enclosing_statement(site.node_id)
        self.assertFalse(conditionally_evaluated(ast, site.node_id, anchor))
