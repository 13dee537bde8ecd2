from django.test import SimpleTestCase
from pycparser import c_ast

from lang.parser import parse_program
from lang.tree import SourceLoc
from match.kinds import UbKind
from oracle.traces import Terminal

from .exceptions import CallDepthExceeded, InvalidFree
from .interpreter import eval_program, eval_trace
from .outcomes import Decision, Normal, StepLimit, Ub

FIG2_PROGRAM = """\
struct a { int x; };
struct a b[2];
struct a *c = b, *d = b;
int k = 0;
int main() {
  *c = *b;
  k = 2;
  *c = *(d + k);
  return c->x;
}
"""

KIND_PROGRAMS = {
    UbKind.BUF_OVERFLOW_ARRAY: ("""\
int a[5];
int x = 1;
int main() {
  a[x + 4] = 1;
  return 0;
}
""", c_ast.ArrayRef, {}),
    UbKind.BUF_OVERFLOW_POINTER: (FIG2_PROGRAM, c_ast.UnaryOp, {'op': '*'}),
    UbKind.USE_AFTER_FREE: ("""\
int main() {
  int *p = malloc(8);
  *p = 1;
  free(p);
  return *p;
}
""", c_ast.Return, {}),
    UbKind.USE_AFTER_SCOPE: ("""\
int *s;
int main() {
  {
    int i = 3;
    s = &i;
  }
  return *s;
}
""", c_ast.Return, {}),
    UbKind.NULL_PTR_DEREF: ("""\
int *p;
int main() {
  return *p;
}
""", c_ast.Return, {}),
    UbKind.INTEGER_OVERFLOW: ("""\
int main() {
  int x = 2147483647;
  int y = x + 1;
  return y;
}
""", c_ast.BinaryOp, {'op': '+'}),
    UbKind.SHIFT_OVERFLOW: ("""\
int main() {
  int s = 32;
  return 1 << s;
}
""", c_ast.BinaryOp, {'op': '<<'}),
    UbKind.DIVIDE_BY_ZERO: ("""\
int main() {
  int z = 0;
  return 10 / z;
}
""", c_ast.BinaryOp, {'op': '/'}),
    UbKind.USE_OF_UNINIT_MEMORY: ("""\
int main() {
  int u;
  if (u) {
    return 1;
  }
  return 0;
}
""", c_ast.If, {}),
}


def site_of(ast, cls, **attrs):
    """Location of the last node of class cls in preorder."""
    found = [nid for nid, node in ast.walk()
             if isinstance(node, cls) and all(getattr(node, k) == v for k, v in attrs.items())]
    node = ast.nodes[found[-1]]
    if isinstance(node, c_ast.Return):
        return ast.locate(ast.nid(node.expr))
    if isinstance(node, c_ast.If):
        return ast.locate(ast.nid(node.cond))
    return ast.locate(found[-1])


def run(source, **kwargs):
    return eval_program(parse_program(source), **kwargs)


class DetectionTests(SimpleTestCase):
    def test_each_kind_is_reported_at_its_site(self):
        for kind, (source, cls, attrs) in KIND_PROGRAMS.items():
            with self.subTest(kind=kind):
                ast = parse_program(source)
                outcome = eval_program(ast)
                self.assertIsInstance(outcome, Ub)
                self.assertEqual(outcome.kind, kind)
                self.assertEqual(outcome.site, site_of(ast, cls, **attrs))

    def test_fig2_program_overflows_on_line_8(self):
        outcome = run(FIG2_PROGRAM)
        self.assertEqual(outcome.kind, UbKind.BUF_OVERFLOW_POINTER)
        self.assertEqual(outcome.site, SourceLoc(8, 8))

    def test_seed_without_the_shadow_statement_is_clean(self):
        seed = FIG2_PROGRAM.replace("  k = 2;\n", "")
        self.assertEqual(run(seed), Normal(0, ''))

    def test_signed_min_divided_by_minus_one(self):
        outcome = run("int main() {\n  int m = -2147483647 - 1;\n  return m / -1;\n}\n")
        self.assertEqual(outcome.kind, UbKind.INTEGER_OVERFLOW)

    def test_unsigned_arithmetic_wraps(self):
        outcome = run("int main() {\n  unsigned int u = 4294967295U;\n  u = u + 2;\n  return u;\n}\n")
        self.assertEqual(outcome, Normal(1, ''))

    def test_uninitialized_value_outside_a_branch_is_not_reported(self):
        outcome = run("int main() {\n  int u;\n  int v = u + 1;\n  return 0;\n}\n")
        self.assertIsInstance(outcome, Normal)

    def test_address_one_past_the_end_is_not_an_access(self):
        source = "int a[4];\nint main() {\n  int *e = &a[4];\n  return e - a;\n}\n"
        self.assertEqual(run(source), Normal(4, ''))

    def test_pointer_overflow_inside_struct_array_field(self):
        source = ("struct s { int v[2]; int w; };\nstruct s g;\nint main() {\n"
                  "  int i = 2;\n  return g.v[i];\n}\n")
        self.assertEqual(run(source).kind, UbKind.BUF_OVERFLOW_ARRAY)

    def test_double_free(self):
        source = "int main() {\n  int *p = malloc(4);\n  free(p);\n  free(p);\n  return 0;\n}\n"
        self.assertEqual(run(source).kind, UbKind.USE_AFTER_FREE)

    def test_free_of_stack_object_is_rejected(self):
        with self.assertRaises(InvalidFree):
            run("int main() {\n  int x = 0;\n  free(&x);\n  return 0;\n}\n")

    def test_runaway_recursion(self):
        source = "int f(int n) {\n  return f(n + 1);\n}\nint main() {\n  return f(0);\n}\n"
        with self.assertRaises(CallDepthExceeded):
            run(source)


class ExecutionTests(SimpleTestCase):
    def test_minimal_program(self):
        self.assertEqual(run("int main(){return 0;}"), Normal(0, ''))

    def test_exit_code_is_low_byte(self):
        self.assertEqual(run("int main(){return 300;}").exit_code, 44)
        self.assertEqual(run("int main(){return -1;}").exit_code, 255)

    def test_printf_output(self):
        source = 'int main() {\n  int x = -5;\n  printf("%d %u %x\\n", x, 7, 255);\n  return 0;\n}\n'
        self.assertEqual(run(source).stdout, "-5 7 ff\n")

    def test_struct_copy_and_field_access(self):
        source = ("struct p { int x; int y; };\nint main() {\n  struct p a = {3, 4};\n"
                  "  struct p b;\n  b = a;\n  return b.x * 10 + b.y;\n}\n")
        self.assertEqual(run(source), Normal(34, ''))

    def test_static_local_keeps_its_value(self):
        source = ("int next() {\n  static int n = 0;\n  n = n + 1;\n  return n;\n}\n"
                  "int main() {\n  next();\n  next();\n  return next();\n}\n")
        self.assertEqual(run(source), Normal(3, ''))

    def test_loop_with_break_and_continue(self):
        source = ("int main() {\n  int i;\n  int n = 0;\n  for (i = 0; i < 10; i++) {\n"
                  "    if (i == 2) {\n      continue;\n    }\n    if (i == 5) {\n      break;\n    }\n"
                  "    n = n + i;\n  }\n  return n;\n}\n")
        self.assertEqual(run(source), Normal(8, ''))

    def test_step_limit(self):
        outcome, trace = eval_trace(parse_program("int main() {\n  while (1) {\n  }\n  return 0;\n}\n"),
                                    step_limit=1000)
        self.assertIsInstance(outcome, StepLimit)
        self.assertTrue(trace.truncated)
        self.assertEqual(trace.terminal, Terminal.TIMEOUT)

    def test_recorder_sees_logged_values(self):
        records = []
        source = "int main() {\n  int x = 7;\n  return (int) __ubf_value(3, 1, x);\n}\n"
        outcome = run(source, recorder=lambda *record: records.append(record))
        self.assertEqual(outcome, Normal(7, ''))
        self.assertEqual(records, [('VALUE', 3, 1, 7)])


class TraceTests(SimpleTestCase):
    def test_straight_line_main(self):
        ast = parse_program("int main() {\n  int x = 1;\n  x = 2;\n  return x;\n}\n")
        outcome, trace = eval_trace(ast)
        statements = ast.function('main').body.block_items
        self.assertEqual(outcome, Normal(2, ''))
        self.assertEqual(trace.sites, tuple(ast.locate(ast.nid(s)) for s in statements))
        self.assertEqual(trace.terminal, Terminal.NORMAL_EXIT)

    def test_fig2_trace_ends_at_crash_site(self):
        outcome, trace = eval_trace(parse_program(FIG2_PROGRAM))
        self.assertEqual(trace.last, SourceLoc(8, 8))
        self.assertEqual(trace.terminal, Terminal.CRASH)

    def test_loop_body_repeats_once_per_iteration(self):
        source = ("int main() {\n  int i;\n  int n = 0;\n  for (i = 0; i < 5; i++) {\n"
                  "    n = n | i;\n  }\n  return n;\n}\n")
        ast = parse_program(source)
        _, trace = eval_trace(ast)
        body = ast.function('main').body.block_items[2].stmt.block_items[0]
        self.assertEqual(trace.sites.count(ast.locate(ast.nid(body))), 5)


class PolicyTests(SimpleTestCase):
    ARRAY, _, _ = KIND_PROGRAMS[UbKind.BUF_OVERFLOW_ARRAY]

    def test_ignored_violation_continues_with_dropped_write(self):
        outcome = run(self.ARRAY, policy=lambda v: Decision.IGNORE)
        self.assertIsInstance(outcome, Normal)
        violation, decision = outcome.first_suppressed
        self.assertEqual(violation.kind, UbKind.BUF_OVERFLOW_ARRAY)
        self.assertEqual(decision, Decision.IGNORE)

    def test_elided_site_leaves_the_trace(self):
        ast = parse_program(self.ARRAY)
        site = site_of(ast, c_ast.ArrayRef)
        outcome, trace = eval_trace(ast, policy=lambda v: Decision.ELIDE)
        self.assertIsInstance(outcome, Normal)
        self.assertNotIn(site, trace)

    def test_later_violations_are_silenced(self):
        source = "int a[2];\nint main() {\n  int z = 0;\n  a[2] = 1;\n  return 10 / z;\n}\n"

        def policy(violation):
            if violation.kind == UbKind.BUF_OVERFLOW_ARRAY:
                return Decision.IGNORE
            return Decision.REPORT

        outcome = run(source, policy=policy)
        self.assertEqual(outcome.exit_code, 0)
        self.assertEqual([v.kind for v, _ in outcome.suppressed],
                         [UbKind.BUF_OVERFLOW_ARRAY, UbKind.DIVIDE_BY_ZERO])

    def test_report_policy_stops(self):
        source, _, _ = KIND_PROGRAMS[UbKind.DIVIDE_BY_ZERO]
        self.assertIsInstance(run(source, policy=lambda v: Decision.REPORT), Ub)
