import random
import tempfile

from django.test import SimpleTestCase, override_settings

from lang.printer import canonicalize, print_node, print_program
from match.kinds import UbKind
from match.sites import get_matched_exprs
from minivm.interpreter import eval_program
from minivm.outcomes import Ub
from profiler.profile import profile_seed
from toolchain.sim import SimToolchain

from .exceptions import AnchorNotFound, NoEligibleTarget
from .programs import MISMATCH, NOT_LIVE, confirms, generate, insert, load_program, plant, write_programs
from .shadow import ShadowStmt, syn_shadow_stmt

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

POINTERS = """\
int g = 5;
int main() {
  int *p = &g;
  int t = 0;
  if (g > 1) {
    t = 1;
  }
  t = t + *p;
  return t - 6;
}
"""

KIND_SEEDS = {
    UbKind.BUF_OVERFLOW_ARRAY: FIG6_SNIPPET,
    UbKind.BUF_OVERFLOW_POINTER: FIG4_SEED,
    UbKind.USE_AFTER_FREE: """\
int main() {
  int *p = malloc(12);
  int s = 0;
  p[0] = 4;
  s = *p;
  free(p);
  return s - 4;
}
""",
    UbKind.USE_AFTER_SCOPE: POINTERS,
    UbKind.NULL_PTR_DEREF: POINTERS,
    UbKind.INTEGER_OVERFLOW: """\
int main() {
  int a = 3;
  int b = 4;
  int c = a + b;
  return c - 7;
}
""",
    UbKind.SHIFT_OVERFLOW: """\
int main() {
  int a = 1;
  int s = 3;
  int r = a << s;
  return r - 8;
}
""",
    UbKind.DIVIDE_BY_ZERO: """\
int main() {
  int y = 7;
  printf("start\\n");
  int r = 14 / y;
  printf("%d\\n", r);
  return 0;
}
""",
    UbKind.USE_OF_UNINIT_MEMORY: """\
int main() {
  int t = 1;
  if (t) {
    t = 0;
  }
  return t;
}
""",
}


class SynthTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def profiled(self, text, kinds=tuple(UbKind)):
        seed = canonicalize(text)
        return seed, profile_seed(seed, kinds, SimToolchain(), self.workdir)

    def site(self, seed, kind, text):
        for site in get_matched_exprs(seed, kind):
            if print_node(seed.node(site.node_id)) == text:
                return site
        raise AssertionError(f"no {kind} site '{text}'")


class WorkedExampleTests(SynthTestCase):
    def test_fig6_index_moves_one_past_the_end(self):
        seed, profile = self.profiled(FIG6_SNIPPET)
        shadow = syn_shadow_stmt(self.site(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]'), profile,
                                 UbKind.BUF_OVERFLOW_ARRAY)
        self.assertEqual([print_node(a) for a in shadow.assigns], ['ubf_x0 = 4'])
        self.assertIn('overflow=4B', shadow.summary)

    def test_fig6_program(self):
        seed, profile = self.profiled(FIG6_SNIPPET)
        programs = generate(seed, UbKind.BUF_OVERFLOW_ARRAY, profile)
        self.assertEqual(len(programs), 1)
        self.assertIn('a[x + ubf_x0] = 1;', programs[0].source)
        outcome = eval_program(canonicalize(programs[0].source))
        self.assertIsInstance(outcome, Ub)
        self.assertEqual(outcome.kind, UbKind.BUF_OVERFLOW_ARRAY)

    def test_fig4_yields_the_fig2_program(self):
        seed, profile = self.profiled(FIG4_SEED)
        programs = generate(seed, UbKind.BUF_OVERFLOW_POINTER, profile)
        fig2 = [p for p in programs if '*((d + k) + ubf_c0)' in p.source]
        self.assertEqual(len(fig2), 1)
        program = fig2[0]
        line = program.source.splitlines()[program.planted_site.line - 1]
        self.assertIn('*c = *((d + k) + ubf_c0);', line)
        self.assertIn('ubf_c0 = 2;', program.source)
        self.assertIn('overflow=4B', program.shadow)

    def test_divide_by_zero_negates_the_divisor(self):
        seed, profile = self.profiled(KIND_SEEDS[UbKind.DIVIDE_BY_ZERO])
        shadow = syn_shadow_stmt(self.site(seed, UbKind.DIVIDE_BY_ZERO, '14 / y'), profile, UbKind.DIVIDE_BY_ZERO)
        self.assertEqual(print_node(shadow.assigns[0]), 'ubf_y0 = -7')


class GenerateTests(SynthTestCase):
    def test_every_kind_yields_confirmed_programs(self):
        for kind, text in KIND_SEEDS.items():
            with self.subTest(kind=kind):
                seed, profile = self.profiled(text)
                programs = generate(seed, kind, profile)
                self.assertTrue(programs)
                for program in programs:
                    self.assertEqual(program.kind, kind)
                    self.assertNotIn('__ubf_', program.source)
                    self.assertTrue(confirms(canonicalize(program.source), kind, program.planted_site))

    def test_verification_does_not_change_valid_output(self):
        for kind, text in KIND_SEEDS.items():
            with self.subTest(kind=kind):
                seed, profile = self.profiled(text)
                checked = generate(seed, kind, profile, verify=True)
                unchecked = generate(seed, kind, profile, verify=False)
                self.assertEqual([p.source for p in checked], [p.source for p in unchecked])

    def test_dead_sites_yield_nothing(self):
        seed, profile = self.profiled("int main() {\n  int z = 0;\n  if (z) {\n    z = 9 / z;\n  }\n  return z;\n}\n")
        skips = []
        self.assertEqual(generate(seed, UbKind.DIVIDE_BY_ZERO, profile, skips=skips), [])
        self.assertEqual([s.reason for s in skips], [NOT_LIVE])

    def test_output_before_the_planted_site_is_kept(self):
        seed, profile = self.profiled(KIND_SEEDS[UbKind.DIVIDE_BY_ZERO])
        program = generate(seed, UbKind.DIVIDE_BY_ZERO, profile)[0]
        outcome = eval_program(canonicalize(program.source))
        self.assertEqual(outcome.stdout, 'start\n')
        self.assertTrue(eval_program(seed).stdout.startswith(outcome.stdout))

    def test_removing_the_shadow_restores_the_seed(self):
        seed, profile = self.profiled(FIG6_SNIPPET)
        program = generate(seed, UbKind.BUF_OVERFLOW_ARRAY, profile)[0]
        lines = [line.replace(' + ubf_x0', '') for line in program.source.splitlines()
                 if not line.strip().startswith(('int ubf_x0', 'ubf_x0 ='))]
        self.assertEqual('\n'.join(lines) + '\n', print_program(seed))

    def test_monte_carlo_is_reproducible(self):
        seed, profile = self.profiled(KIND_SEEDS[UbKind.INTEGER_OVERFLOW])
        first = generate(seed, UbKind.INTEGER_OVERFLOW, profile, rng=random.Random(7))
        second = generate(seed, UbKind.INTEGER_OVERFLOW, profile, rng=random.Random(7))
        self.assertEqual([p.source for p in first], [p.source for p in second])

    @override_settings(UBF_MONTE_CARLO_DRAWS=0)
    def test_boundary_values_when_sampling_is_disabled(self):
        seed, profile = self.profiled(KIND_SEEDS[UbKind.INTEGER_OVERFLOW])
        programs = generate(seed, UbKind.INTEGER_OVERFLOW, profile)
        self.assertEqual(len(programs), 2)

    def test_fresh_names_avoid_seed_identifiers(self):
        seed, profile = self.profiled("int a[5];\nint ubf_x0 = 1;\nint main() {\n  a[ubf_x0] = 1;\n  return 0;\n}\n")
        program = generate(seed, UbKind.BUF_OVERFLOW_ARRAY, profile)[0]
        self.assertIn('a[ubf_x0 + ubf_x1] = 1;', program.source)

    def test_use_after_scope_needs_an_earlier_block(self):
        seed, profile = self.profiled("int g = 5;\nint main() {\n  int *p = &g;\n  return *p - 5;\n}\n")
        with self.assertRaises(NoEligibleTarget):
            syn_shadow_stmt(self.site(seed, UbKind.USE_AFTER_SCOPE, '*p'), profile, UbKind.USE_AFTER_SCOPE)

    def test_rejected_programs_are_counted(self):
        # the shadow frees p before `*p + *q`, but *q reads the same block first
        text = ("int main() {\n  int *p = malloc(4);\n  int *q = p;\n  *p = 1;\n  int s = *q + *p;\n"
                "  free(p);\n  return s - 2;\n}\n")
        seed, profile = self.profiled(text)
        skips = []
        generate(seed, UbKind.USE_AFTER_FREE, profile, skips=skips)
        self.assertIn(MISMATCH, [s.reason for s in skips])

    def test_increment_is_planted_at_the_type_maximum(self):
        seed, profile = self.profiled("int main() {\n  int x = 1;\n  ++x;\n  return x - 2;\n}\n")
        site = self.site(seed, UbKind.INTEGER_OVERFLOW, '++x')
        shadow = syn_shadow_stmt(site, profile, UbKind.INTEGER_OVERFLOW)
        self.assertEqual([print_node(a) for a in shadow.assigns], ['x = 2147483647'])
        self.assertEqual(shadow.rewrites, ())
        (program,) = [p for p in generate(seed, UbKind.INTEGER_OVERFLOW, profile) if p.planted_site == site.loc]
        self.assertTrue(confirms(canonicalize(program.source), UbKind.INTEGER_OVERFLOW, program.planted_site))

    def test_decrement_is_planted_at_the_type_minimum(self):
        seed, profile = self.profiled("int main() {\n  int x = 1;\n  x--;\n  return x;\n}\n")
        shadow = syn_shadow_stmt(self.site(seed, UbKind.INTEGER_OVERFLOW, 'x--'), profile, UbKind.INTEGER_OVERFLOW)
        self.assertEqual([print_node(a) for a in shadow.assigns], ['x = (-2147483647) - 1'])

    def test_side_effecting_lvalue_is_not_planted(self):
        seed, profile = self.profiled("int a[3];\nint main() {\n  int i = 0;\n  int y = 2;\n  a[i++] += y;\n"
                                      "  return a[0] - 2;\n}\n")
        site = self.site(seed, UbKind.INTEGER_OVERFLOW, 'a[i++] += y')
        skips = []
        programs = generate(seed, UbKind.INTEGER_OVERFLOW, profile, skips=skips)
        self.assertNotIn(site.loc, [p.planted_site for p in programs])
        self.assertIn(site, [s.site for s in skips])


class InsertTests(SynthTestCase):
    def test_insert_places_declarations_before_the_anchor(self):
        seed, profile = self.profiled(FIG6_SNIPPET)
        shadow = syn_shadow_stmt(self.site(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]'), profile,
                                 UbKind.BUF_OVERFLOW_ARRAY)
        body = insert(seed, shadow).function('main').body.block_items
        self.assertEqual([print_node(item) for item in body[:3]],
                         ['int ubf_x0', 'ubf_x0 = 4', 'a[x + ubf_x0] = 1'])

    def test_unbraced_anchor_is_wrapped_in_a_block(self):
        seed, profile = self.profiled("int main() {\n  int y = 2;\n  if (y)\n    y = 8 / y;\n  return y - 4;\n}\n")
        text, emitted, planted, planted_text = plant(
            seed, syn_shadow_stmt(self.site(seed, UbKind.DIVIDE_BY_ZERO, '8 / y'), profile, UbKind.DIVIDE_BY_ZERO))
        self.assertTrue(confirms(emitted, UbKind.DIVIDE_BY_ZERO, planted))
        self.assertIn('ubf_y0 = -2;', text)
        # the statement holding the site, not the if around it
        self.assertTrue(planted_text.startswith('y = '))
        self.assertIn('ubf_y0', planted_text)

    def test_unknown_anchor(self):
        seed = canonicalize(FIG6_SNIPPET)
        with self.assertRaises(AnchorNotFound):
            insert(seed, ShadowStmt(UbKind.DIVIDE_BY_ZERO, anchor=len(seed.nodes) + 5, target=0))


class SidecarTests(SynthTestCase):
    def test_programs_are_written_with_metadata(self):
        seed, profile = self.profiled(FIG6_SNIPPET)
        programs = generate(seed, UbKind.BUF_OVERFLOW_ARRAY, profile, seed_id='fig6')
        paths = write_programs(programs, self.workdir)
        self.assertEqual([p.name for p in paths], ['0.c'])
        self.assertTrue(paths[0].with_suffix('.meta').exists())
        loaded = load_program(paths[0])
        self.assertEqual(loaded, programs[0])
