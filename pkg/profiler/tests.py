import tempfile

from django.test import SimpleTestCase
from pycparser import c_ast

from lang.printer import canonicalize, print_node
from lang.scopes import GLOBAL_SCOPE
from match.kinds import UbKind
from match.sites import get_matched_exprs
from minivm.interpreter import eval_program
from toolchain.sim import SimToolchain

from .exceptions import CorruptLog, InstrumentError, NotAPointer, NotLive, RunCrashed
from .instrument import instrument
from .profile import Freed, MemObject, profile_seed, q_addr, q_liv, q_mem, q_scp, q_val, run_profile
from .records import RECORD_SIZE, decode_records, encode_record

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

FIG6_SNIPPET = """\
int a[5];
int x = 1;
int main() {
  a[x] = 1;
  return 0;
}
"""

SCOPES = """\
int *s;
int main() {
  int t = 0;
  int u = 1, w = 2;
  for (int j = 0; j < 2; j++) {
    int i = j;
    s = &i;
    t += *s;
  }
  return t + u + w;
}
"""

PRINTING = """\
int g[3] = {1, 2, 3};
int sum(int *p, int n) {
  int total = 0;
  int i;
  for (i = 0; i < n; i++) {
    total = total + p[0] * 2;
    p = p + 1;
  }
  return total;
}
int main() {
  int local[4];
  int *h = malloc(16);
  int j;
  for (j = 0; j < 4; j++) {
    local[j] = j * 3;
    h[j] = local[j] + g[j % 3];
  }
  printf("%d %d\\n", sum(local, 4), sum(h, 4));
  if (h[1] > 100) {
    printf("big\\n");
  }
  free(h);
  return 0;
}
"""


def site_of(ast, kind, text):
    for site in get_matched_exprs(ast, kind):
        if print_node(ast.node(site.node_id)) == text:
            return site
    raise AssertionError(f"no {kind} site '{text}'")


def decl_named(ast, name):
    for nid, node in ast.walk():
        if isinstance(node, c_ast.Decl) and node.name == name:
            return nid
    raise AssertionError(f"no declaration of {name}")


class ProfileTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = self._tmp.name
        self.tc = SimToolchain()

    def tearDown(self):
        self._tmp.cleanup()

    def profile(self, text, kinds=tuple(UbKind)):
        seed = canonicalize(text)
        return seed, profile_seed(seed, kinds, self.tc, self.workdir)


class RecordTests(SimpleTestCase):
    def test_records_decode_in_order(self):
        data = encode_record('RANGE', 3, 0x7ffd0000, 8) + encode_record('VALUE', 4, 1, -5)
        records = decode_records(data)
        self.assertEqual([r.name for r in records], ['RANGE', 'VALUE'])
        self.assertEqual((records[1].hook, records[1].a, records[1].b), (4, 1, -5))

    def test_unsigned_payloads_are_stored_as_their_bit_pattern(self):
        record = decode_records(encode_record('VALUE', 1, 0, 2 ** 64 - 1))[0]
        self.assertEqual(record.b, -1)

    def test_partial_record_is_corrupt(self):
        data = encode_record('FREE', 1, 16)
        self.assertEqual(len(data), RECORD_SIZE)
        with self.assertRaises(CorruptLog):
            decode_records(data[:-3])

    def test_unknown_tag_is_corrupt(self):
        with self.assertRaises(CorruptLog):
            decode_records(b'\x09' + encode_record('FREE', 1, 16)[1:])


class InstrumentTests(SimpleTestCase):
    def test_fig4_logs_buffer_range_and_access(self):
        seed = canonicalize(FIG4_SEED)
        site = site_of(seed, UbKind.BUF_OVERFLOW_POINTER, '*(d + k)')
        program = instrument(seed, UbKind.BUF_OVERFLOW_POINTER, [site])
        self.assertIn('__ubf_range(', program.source)
        self.assertIn('__ubf_access(', program.source)
        roles = sorted(p.role for p in program.hooks.values())
        self.assertEqual(roles, ['access', 'range', 'scope'])

    def test_empty_site_list_logs_only_objects(self):
        seed = canonicalize(PRINTING)
        program = instrument(seed, UbKind.INTEGER_OVERFLOW, [])
        self.assertNotIn('__ubf_value', program.source)
        self.assertNotIn('__ubf_access', program.source)
        self.assertIn('__ubf_malloc(', program.source)
        self.assertIn('__ubf_free(', program.source)

    def test_instrumentation_keeps_program_output(self):
        seed = canonicalize(PRINTING)
        sites = [s for kind in UbKind for s in get_matched_exprs(seed, kind)]
        program = instrument(seed, None, sites)
        before = eval_program(seed)
        after = eval_program(program.ast)
        self.assertEqual(before.stdout, after.stdout)
        self.assertEqual(before.exit_code, after.exit_code)

    def test_hooks_refer_to_seed_nodes(self):
        seed = canonicalize(FIG6_SNIPPET)
        site = site_of(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]')
        program = instrument(seed, UbKind.BUF_OVERFLOW_ARRAY, [site])
        operand_hooks = [p for p in program.hooks.values() if p.role == 'operands']
        self.assertEqual([p.node_id for p in operand_hooks], [site.node_id])

    def test_site_of_another_kind_is_rejected(self):
        seed = canonicalize(FIG6_SNIPPET)
        site = site_of(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]')
        with self.assertRaises(InstrumentError):
            instrument(seed, UbKind.DIVIDE_BY_ZERO, [site])


class QueryTests(ProfileTestCase):
    def test_fig4_access_is_at_the_base_of_b(self):
        seed, profile = self.profile(FIG4_SEED)
        site = site_of(seed, UbKind.BUF_OVERFLOW_POINTER, '*(d + k)')
        obj = q_mem(profile, site)
        self.assertIsInstance(obj, MemObject)
        self.assertEqual(obj.size, 8)
        self.assertEqual(obj.storage, 'global')
        self.assertEqual(q_addr(profile, site), obj.base)

    def test_fig6_subscript_value(self):
        seed, profile = self.profile(FIG6_SNIPPET)
        self.assertEqual(q_val(profile, site_of(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]')), (1,))

    def test_constant_operands(self):
        seed, profile = self.profile("int main() {\n  int y = 3 + 4;\n  return y - 7;\n}\n")
        self.assertEqual(q_val(profile, site_of(seed, UbKind.INTEGER_OVERFLOW, '3 + 4')), (3, 4))

    def test_dead_site_is_not_live(self):
        seed, profile = self.profile("int main() {\n  int z = 0;\n  if (z) {\n    z = 9 / z;\n  }\n  return z;\n}\n")
        site = site_of(seed, UbKind.DIVIDE_BY_ZERO, '9 / z')
        self.assertFalse(q_liv(profile, site))
        with self.assertRaises(NotLive):
            q_val(profile, site)

    def test_loop_site_counts_every_execution(self):
        seed, profile = self.profile(PRINTING)
        site = site_of(seed, UbKind.INTEGER_OVERFLOW, 'j * 3')
        self.assertTrue(q_liv(profile, site))
        self.assertEqual(profile.entry(site).count, 4)
        self.assertEqual(q_val(profile, site), (0, 3))

    def test_pointer_into_an_array_resolves_to_the_array(self):
        seed, profile = self.profile("int main() {\n  int v[4];\n  int *p = v;\n  v[2] = 5;\n  p = p + 2;\n  return *p - 5;\n}\n")
        site = site_of(seed, UbKind.NULL_PTR_DEREF, '*p')
        obj = q_mem(profile, site)
        self.assertEqual(obj.size, 16)
        self.assertEqual(q_addr(profile, site) - obj.base, 8)

    def test_freed_heap_block(self):
        seed, profile = self.profile(
            "int main() {\n  int *p = malloc(8);\n  *p = 1;\n  free(p);\n  return *p;\n}\n",
            [UbKind.USE_AFTER_FREE])
        sites = get_matched_exprs(seed, UbKind.USE_AFTER_FREE)
        self.assertIsInstance(q_mem(profile, sites[0]), MemObject)
        freed = q_mem(profile, sites[-1])
        self.assertIsInstance(freed, Freed)
        self.assertEqual(freed.obj.storage, 'heap')
        self.assertIsNotNone(freed.obj.freed)

    def test_arithmetic_site_is_not_a_pointer(self):
        seed, profile = self.profile(FIG6_SNIPPET)
        with self.assertRaises(NotAPointer):
            q_mem(profile, site_of(seed, UbKind.BUF_OVERFLOW_ARRAY, 'a[x]'))

    def test_scopes(self):
        seed, profile = self.profile(SCOPES)
        self.assertEqual(q_scp(profile, decl_named(seed, 's')), GLOBAL_SCOPE)
        inner = q_scp(profile, decl_named(seed, 'i'))
        use = q_scp(profile, site_of(seed, UbKind.NULL_PTR_DEREF, '*s'))
        self.assertEqual(inner, use)
        self.assertGreaterEqual(seed.scopes.depth(inner), 3)
        self.assertEqual(q_scp(profile, decl_named(seed, 'u')), q_scp(profile, decl_named(seed, 'w')))
        logged = [o for o in profile.objects if o.decl == decl_named(seed, 'i')]
        self.assertTrue(logged)
        self.assertEqual(logged[0].scope, inner)


class RunTests(ProfileTestCase):
    def test_profiles_are_deterministic(self):
        seed = canonicalize(PRINTING)
        first = profile_seed(seed, list(UbKind), self.tc, self.workdir)
        second = profile_seed(seed, list(UbKind), self.tc, self.workdir)
        self.assertEqual(first.dumps(), second.dumps())

    def test_profile_keeps_program_output(self):
        seed, profile = self.profile(PRINTING)
        self.assertEqual(profile.stdout, eval_program(seed).stdout)

    def test_objects_do_not_overlap(self):
        _, profile = self.profile(PRINTING)
        objects = sorted(profile.objects, key=lambda o: o.base)
        for left, right in zip(objects, objects[1:]):
            self.assertLessEqual(left.base + left.size, right.base)

    def test_crashing_seed_is_rejected(self):
        seed = canonicalize("int main() {\n  int x = 1;\n  free(&x);\n  return 0;\n}\n")
        with self.assertRaises(RunCrashed):
            run_profile(instrument(seed, None, []), self.tc, self.workdir)
