import tempfile
import unittest
from pathlib import Path

from django.test import SimpleTestCase, override_settings

from lang.tree import SourceLoc
from match.kinds import UbKind
from oracle.traces import Terminal

from .configs import ASAN, MSAN, UBSAN, CompilerConfig, sanitizers_for
from .discovery import DiscoveredTools, discover_tools, get_toolchain
from .exceptions import CompileFailed, InvalidInjection, ToolMissing, UnsupportedConfig
from .injection import ELIMINATE, MISS, FnInjection
from .outcomes import NORMAL_EXIT, OTHER_CRASH, SAN_REPORT, TIMEOUT, classify
from .sim import PARSE_CACHE_SIZE, SimToolchain, _parse, sim_trace

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

CRASH_SITE = SourceLoc(8, 8)

TOOLS = discover_tools()
NATIVE = sorted(TOOLS.compilers)


class SanitizerTableTests(SimpleTestCase):
    def test_table(self):
        self.assertEqual(sanitizers_for(UbKind.BUF_OVERFLOW_ARRAY), [ASAN, UBSAN])
        self.assertEqual(sanitizers_for(UbKind.USE_AFTER_SCOPE), [ASAN])
        self.assertEqual(sanitizers_for(UbKind.SHIFT_OVERFLOW), [UBSAN])
        self.assertEqual(sanitizers_for(UbKind.USE_OF_UNINIT_MEMORY), [MSAN])

    def test_every_kind_is_covered(self):
        covered = set()
        for kind in UbKind:
            self.assertTrue(sanitizers_for(kind))
            covered.update(sanitizers_for(kind))
        self.assertEqual(covered, {ASAN, UBSAN, MSAN})


class CompilerConfigTests(SimpleTestCase):
    def test_msan_needs_an_llvm_compiler(self):
        with self.assertRaises(UnsupportedConfig):
            CompilerConfig('gcc-trunk', 'O0', MSAN)
        self.assertEqual(CompilerConfig('llvm-trunk', 'O2', MSAN).family, 'llvm')

    def test_unknown_level(self):
        with self.assertRaises(UnsupportedConfig):
            CompilerConfig('sim', 'O4', ASAN)

    def test_flags_disable_recovery(self):
        flags = CompilerConfig('gcc-trunk', 'O2', UBSAN).flags()
        self.assertIn('-g', flags)
        self.assertIn('-O2', flags)
        self.assertIn('-fno-sanitize-recover=all', flags)

    def test_label_parses_back(self):
        cfg = CompilerConfig('sim', 'Os', ASAN)
        self.assertEqual(CompilerConfig.parse(cfg.label()), cfg)
        self.assertEqual(cfg.config_id, 'sim-Os-ASan')
        self.assertIsNone(CompilerConfig.parse('sim:O0').sanitizer)


class ClassifyTests(SimpleTestCase):
    def test_asan_report(self):
        stderr = ("==42==ERROR: AddressSanitizer: global-buffer-overflow on address 0x4c\n"
                  "    #0 0x401234 in main /tmp/w/prog.c:8:8\n")
        outcome = classify(1, '', stderr)
        self.assertEqual(outcome.status, SAN_REPORT)
        self.assertEqual((outcome.sanitizer, outcome.report_kind, outcome.report_line),
                         (ASAN, 'global-buffer-overflow', 8))

    def test_ubsan_report(self):
        outcome = classify(1, 'x\n', "prog.c:12:9: runtime error: division by zero\n")
        self.assertEqual((outcome.sanitizer, outcome.report_line), (UBSAN, 12))
        self.assertEqual(outcome.report_kind, 'division by zero')
        self.assertEqual(outcome.stdout, 'x\n')

    def test_msan_report(self):
        outcome = classify(77, '', "==9==WARNING: MemorySanitizer: use-of-uninitialized-value\n")
        self.assertEqual((outcome.status, outcome.sanitizer), (SAN_REPORT, MSAN))

    def test_other_outcomes(self):
        self.assertEqual(classify(0, '', '').status, NORMAL_EXIT)
        self.assertEqual(classify(3, '', '').exit_code, 3)
        crashed = classify(-11, '', 'Segmentation fault\n')
        self.assertEqual((crashed.status, crashed.signal), (OTHER_CRASH, 11))
        self.assertEqual(classify(-9, '', '', timed_out=True).status, TIMEOUT)

    def test_digest_depends_on_stderr(self):
        self.assertNotEqual(classify(1, '', 'a').stderr_digest, classify(1, '', 'b').stderr_digest)


class InjectionTests(SimpleTestCase):
    RULES = """\
# ground truth for one run
eliminate kind=BufOverflowPointer opt=O2 prob=1
miss kind=* opt=O2 prob=1 sanitizer=ASan
"""

    def test_parse(self):
        injection = FnInjection.parse(self.RULES)
        self.assertEqual([r.action for r in injection.rules], [ELIMINATE, MISS])
        self.assertEqual(injection.rules[0].kind, UbKind.BUF_OVERFLOW_POINTER)
        self.assertIsNone(injection.rules[1].kind)
        self.assertEqual(FnInjection.parse(injection.dumps()), injection)

    def test_first_matching_rule_wins(self):
        injection = FnInjection.parse(self.RULES)
        o2 = CompilerConfig('sim', 'O2', ASAN)
        self.assertEqual(injection.decide(UbKind.BUF_OVERFLOW_POINTER, o2, 'ab', CRASH_SITE), ELIMINATE)
        self.assertEqual(injection.decide(UbKind.USE_AFTER_FREE, o2, 'ab', CRASH_SITE), MISS)
        self.assertIsNone(injection.decide(UbKind.USE_AFTER_FREE, CompilerConfig('sim', 'O0', ASAN),
                                           'ab', CRASH_SITE))

    def test_program_prefix_selects(self):
        injection = FnInjection.parse('miss kind=* opt=* prob=1 program=abc\n')
        cfg = CompilerConfig('sim', 'O0', UBSAN)
        self.assertEqual(injection.decide(UbKind.DIVIDE_BY_ZERO, cfg, 'abcdef', CRASH_SITE), MISS)
        self.assertIsNone(injection.decide(UbKind.DIVIDE_BY_ZERO, cfg, 'fedcba', CRASH_SITE))

    def test_draws_are_deterministic(self):
        injection = FnInjection.parse('miss kind=* opt=* prob=0.5\n')
        cfg = CompilerConfig('sim', 'O1', ASAN)
        texts = [f"x{n} = *p{n}" for n in range(64)]
        first = [injection.decide(UbKind.USE_AFTER_FREE, cfg, 'ab', text) for text in texts]
        second = [injection.decide(UbKind.USE_AFTER_FREE, cfg, 'ab', text) for text in texts]
        self.assertEqual(first, second)
        self.assertIn(MISS, first)
        self.assertIn(None, first)

    def test_draw_follows_the_statement_not_the_program(self):
        injection = FnInjection.parse('miss kind=* opt=* prob=0.5\n')
        cfg = CompilerConfig('sim', 'O2', UBSAN)
        texts = [f"int c{n} = g / (a{n} + ubf_y0)" for n in range(16)]
        original = [injection.decide(UbKind.DIVIDE_BY_ZERO, cfg, 'ab' * 32, text) for text in texts]
        reduced = [injection.decide(UbKind.DIVIDE_BY_ZERO, cfg, 'cd' * 32, text) for text in texts]
        self.assertEqual(original, reduced)

    def test_errors_name_the_line(self):
        for text in ('drop kind=* opt=* prob=1', 'miss kind=Nope', 'miss prob=2', 'miss opt=O9',
                     'miss colour=red', 'miss sanitizer=TSan', 'miss kind'):
            with self.subTest(text=text):
                with self.assertRaises(InvalidInjection) as ctx:
                    FnInjection.parse('\n' + text + '\n')
                self.assertEqual(ctx.exception.lineno, 2)


class SimToolchainTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = Path(self._tmp.name)
        self.source = self.workdir / 'fig2.c'
        self.source.write_text(FIG2_PROGRAM)

    def tearDown(self):
        self._tmp.cleanup()

    def run_sim(self, cfg, injection=''):
        return sim_trace(self.source, cfg, FnInjection.parse(injection), self.workdir)

    def test_covering_sanitizer_reports_at_the_site(self):
        outcome, trace = self.run_sim(CompilerConfig('sim', 'O0', ASAN))
        self.assertEqual(outcome.status, SAN_REPORT)
        self.assertEqual(outcome.report_kind, UbKind.BUF_OVERFLOW_POINTER.value)
        self.assertEqual(outcome.report_line, 8)
        self.assertEqual(trace.last, CRASH_SITE)
        self.assertEqual(trace.terminal, Terminal.CRASH)

    def test_other_sanitizers_stay_silent(self):
        for cfg in (CompilerConfig('sim', 'O0', UBSAN), CompilerConfig('sim', 'O0', None)):
            with self.subTest(cfg=cfg):
                outcome, trace = self.run_sim(cfg)
                self.assertEqual(outcome.status, NORMAL_EXIT)
                self.assertIn(CRASH_SITE, trace)

    def test_missed_report_keeps_the_site(self):
        outcome, trace = self.run_sim(CompilerConfig('sim', 'O2', ASAN), 'miss kind=* opt=O2 prob=1')
        self.assertEqual(outcome.status, NORMAL_EXIT)
        self.assertIn(CRASH_SITE, trace)
        self.assertEqual(trace.terminal, Terminal.NORMAL_EXIT)

    def test_eliminated_report_drops_the_site(self):
        outcome, trace = self.run_sim(CompilerConfig('sim', 'O2', ASAN), 'eliminate kind=* opt=O2 prob=1')
        self.assertEqual(outcome.status, NORMAL_EXIT)
        self.assertNotIn(CRASH_SITE, trace)

    def test_injection_is_scoped_to_its_level(self):
        outcome, _ = self.run_sim(CompilerConfig('sim', 'O0', ASAN), 'miss kind=* opt=O2 prob=1')
        self.assertEqual(outcome.status, SAN_REPORT)

    def test_identity_stands_in_for_the_program_hash(self):
        injection = FnInjection.parse('miss kind=* opt=O2 prob=1 program=feedface\n')
        cfg = CompilerConfig('sim', 'O2', ASAN)
        tc = SimToolchain(injection, identity='feedface' + '0' * 56)
        self.assertEqual(tc.execute(tc.compile(self.source, cfg, self.workdir)).status, NORMAL_EXIT)
        tc = SimToolchain(injection)
        self.assertEqual(tc.execute(tc.compile(self.source, cfg, self.workdir)).status, SAN_REPORT)

    def test_parsed_programs_are_bounded(self):
        self.assertEqual(_parse.cache_info().maxsize, PARSE_CACHE_SIZE)

    def test_execute_matches_the_traced_run(self):
        tc = SimToolchain()
        binary = tc.compile(self.source, CompilerConfig('sim', 'O3', ASAN), self.workdir)
        self.assertEqual(tc.execute(binary).status, SAN_REPORT)
        self.assertEqual(binary.config.config_id, 'sim-O3-ASan')

    def test_unparsable_source(self):
        bad = self.workdir / 'bad.c'
        bad.write_text('int main( {\n')
        with self.assertRaises(CompileFailed):
            SimToolchain().compile(bad, CompilerConfig('sim', 'O0', ASAN), self.workdir)

    def test_out_of_subset_runtime_error_is_another_crash(self):
        prog = self.workdir / 'free.c'
        prog.write_text("int main() {\n  int x = 1;\n  free(&x);\n  return 0;\n}\n")
        tc = SimToolchain()
        outcome = tc.execute(tc.compile(prog, CompilerConfig('sim', 'O0', ASAN), self.workdir))
        self.assertEqual(outcome.status, OTHER_CRASH)


class DiscoveryTests(SimpleTestCase):
    @override_settings(UBF_COMPILERS={'gcc-nowhere': 'ubf-no-such-compiler'})
    def test_missing_compilers_are_dropped(self):
        self.assertEqual(discover_tools().compilers, {})

    def test_sim_needs_no_tools(self):
        tc = get_toolchain(CompilerConfig('sim-b', 'O1', UBSAN), tools=DiscoveredTools())
        self.assertIsInstance(tc, SimToolchain)
        self.assertEqual(tc.compiler_id, 'sim-b')

    def test_unknown_compiler(self):
        with self.assertRaises(ToolMissing):
            get_toolchain(CompilerConfig('gcc-trunk', 'O0', ASAN), tools=DiscoveredTools())


@unittest.skipUnless(NATIVE, 'no compiler configured through UBF_CC_<ID>')
class NativeToolchainTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def build(self, text, cfg):
        source = self.workdir / 'prog.c'
        source.write_text(text)
        tc = get_toolchain(cfg, tools=TOOLS)
        return tc, tc.compile(source, cfg, self.workdir / cfg.config_id)

    def test_normal_exit(self):
        tc, binary = self.build('int main() {\n  printf("hi\\n");\n  return 3;\n}\n',
                                CompilerConfig(NATIVE[0], 'O0', None))
        outcome = tc.execute(binary)
        self.assertEqual((outcome.status, outcome.exit_code, outcome.stdout), (NORMAL_EXIT, 3, 'hi\n'))

    def test_asan_reports_the_overflow_line(self):
        tc, binary = self.build(FIG2_PROGRAM, CompilerConfig(NATIVE[0], 'O0', ASAN))
        outcome = tc.execute(binary)
        self.assertEqual((outcome.status, outcome.sanitizer), (SAN_REPORT, ASAN))
        self.assertEqual(outcome.report_line, 8)

    def test_rejected_source(self):
        with self.assertRaises(CompileFailed):
            self.build('int main( {\n', CompilerConfig(NATIVE[0], 'O0', None))

    @unittest.skipUnless(TOOLS.can_trace, 'gdb and llvm-symbolizer are needed to trace')
    def test_crash_trace_ends_on_the_overflow_line(self):
        tc, binary = self.build(FIG2_PROGRAM, CompilerConfig(NATIVE[0], 'O0', ASAN))
        trace = tc.trace(binary)
        self.assertEqual(trace.terminal, Terminal.CRASH)
        self.assertEqual(trace.last.line, 8)
