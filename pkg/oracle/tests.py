import random
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from lang.tree import SourceLoc
from toolchain.configs import CompilerConfig
from toolchain.injection import FnInjection
from toolchain.sim import SimToolchain

from .exceptions import OracleError, PreconditionViolated
from .traces import SiteTrace, Terminal
from .verdicts import (FN_BUG, INCONCLUSIVE, OPTIMIZED_AWAY, TraceCache, Verdict, crash_site_verdict,
                       get_executed_sites, is_bug)

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
ASAN_O0 = CompilerConfig('sim', 'O0', 'ASan')
ASAN_O2 = CompilerConfig('sim', 'O2', 'ASan')


def trace(*sites, terminal=Terminal.NORMAL_EXIT, truncated=False):
    return SiteTrace.build([SourceLoc(*s) for s in sites], truncated, terminal)


class IsBugTests(SimpleTestCase):
    def test_crash_site_executed_by_the_other_binary(self):
        crashing = trace((6, 3), (7, 3), (8, 8), terminal=Terminal.CRASH)
        silent = trace((6, 3), (7, 3), (8, 8), (9, 3))
        self.assertEqual(is_bug(crashing, silent), Verdict(FN_BUG))

    def test_crash_site_missing_from_the_other_binary(self):
        crashing = trace((6, 3), (8, 8), terminal=Terminal.CRASH)
        silent = trace((6, 3), (9, 3))
        self.assertEqual(is_bug(crashing, silent).label, OPTIMIZED_AWAY)

    def test_identical_traces(self):
        sites = [(6, 3), (7, 3), (8, 8)]
        crashing = trace(*sites, terminal=Terminal.CRASH)
        self.assertTrue(is_bug(crashing, trace(*sites)).is_fn_bug)

    def test_truncated_traces(self):
        crashing = trace((6, 3), (8, 8), terminal=Terminal.CRASH)
        cut = trace((6, 3), terminal=Terminal.TIMEOUT, truncated=True)
        self.assertEqual(is_bug(crashing, cut).label, INCONCLUSIVE)
        reached = trace((6, 3), (8, 8), terminal=Terminal.TIMEOUT, truncated=True)
        self.assertEqual(is_bug(crashing, reached).label, FN_BUG)
        self.assertEqual(is_bug(cut, trace((6, 3))).label, INCONCLUSIVE)

    def test_preconditions(self):
        crashing = trace((8, 8), terminal=Terminal.CRASH)
        with self.assertRaises(PreconditionViolated):
            is_bug(crashing, crashing)
        with self.assertRaises(PreconditionViolated):
            is_bug(trace((8, 8)), trace((8, 8)))
        with self.assertRaises(PreconditionViolated):
            is_bug(trace(terminal=Terminal.CRASH), trace((8, 8)))

    def test_membership_law_on_random_pairs(self):
        rng = random.Random(20231)
        pool = [(line, offset) for line in range(1, 7) for offset in range(1, 4)]
        for _ in range(10000):
            crashing = trace(*rng.choices(pool, k=rng.randint(1, 8)), terminal=Terminal.CRASH)
            silent = trace(*rng.choices(pool, k=rng.randint(0, 8)))
            expected = crashing.last in silent.sites
            self.assertEqual(is_bug(crashing, silent).label == FN_BUG, expected)

    def test_verdict_text(self):
        verdict = Verdict(INCONCLUSIVE, 'flaky replay')
        self.assertEqual(str(verdict), 'Inconclusive(flaky replay)')
        self.assertEqual(Verdict.parse(str(verdict)), verdict)
        self.assertEqual(Verdict.parse('FnBug'), Verdict(FN_BUG))
        with self.assertRaises(OracleError):
            Verdict.parse('Maybe')


class TraceFormatTests(SimpleTestCase):
    def test_consecutive_repeats_collapse(self):
        self.assertEqual(len(trace((5, 3), (5, 3), (6, 3), (5, 3))), 3)

    def test_cache_text(self):
        original = trace((6, 3), (8, 8), terminal=Terminal.CRASH)
        self.assertEqual(SiteTrace.loads(original.dumps()), original)
        with self.assertRaises(OracleError):
            SiteTrace.loads('8 eight\n')


class SimulatedPipelineTests(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = Path(self._tmp.name)
        self.source = self.workdir / 'fig2.c'
        self.source.write_text(FIG2_PROGRAM)

    def tearDown(self):
        self._tmp.cleanup()

    def binaries(self, injection_text):
        tc = SimToolchain(FnInjection.parse(injection_text))
        return tc, tc.compile(self.source, ASAN_O0, self.workdir), tc.compile(self.source, ASAN_O2, self.workdir)

    def test_fig2_crash_trace_ends_at_the_crash_site(self):
        tc, b_c, _ = self.binaries('')
        trace_c = get_executed_sites(b_c, tc)
        self.assertEqual(trace_c.terminal, Terminal.CRASH)
        self.assertEqual(trace_c.last, CRASH_SITE)

    def test_missed_report_is_a_false_negative(self):
        tc, b_c, b_n = self.binaries('miss kind=BufOverflowPointer opt=O2 prob=1\n')
        trace_n = get_executed_sites(b_n, tc)
        self.assertEqual(trace_n.terminal, Terminal.NORMAL_EXIT)
        self.assertIn(CRASH_SITE, trace_n)
        verdict, crash_site = crash_site_verdict(b_c, b_n, tc)
        self.assertEqual((verdict.label, crash_site), (FN_BUG, CRASH_SITE))

    def test_eliminated_site_is_optimized_away(self):
        tc, b_c, b_n = self.binaries('eliminate kind=BufOverflowPointer opt=O2 prob=1\n')
        self.assertNotIn(CRASH_SITE, get_executed_sites(b_n, tc))
        self.assertEqual(crash_site_verdict(b_c, b_n, tc)[0].label, OPTIMIZED_AWAY)

    def test_step_budget_truncates(self):
        loop = self.workdir / 'loop.c'
        loop.write_text("int main() {\n  while (1) {\n  }\n  return 0;\n}\n")
        tc = SimToolchain()
        result = get_executed_sites(tc.compile(loop, ASAN_O0, self.workdir), tc, step_budget=500)
        self.assertTrue(result.truncated)

    def test_traces_are_cached_per_program_and_config(self):
        tc, b_c, b_n = self.binaries('miss kind=BufOverflowPointer opt=O2 prob=1\n')
        cache = TraceCache(self.workdir / 'traces')
        crash_site_verdict(b_c, b_n, tc, cache=cache)
        path = cache.path(b_c.program_hash, ASAN_O0.config_id)
        self.assertTrue(path.exists())
        self.assertEqual(cache.get(b_c.program_hash, ASAN_O0.config_id).last, CRASH_SITE)
        self.assertEqual(path.parent.name, b_c.program_hash)
        self.assertEqual(path.name, 'sim-O0-ASan.trace')
