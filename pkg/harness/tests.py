import json
import random
import tempfile
from collections import Counter
from dataclasses import replace
from io import StringIO
from pathlib import Path

from django.contrib.auth import get_user_model
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from rest_framework import status
from rest_framework.test import APIClient

from lang.parser import parse_program
from lang.printer import canonicalize
from match.kinds import UbKind
from match.sites import match_all
from minivm.interpreter import eval_program
from oracle.verdicts import FN_BUG, INCONCLUSIVE, OPTIMIZED_AWAY
from profiler.instrument import instrument
from profiler.profile import profile_seed
from synth.programs import confirms, generate
from toolchain.base import program_hash
from toolchain.configs import CompilerConfig
from toolchain.exceptions import ToolMissing
from toolchain.injection import NO_INJECTION, FnInjection
from toolchain.outcomes import NORMAL_EXIT, OTHER_CRASH, SAN_REPORT, TIMEOUT, RunOutcome
from toolchain.sim import SimToolchain

from .campaign import CampaignRunner, programs_for_seed, run_campaign
from .config import BUNDLED_SEEDS, CampaignConfig, load_config, parse_config
from .evaluation import evaluate_oracle
from .exceptions import FindingNotFound, InvalidCampaignConfig, ReducerFailed, SeedSourceError
from .findings import CampaignStore, Finding, dedup
from .models import Campaign
from .pairs import DISCREPANT, NO_DISCREPANCY, SKIP, candidate_pairs, classify_pair
from .reduce import reduce_hook
from .replay import replay_finding
from .report import build_report
from .seedgen import generate_seed, is_ub_free
from .sources import iter_seeds
from .sync import sync_campaign

DIVIDE_SEED = """\
int g = 360;
int main() {
  int a = 5;
  int b = 3;
  int c = g / a;
  int d = c / b;
  printf("%d %d\\n", c, d);
  return 0;
}
"""

UBSAN_O0 = CompilerConfig('sim', 'O0', 'UBSan')
UBSAN_O2 = CompilerConfig('sim', 'O2', 'UBSan')
ASAN_O0 = CompilerConfig('sim', 'O0', 'ASan')

MISS_O2 = FnInjection.parse('miss kind=DivideByZero opt=O2 prob=1\n')
ELIMINATE_O2 = FnInjection.parse('eliminate kind=DivideByZero opt=O2 prob=1\n')


def outcome(status_, **kwargs):
    return RunOutcome(status_, **kwargs)


def finding(**changes):
    base = Finding('s1', 'DivideByZero', 'sim:O0:UBSan', 'sim:O2:UBSan', '5,13', 'FnBug', 'ab' * 32)
    return replace(base, **changes)


class PairTests(SimpleTestCase):
    def test_one_report_against_a_normal_exit_is_discrepant(self):
        decision = classify_pair(outcome(SAN_REPORT, exit_code=1), outcome(NORMAL_EXIT, exit_code=0))
        self.assertEqual((decision.label, decision.crash), (DISCREPANT, 'a'))
        decision = classify_pair(outcome(NORMAL_EXIT, exit_code=0), outcome(SAN_REPORT, exit_code=1))
        self.assertEqual((decision.label, decision.crash), (DISCREPANT, 'b'))

    def test_agreeing_outcomes(self):
        self.assertEqual(classify_pair(outcome(SAN_REPORT), outcome(SAN_REPORT)).label, NO_DISCREPANCY)
        self.assertEqual(classify_pair(outcome(NORMAL_EXIT), outcome(NORMAL_EXIT)).label, NO_DISCREPANCY)

    def test_timeouts_and_other_crashes_are_skipped(self):
        self.assertEqual(classify_pair(outcome(SAN_REPORT), outcome(TIMEOUT)).label, SKIP)
        self.assertEqual(classify_pair(outcome(OTHER_CRASH, signal=11), outcome(NORMAL_EXIT)).label, SKIP)

    def test_candidate_pairs(self):
        gcc_o2 = CompilerConfig('gcc', 'O2', 'UBSan')
        pairs = candidate_pairs([UBSAN_O0, UBSAN_O2, gcc_o2, ASAN_O0])
        self.assertIn((UBSAN_O0, UBSAN_O2), pairs)
        self.assertIn((UBSAN_O2, gcc_o2), pairs)
        # different compiler and different level, or different sanitizer
        self.assertNotIn((UBSAN_O0, gcc_o2), pairs)
        self.assertFalse(any(ASAN_O0 in pair for pair in pairs))


class FindingTests(SimpleTestCase):
    def test_dedup_keeps_the_first_per_key(self):
        first = finding()
        same_place = finding(seed_id='s2', cfg_crash='sim:O1:UBSan')
        other_site = finding(crash_site='6,13')
        self.assertEqual(dedup([first, same_place, other_site]), [first, other_site])

    def test_dedup_key_uses_the_nocrash_config(self):
        self.assertNotEqual(finding().dedup_key, finding(cfg_nocrash='sim:O3:UBSan').dedup_key)
        self.assertEqual(finding().id, finding(cfg_crash='sim:Os:UBSan').id)

    def test_store_ignores_a_torn_last_line(self):
        with tempfile.TemporaryDirectory() as root:
            store = CampaignStore(root)
            store.ensure()
            store.record_verdict(finding())
            with (Path(root) / 'findings.jsonl').open('a') as fh:
                fh.write('{"seed_id": "s9", "ki')
            self.assertEqual(len(CampaignStore(root).findings()), 1)

    def test_only_fn_bugs_become_findings(self):
        with tempfile.TemporaryDirectory() as root:
            store = CampaignStore(root)
            store.ensure()
            self.assertIsNone(store.record_verdict(finding(verdict='OptimizedAway', program_hash='cd' * 32)))
            self.assertIsNotNone(store.record_verdict(finding()))
            self.assertIsNone(store.record_verdict(finding(seed_id='s2', cfg_crash='sim:O1:UBSan')))
            self.assertEqual(len(store.verdicts()), 3)
            self.assertEqual(len(store.findings()), 1)
            with self.assertRaises(FindingNotFound):
                store.finding('000000000000')

    def test_verdicts_logged_twice_are_counted_once(self):
        # a run killed between logging a seed's verdicts and marking it done logs them again on resume
        with tempfile.TemporaryDirectory() as root:
            store = CampaignStore(root)
            store.ensure()
            store.record_verdict(finding())
            store.record_verdict(finding(verdict='OptimizedAway', program_hash='cd' * 32))
            store.record_verdict(finding())
            verdicts = CampaignStore(root).verdicts()
            self.assertEqual([v.program_hash for v in verdicts], ['ab' * 32, 'cd' * 32])
            result = evaluate_oracle(verdicts, MISS_O2)
            self.assertEqual((result.true_positives, result.false_negatives), (1, 1))


class BundledSeedTests(SimpleTestCase):
    """Every bundled seed through every kind on the simulated toolchain."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls._tmp = tempfile.TemporaryDirectory()
        cls.tc = SimToolchain()
        cls.seeds = [(path.stem, canonicalize(path.read_text())) for path in sorted(BUNDLED_SEEDS.glob('*.c'))]
        cls.profiles = {}
        cls.emitted = Counter()
        cls.unconfirmed = []
        for seed_id, seed in cls.seeds:
            profile = profile_seed(seed, list(UbKind), cls.tc, cls.workdir(seed_id))
            cls.profiles[seed_id] = profile
            for kind in UbKind:
                programs = generate(seed, kind, profile, verify=False, rng=random.Random(seed_id), seed_id=seed_id)
                for program in programs:
                    cls.emitted[kind] += 1
                    if not confirms(canonicalize(program.source), kind, program.planted_site):
                        cls.unconfirmed.append(f"{seed_id} {kind} {program.planted_site}")

    @classmethod
    def tearDownClass(cls):
        cls._tmp.cleanup()
        super().tearDownClass()

    @classmethod
    def workdir(cls, seed_id):
        return Path(cls._tmp.name) / seed_id

    def test_every_emitted_program_shows_its_kind_at_its_site(self):
        self.assertGreaterEqual(len(self.seeds), 50)
        self.assertEqual(self.unconfirmed, [])

    def test_every_kind_is_emitted(self):
        for kind in UbKind:
            with self.subTest(kind=kind):
                self.assertGreater(self.emitted[kind], 0)

    def test_buffer_overflows_are_the_most_numerous(self):
        buffers = self.emitted[UbKind.BUF_OVERFLOW_ARRAY] + self.emitted[UbKind.BUF_OVERFLOW_POINTER]
        for kind in UbKind:
            if kind not in (UbKind.BUF_OVERFLOW_ARRAY, UbKind.BUF_OVERFLOW_POINTER):
                with self.subTest(kind=kind):
                    self.assertGreater(buffers, self.emitted[kind])

    def test_instrumentation_keeps_seed_output(self):
        for seed_id, seed in self.seeds:
            with self.subTest(seed=seed_id):
                program = instrument(seed, None, match_all(seed, list(UbKind)))
                before, after = eval_program(seed), eval_program(program.ast)
                self.assertEqual((after.stdout, after.exit_code), (before.stdout, before.exit_code))
                self.assertEqual(self.profiles[seed_id].stdout, before.stdout)

    def test_profiles_serialize_identically(self):
        for seed_id, seed in self.seeds:
            with self.subTest(seed=seed_id):
                again = profile_seed(seed, list(UbKind), self.tc, self.workdir(seed_id))
                self.assertEqual(again.dumps(), self.profiles[seed_id].dumps())


class ConfigTests(SimpleTestCase):
    def test_valid_document(self):
        cfg = parse_config({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan'],
                            'kinds': ['divide-by-zero', 'DivideByZero', 'ShiftOverflow']})
        self.assertEqual(cfg.matrix, (UBSAN_O0, UBSAN_O2))
        self.assertEqual(cfg.kinds, (UbKind.DIVIDE_BY_ZERO, UbKind.SHIFT_OVERFLOW))
        self.assertEqual(cfg.sanitizers, ['UBSan'])
        self.assertEqual(cfg.seed_source, 'bundled')

    def test_kinds_default_to_all(self):
        cfg = parse_config({'output_root': '/tmp/c', 'matrix': ['sim:O0:ASan', 'sim:O2:ASan']})
        self.assertEqual(cfg.kinds, tuple(UbKind))

    def test_errors_name_the_field(self):
        cases = [
            ({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O2:ASan']}, 'matrix'),
            ({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O9:UBSan']}, 'matrix'),
            ({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O2']}, 'matrix'),
            ({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan'], 'kinds': ['Nope']}, 'kinds'),
            ({'output_root': '/tmp/c', 'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan'], 'workers': 0}, 'workers'),
            ({'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan']}, 'output_root'),
        ]
        for data, field in cases:
            with self.assertRaises(InvalidCampaignConfig) as ctx:
                parse_config(data)
            self.assertIn(field, ctx.exception.errors)

    def test_load_config_defaults_the_output_root(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'nightly.json'
            path.write_text(json.dumps({'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan']}))
            self.assertEqual(Path(load_config(path).output_root).name, 'nightly')
            path.write_text('{not json')
            with self.assertRaises(InvalidCampaignConfig):
                load_config(path)


class SeedTests(SimpleTestCase):
    def test_generated_seeds_are_valid_and_ub_free(self):
        for n in range(5):
            text = generate_seed(random.Random(n))
            parse_program(text)
            self.assertTrue(is_ub_free(text))

    def test_generation_is_reproducible(self):
        self.assertEqual(generate_seed(random.Random(7)), generate_seed(random.Random(7)))

    def test_bundled_seeds_parse_and_are_ub_free(self):
        files = sorted(BUNDLED_SEEDS.glob('*.c'))
        self.assertGreaterEqual(len(files), 50)
        for path in files:
            with self.subTest(seed=path.name):
                self.assertTrue(is_ub_free(path.read_text()))

    def test_sources(self):
        cfg = CampaignConfig('/tmp/c', (UBSAN_O0, UBSAN_O2), max_seeds=3)
        self.assertEqual([s.seed_id for s in iter_seeds(cfg)],
                         [p.stem for p in sorted(BUNDLED_SEEDS.glob('*.c'))][:3])
        builtin = replace(cfg, seed_source='builtin:2', campaign_seed=4)
        first = list(iter_seeds(builtin))
        self.assertEqual([s.seed_id for s in first], ['builtin-0000', 'builtin-0001'])
        self.assertEqual(first, list(iter_seeds(builtin)))

    def test_missing_directory(self):
        cfg = CampaignConfig('/tmp/c', (UBSAN_O0, UBSAN_O2), seed_source='/nonexistent/seeds')
        with self.assertRaises(SeedSourceError):
            list(iter_seeds(cfg))


class CampaignTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.seeds = self.tmp / 'seeds'
        self.seeds.mkdir()
        (self.seeds / 'div.c').write_text(DIVIDE_SEED)

    def tearDown(self):
        self._tmp.cleanup()

    def config(self, name='c', **changes):
        cfg = CampaignConfig(str(self.tmp / name), (UBSAN_O0, UBSAN_O2), seed_source=str(self.seeds),
                             kinds=(UbKind.DIVIDE_BY_ZERO,), campaign_seed=11)
        return replace(cfg, **changes)


class CampaignTests(CampaignTestCase):
    def test_empty_directory_gives_an_empty_report(self):
        report = build_report(self.tmp / 'nothing')
        self.assertEqual(report.findings, [])
        self.assertTrue(report.balanced())

    def test_faithful_sanitizer_yields_no_findings(self):
        report = run_campaign(self.config())
        counters = report.counters
        self.assertEqual(report.findings, [])
        self.assertGreater(counters['programs'], 0)
        self.assertEqual(counters['pairs'], counters['programs'])
        self.assertEqual(counters['no_discrepancy'], counters['pairs'])
        self.assertTrue(report.balanced())

    def test_missed_reports_become_findings(self):
        report = run_campaign(self.config(), MISS_O2)
        self.assertEqual(len(report.findings), report.counters['programs'])
        self.assertEqual(report.counters[FN_BUG], report.counters['discrepant'])
        for f in report.findings:
            self.assertEqual((f.cfg_crash, f.cfg_nocrash, f.kind), ('sim:O0:UBSan', 'sim:O2:UBSan', 'DivideByZero'))
            self.assertEqual(f.crash_site, f.planted_site)
            self.assertTrue((self.tmp / 'c' / 'programs' / f"{f.program_hash}.c").exists())
            self.assertTrue((self.tmp / 'c' / 'programs' / f"{f.program_hash}.meta").exists())
        self.assertEqual(report.tally('opt_level'), {'O2': len(report.findings)})

    def test_eliminated_sites_are_not_findings(self):
        report = run_campaign(self.config(), ELIMINATE_O2)
        self.assertEqual(report.findings, [])
        self.assertGreater(report.counters[OPTIMIZED_AWAY], 0)
        self.assertEqual(report.counters[OPTIMIZED_AWAY], report.counters['discrepant'])

    def test_resumed_campaign_matches_a_fresh_one(self):
        (self.seeds / 'div2.c').write_text(DIVIDE_SEED.replace('360', '720'))
        run_campaign(self.config('resumed', max_seeds=1), MISS_O2)
        resumed = run_campaign(self.config('resumed'), MISS_O2)
        fresh = run_campaign(self.config('fresh'), MISS_O2)
        self.assertEqual([f.id for f in resumed.findings], [f.id for f in fresh.findings])
        self.assertEqual(resumed.counters, fresh.counters)
        again = run_campaign(self.config('fresh'), MISS_O2)
        self.assertEqual(again.counters, fresh.counters)

    def test_generation_is_deterministic(self):
        cfg = self.config()
        seed = next(iter_seeds(cfg))
        first = programs_for_seed(seed, cfg, self.tmp / 'w1')
        second = programs_for_seed(seed, cfg, self.tmp / 'w2')
        self.assertEqual([p.source for p in first], [p.source for p in second])

    def test_toolchains_are_built_once_per_compiler(self):
        runner = CampaignRunner(self.config(), NO_INJECTION)
        self.assertIs(runner.toolchain('sim'), runner.toolchain('sim'))
        with self.assertRaises(ToolMissing):
            runner.toolchain('gcc-trunk')


class EvaluationTests(CampaignTestCase):
    def test_scores_against_ground_truth(self):
        records = [finding(planted_site='5,13'), finding(verdict='OptimizedAway', planted_site='5,13')]
        result = evaluate_oracle(records, MISS_O2)
        self.assertEqual((result.true_positives, result.false_negatives), (1, 1))
        result = evaluate_oracle(records, ELIMINATE_O2)
        self.assertEqual((result.false_positives, result.eliminated, result.eliminated_correct), (1, 2, 1))
        self.assertEqual(result.precision, 0.0)

    def test_precision_and_recall_on_injected_programs(self):
        base = self.config('scored', seed_source='builtin:12')
        hashes, used = [], 0
        for seed in iter_seeds(base):
            used += 1
            for program in programs_for_seed(seed, base, self.tmp / 'gen' / seed.seed_id):
                phash = program_hash(program.source)
                if phash not in hashes:
                    hashes.append(phash)
            if len(hashes) >= 40:
                break
        self.assertGreaterEqual(len(hashes), 40)
        rules = [f"miss opt=O2 prob=1 program={h[:16]}" for h in hashes[:20]]
        rules += [f"eliminate opt=O2 prob=1 program={h[:16]}" for h in hashes[20:40]]
        injection = FnInjection.parse('\n'.join(rules) + '\n')

        cfg = replace(base, max_seeds=used)
        report = run_campaign(cfg, injection)
        result = evaluate_oracle(CampaignStore(cfg.output_root).verdicts(), injection)
        self.assertEqual(result.true_positives, 20)
        self.assertEqual((result.false_positives, result.false_negatives), (0, 0))
        self.assertEqual((result.eliminated, result.eliminated_correct), (20, 20))
        self.assertEqual((result.precision, result.recall), (1.0, 1.0))
        self.assertEqual(len(report.findings), 20)


class ReplayAndReduceTests(CampaignTestCase):
    def setUp(self):
        super().setUp()
        self.cfg = self.config()
        self.report = run_campaign(self.cfg, MISS_O2)
        self.store = CampaignStore(self.cfg.output_root)
        self.finding = self.report.findings[0]

    def test_replay_reproduces(self):
        verdict = replay_finding(self.cfg.output_root, self.finding.id)
        self.assertEqual(verdict.label, FN_BUG)

    def test_replay_without_the_discrepancy_is_flaky(self):
        (Path(self.cfg.output_root) / 'injection.txt').write_text('')
        verdict = replay_finding(self.cfg.output_root, self.finding.id)
        self.assertEqual(verdict.label, INCONCLUSIVE)
        self.assertIn('flaky', verdict.reason)

    def test_replay_unknown_finding(self):
        with self.assertRaises(FindingNotFound):
            replay_finding(self.cfg.output_root, 'ffffffffffff')

    def test_identity_reducer_keeps_the_finding(self):
        reduced = reduce_hook(self.finding, self.store, replace(self.cfg, reducer='true'), MISS_O2)
        self.assertEqual(reduced, self.store.program_path(self.finding.program_hash).read_text())
        self.assertEqual(self.store.finding(self.finding.id).reduced, f"{self.finding.program_hash}.reduced.c")
        script = Path(self.cfg.output_root) / 'reduce' / self.finding.id / 'interesting.sh'
        self.assertIn('--expect FnBug', script.read_text())

    def test_failing_reducer(self):
        with self.assertRaises(ReducerFailed):
            reduce_hook(self.finding, self.store, replace(self.cfg, reducer='false'), MISS_O2)
        self.assertEqual(self.store.finding(self.finding.id).reduced, '')

    def test_reduced_program_that_lost_the_discrepancy(self):
        with self.assertRaises(ReducerFailed):
            reduce_hook(self.finding, self.store, replace(self.cfg, reducer='true'), NO_INJECTION)


DEAD_LINE_SEED = """\
int g = 360;
int main() {{
  int unused = 7;
  int a{n} = {a};
  int b{n} = 3;
  int c{n} = g / a{n};
  int d{n} = c{n} / b{n};
  printf("%d %d\\n", c{n}, d{n});
  return 0;
}}
"""

DROP_DEAD_LINE = "#!/bin/sh\nsed -i '/unused/d' \"$2\"\n"


class PartialInjectionReduceTests(CampaignTestCase):
    def setUp(self):
        super().setUp()
        seeds = self.tmp / 'dead-line-seeds'
        seeds.mkdir()
        for n in range(8):
            (seeds / f"dl{n}.c").write_text(DEAD_LINE_SEED.format(n=n, a=n + 2))
        reducer = self.tmp / 'drop_dead_line.sh'
        reducer.write_text(DROP_DEAD_LINE)
        reducer.chmod(0o755)
        self.injection = FnInjection.parse('miss kind=DivideByZero opt=O2 prob=0.5\n')
        self.cfg = self.config('partial', seed_source=str(seeds))
        self.report = run_campaign(self.cfg, self.injection)
        self.store = CampaignStore(self.cfg.output_root)
        self.reducing = replace(self.cfg, reducer=str(reducer))

    def test_some_but_not_all_programs_are_missed(self):
        self.assertGreater(len(self.report.findings), 0)
        self.assertGreater(self.report.counters['no_discrepancy'], 0)

    def test_deleting_a_dead_line_keeps_every_finding(self):
        for found in self.report.findings:
            with self.subTest(finding=found.id):
                reduced = reduce_hook(found, self.store, self.reducing, self.injection)
                self.assertNotIn('unused', reduced)
                self.assertEqual(self.store.finding(found.id).reduced, f"{found.program_hash}.reduced.c")

    def test_ground_truth_follows_the_planted_statement(self):
        result = evaluate_oracle(self.store.verdicts(), self.injection)
        self.assertEqual(result.true_positives, len(self.report.findings))
        self.assertEqual((result.false_positives, result.false_negatives), (0, 0))


class ApiTests(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        seeds = Path(self._tmp.name) / 'seeds'
        seeds.mkdir()
        (seeds / 'div.c').write_text(DIVIDE_SEED)
        self.cfg = CampaignConfig(str(Path(self._tmp.name) / 'api'), (UBSAN_O0, UBSAN_O2),
                                  seed_source=str(seeds), kinds=(UbKind.DIVIDE_BY_ZERO,), name='api')
        self.report = run_campaign(self.cfg, MISS_O2)
        self.campaign = sync_campaign(self.cfg.output_root)
        self.client = APIClient()
        self.user = get_user_model().objects.create_user(username='analyst', password='s3cret-pass')
        self.client.force_authenticate(user=self.user)

    def tearDown(self):
        self._tmp.cleanup()

    def test_sync_is_idempotent(self):
        again = sync_campaign(self.cfg.output_root)
        self.assertEqual(again.pk, self.campaign.pk)
        self.assertEqual(again.findings.count(), len(self.report.findings))
        self.assertEqual(Campaign.objects.count(), 1)

    def test_campaign_list_and_detail(self):
        response = self.client.get('/api/campaigns/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data[0]['name'], 'api')
        self.assertEqual(response.data[0]['findings_count'], len(self.report.findings))
        response = self.client.get(f'/api/campaigns/{self.campaign.pk}/')
        self.assertEqual(response.data['config']['matrix'], ['sim:O0:UBSan', 'sim:O2:UBSan'])

    def test_report(self):
        response = self.client.get(f'/api/campaigns/{self.campaign.pk}/report/')
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertTrue(response.data['balanced'])
        self.assertEqual(response.data['findings'], len(self.report.findings))

    def test_finding_filters(self):
        url = f'/api/campaigns/{self.campaign.pk}/findings/'
        self.assertEqual(len(self.client.get(url, {'kind': 'DivideByZero'}).data), len(self.report.findings))
        self.assertEqual(self.client.get(url, {'opt_level': 'O0'}).data, [])
        first = self.report.findings[0]
        response = self.client.get(f'{url}{first.id}/')
        self.assertEqual(response.data['crash_site'], first.crash_site)

    def test_missing_objects(self):
        response = self.client.get('/api/campaigns/999/findings/')
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)
        self.assertEqual(response.data, {"error": "Campaign not found"})
        response = self.client.get(f'/api/campaigns/{self.campaign.pk}/findings/nope/')
        self.assertEqual(response.status_code, status.HTTP_404_NOT_FOUND)
        self.assertEqual(self.client.get('/api/campaigns/999/').status_code, status.HTTP_404_NOT_FOUND)

    def test_authentication_required(self):
        response = APIClient().get('/api/campaigns/')
        self.assertEqual(response.status_code, status.HTTP_401_UNAUTHORIZED)


class CommandTests(TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.seed = self.tmp / 'div.c'
        self.seed.write_text(DIVIDE_SEED)

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()

    def test_generate_writes_programs_and_sidecars(self):
        out = self.call('generate', str(self.seed), '--kind', 'DivideByZero', '--out', str(self.tmp / 'gen'))
        self.assertIn('DivideByZero:', out)
        programs = sorted((self.tmp / 'gen' / 'DivideByZero').glob('*.c'))
        self.assertTrue(programs)
        meta = programs[0].with_suffix('.meta').read_text()
        self.assertIn('kind=DivideByZero', meta)
        self.assertIn('seed_id=div', meta)

    def test_oracle_verdicts(self):
        self.call('generate', str(self.seed), '--kind', 'DivideByZero', '--out', str(self.tmp / 'gen'))
        program = sorted((self.tmp / 'gen' / 'DivideByZero').glob('*.c'))[0]
        injection = self.tmp / 'miss.txt'
        injection.write_text(MISS_O2.dumps())
        out = self.call('oracle', str(program), '--pair', 'sim:O0:UBSan,sim:O2:UBSan',
                        '--injection', str(injection), '--expect', 'FnBug')
        self.assertIn('verdict: FnBug', out)
        with self.assertRaises(CommandError):
            self.call('oracle', str(program), '--pair', 'sim:O0:UBSan,sim:O2:UBSan', '--expect', 'FnBug')
        with self.assertRaises(CommandError):
            self.call('oracle', str(program), '--pair', 'sim:O0:UBSan')

    def test_campaign_report_replay_and_evaluate(self):
        seeds = self.tmp / 'seeds'
        seeds.mkdir()
        (seeds / 'div.c').write_text(DIVIDE_SEED)
        injection = self.tmp / 'miss.txt'
        injection.write_text(MISS_O2.dumps())
        root = self.tmp / 'cmd'
        config = self.tmp / 'cmd.json'
        config.write_text(json.dumps({
            'name': 'cmd', 'output_root': str(root), 'matrix': ['sim:O0:UBSan', 'sim:O2:UBSan'],
            'seed_source': str(seeds), 'kinds': ['DivideByZero'], 'injection': str(injection),
        }))
        out = self.call('campaign', '--config', str(config))
        self.assertIn('findings', out)
        campaign = Campaign.objects.get(name='cmd')
        self.assertEqual(campaign.status, 'finished')
        self.assertGreater(campaign.findings.count(), 0)

        data = json.loads(self.call('report', str(root), '--json'))
        self.assertTrue(data['balanced'])
        finding_id = data['finding_ids'][0]
        self.assertIn(finding_id, self.call('report', str(root)))

        self.assertIn('FnBug', self.call('replay', finding_id, '--campaign', str(root)))
        out = self.call('evaluate', str(root))
        self.assertIn('precision 1.000  recall 1.000', out)

    def test_invalid_campaign_config(self):
        config = self.tmp / 'bad.json'
        config.write_text(json.dumps({'output_root': str(self.tmp / 'bad'), 'matrix': ['sim:O0:UBSan']}))
        with self.assertRaises(CommandError):
            self.call('campaign', '--config', str(config))


class HealthTests(TestCase):
    def test_endpoints(self):
        self.assertEqual(self.client.get('/health/live/').json(), {'status': 'alive'})
        self.assertEqual(self.client.get('/health/').json()['service'], 'ubfuzz')
        response = self.client.get('/health/ready/')
        self.assertEqual(response.status_code, 200)
        self.assertEqual(response.json()['checks']['database'], 'ok')
