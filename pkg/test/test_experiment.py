import contextlib
import io
import math
import os
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory
from textwrap import dedent
from unittest import mock

from schrolab import config, experiment
from schrolab.exceptions import ConfigurationError
from schrolab.experiment import ExperimentConfig, parse_experiments
from schrolab.fields import SingleMode, SobolevEnsemble
from schrolab.report import read_reports
from schrolab.spectra import sphere_eigenvalue

EXAMPLE = dedent("""\
    defaults:
      seed: 3

    circle:
      inequality: strichartz_5_1
      model: circle
      h: [2**-1, 2**-2, 2**-3]
      beta: 1
      trials: 2

    lee:
      inequality: lee_5_8
      omega: [1, 2, 4]
      p: 2
    """)


def parse(text):
    return parse_experiments(dedent(text))


def quiet_run(configs, **kwargs):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        status = experiment.run(configs, **kwargs)
    return status, out.getvalue()


class TestParse(unittest.TestCase):
    def test_sections_and_defaults(self):
        circle, lee = parse_experiments(EXAMPLE)
        self.assertEqual(circle.name, 'circle')
        self.assertEqual(circle.h, (0.5, 0.25, 0.125))
        self.assertEqual((circle.seed, lee.seed), (3, 3))
        self.assertEqual(circle.trials, 2)
        self.assertEqual(lee.omega, (1.0, 2.0, 4.0))
        self.assertEqual(circle.steps, 3)

    def test_expressions(self):
        cfg, = parse("""\
            s:
              inequality: maximal_5_2
              alpha: 3/4
              h: 2**-2
            """)
        self.assertEqual(cfg.alpha, 0.75)
        self.assertEqual(cfg.h, (0.25,))

    def test_empty(self):
        self.assertEqual(parse_experiments(""), [])

    def test_unknown_key_has_line(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse("""\
                defaults:
                  seed: 1

                circle:
                  inequality: strichartz_5_1
                  model: circle
                  bogus: 3
                """)
        self.assertEqual(ctx.exception.line, 7)
        self.assertEqual(ctx.exception.source, '<string>: circle.bogus')
        self.assertIn('line 7', str(ctx.exception))

    def test_missing_inequality_points_at_section(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse("""\
                first:
                  inequality: lee_5_8
                second:
                  model: circle
                """)
        self.assertEqual(ctx.exception.line, 3)

    def test_malformed_yaml(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse("""\
                a:
                  inequality: [lee_5_8
                """)
        self.assertIsNotNone(ctx.exception.line)

    def test_invalid_values(self):
        cases = {
            'unknown inequality': "inequality: strichartz_9_9",
            'wrong model': "inequality: torus_6_2\n  model: sphere2",
            'unknown model': "inequality: strichartz_5_1\n  model: klein",
            'non-dyadic h': "inequality: strichartz_5_1\n  h: [0.3]",
            'increasing h': "inequality: strichartz_5_1\n  h: [0.25, 0.5]",
            'small p': "inequality: strichartz_5_1\n  p: 1.5",
            'zero trials': "inequality: strichartz_5_1\n  trials: 0",
            'fractional trials':
                "inequality: strichartz_5_1\n  trials: 2.5",
            'bad expression': "inequality: strichartz_5_1\n  p: 2**",
            'late time': "inequality: sweep\n  times: [2, 1]",
            'lam0 order': "inequality: smoothing_3_1\n  lam0: [16, 8]",
            'denominator': "inequality: smoothing_3_1\n  denominator: h1",
            'family name': "inequality: strichartz_5_1\n  family: nope",
            'family params':
                "inequality: strichartz_5_1\n  family: {name: sobolev, x: 1}",
            'nameless family':
                "inequality: strichartz_5_1\n  family: {alpha: 1}",
        }
        for what, body in cases.items():
            with self.subTest(what):
                self.assertRaises(ConfigurationError, parse_experiments,
                                  f"s:\n  {body}\n")

    def test_load_file(self):
        with TemporaryDirectory() as tmp:
            path = Path(tmp, 'mine.yaml')
            path.write_text(EXAMPLE)
            configs = experiment.load_experiments(path)
        self.assertEqual([c.name for c in configs], ['circle', 'lee'])
        self.assertEqual(configs[0].source, str(path))


class TestConfigValues(unittest.TestCase):
    def test_families(self):
        cfg, = parse("""\
            s:
              inequality: strichartz_5_1
              seed: 7
              trials: 3
            """)
        family = cfg.data_family({'name': 'sobolev', 'trials': 4})
        self.assertEqual(family, SobolevEnsemble(alpha=0, seed=7, trials=3))

        cfg, = parse("""\
            s:
              inequality: strichartz_5_1
              family: {name: single_mode, id: 2**2}
            """)
        self.assertEqual(cfg.data_family({}), SingleMode(id=4))

    def test_defaults(self):
        cfg = ExperimentConfig('x', 'maximal_5_2')
        self.assertEqual(str(cfg.manifold()), 'torus2')
        self.assertEqual(cfg.scales(), (0.5, 0.25, 0.125))
        self.assertEqual(cfg.tolerance,
                         config.settings().probe.slope_tolerance)
        self.assertEqual(cfg.stem, 'x')
        self.assertFalse(cfg.is_slow)

    def test_slow(self):
        self.assertTrue(ExperimentConfig('x', 'torus_6_3').is_slow)
        self.assertTrue(ExperimentConfig('x', 'sphere_sharp_1_8',
                                         model='sphere3').is_slow)
        self.assertFalse(ExperimentConfig('x', 'torus_6_3',
                                          slow=False).is_slow)

    def test_three_dimensional_models_are_slow(self):
        for inequality in ['torus_6_1', 'maximal_5_2', 'strichartz_5_1']:
            with self.subTest(inequality):
                self.assertTrue(ExperimentConfig(
                    'x', inequality, model='torus3').is_slow)
                self.assertFalse(ExperimentConfig(
                    'x', inequality, model='torus2').is_slow)
        self.assertTrue(ExperimentConfig('x', 'low_freq',
                                         model='sphere3').is_slow)
        self.assertFalse(ExperimentConfig('x', 'smoothing_3_1').is_slow)

    def test_commands(self):
        commands = experiment.commands()
        self.assertEqual(set(commands), {'strichartz', 'maximal',
                                         'smoothing', 'sweep'})
        self.assertIn('strichartz_5_1', commands['strichartz'])
        self.assertIn('lee_5_8', commands['maximal'])
        self.assertEqual(sorted(commands['smoothing']),
                         ['smoothing_3_1', 'smoothing_3_2'])
        total = sum(len(v) for v in commands.values())
        self.assertEqual(total, len(experiment.RECIPES))


class TestPresets(unittest.TestCase):
    def tearDown(self):
        config.load.cache_clear()

    def test_presets_parse(self):
        with TemporaryDirectory() as tmp:
            with mock.patch.dict(os.environ, {config.CFG_EVAR: tmp}):
                presets = experiment.preset_experiments()
        names = {c.name for c in presets}
        self.assertIn('strichartz_circle', names)
        self.assertIn('sweep_circle', names)
        self.assertEqual({c.inequality for c in presets},
                         set(experiment.RECIPES))

    def test_full_scale_presets_are_slow(self):
        with TemporaryDirectory() as tmp:
            with mock.patch.dict(os.environ, {config.CFG_EVAR: tmp}):
                presets = {c.name: c for c in
                           experiment.preset_experiments()}
        for name in ['torus2_l4', 'maximal_torus2', 'maximal_sphere2']:
            with self.subTest(name):
                full = presets[name + '_full']
                self.assertTrue(full.is_slow)
                self.assertFalse(presets[name].is_slow)
                self.assertEqual(full.h, tuple(2.0 ** -k
                                               for k in range(2, 7)))
                self.assertEqual(full.trials, 50)
        cascade = presets['sphere_cascade_full']
        self.assertTrue(cascade.is_slow)
        self.assertEqual(cascade.trials, 100)
        self.assertLessEqual(math.sqrt(sphere_eigenvalue(64, 2)),
                             cascade.cutoff)
        self.assertLess(cascade.cutoff, math.sqrt(sphere_eigenvalue(65, 2)))

    def test_user_sections_replace(self):
        with TemporaryDirectory() as tmp:
            Path(tmp, 'experiments.yaml').write_text(
                "lee:\n  inequality: lee_5_8\n  omega: [1, 2, 3]\n")
            with mock.patch.dict(os.environ, {config.CFG_EVAR: tmp}):
                presets = {c.name: c for c in
                           experiment.preset_experiments()}
        self.assertEqual(presets['lee'].omega, (1.0, 2.0, 3.0))
        self.assertIn('strichartz_circle', presets)


class TestRun(unittest.TestCase):
    def test_writes_reports(self):
        configs = parse_experiments(EXAMPLE)
        with TemporaryDirectory() as tmp:
            status, out = quiet_run(configs, out_dir=tmp, plot=True)
            self.assertEqual(status, 0)
            _, rows = read_reports(Path(tmp, 'circle.csv'))
            self.assertEqual(len(rows), 3)
            self.assertEqual({r['pass'] for r in rows}, {'pass'})
            self.assertEqual([r['h'] for r in rows],
                             ['0.5', '0.25', '0.125'])
            self.assertTrue(Path(tmp, 'lee.svg').is_file())
        self.assertIn('strichartz_5_1 circle', out)
        self.assertEqual(len(out.splitlines()), 2)

    def test_same_seed_same_bytes(self):
        configs = parse_experiments(EXAMPLE)[:1]
        with TemporaryDirectory() as a, TemporaryDirectory() as b:
            quiet_run(configs, out_dir=a, seed=5)
            quiet_run(configs, out_dir=b, seed=5)
            self.assertEqual(Path(a, 'circle.csv').read_bytes(),
                             Path(b, 'circle.csv').read_bytes())

    def test_divergent_constant_is_an_error(self):
        cfg, = parse("""\
            cascade:
              inequality: sphere_sec4
              alpha: 0.5
            """)
        status, out = quiet_run([cfg])
        self.assertEqual(status, 1)
        self.assertIn('cascade: error:', out)

    def test_slow_experiments_are_skipped(self):
        cfg = ExperimentConfig('big', 'torus_6_3')
        with TemporaryDirectory() as tmp:
            with self.assertLogs('schrolab.experiment', 'WARNING'):
                status, out = quiet_run([cfg], out_dir=tmp)
            self.assertEqual(os.listdir(tmp), [])
        self.assertEqual((status, out), (0, ''))

    def test_sweep_extras(self):
        cfg, = parse("""\
            sweep:
              inequality: sweep
              alphas: [0.5]
              times: [2**-1, 2**-2, 2**-3]
              cutoff: 4
              out: conv
            """)
        with TemporaryDirectory() as tmp:
            status, _ = quiet_run([cfg], out_dir=tmp)
            self.assertEqual(status, 0)
            self.assertEqual(sorted(os.listdir(tmp)),
                             ['conv.csv', 'conv_table.csv'])
