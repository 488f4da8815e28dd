import io
import math
import unittest

import numpy as np

from schrolab import fields
from schrolab.exceptions import ConfigurationError, DomainError
from schrolab.fields import (DataFamily, HighestWeightBeam, LevelBeam,
                             SobolevEnsemble, SpectralField, WavePacket)
from schrolab.spectra import enumerate_modes, grid_for


class TestSpectralField(unittest.TestCase):
    def setUp(self):
        self.table = enumerate_modes('sphere2', 3)

    def test_length_mismatch(self):
        self.assertRaises(DomainError, SpectralField, self.table, [1, 2])

    def test_non_finite(self):
        coeffs = np.zeros(len(self.table))
        coeffs[2] = math.inf
        self.assertRaises(DomainError, SpectralField, self.table, coeffs)

    def test_coefficients_are_frozen(self):
        f = SpectralField.single(self.table, 1)
        with self.assertRaises(ValueError):
            f.coeffs[0] = 1

    def test_arithmetic(self):
        a = SpectralField.single(self.table, 1)
        b = SpectralField.single(self.table, 2, 2j)
        self.assertAlmostEqual((a + b).l2_norm(), math.sqrt(5))
        self.assertAlmostEqual((a - b).l2_norm(), math.sqrt(5))
        self.assertAlmostEqual((3 * a).l2_norm(), 3)
        self.assertEqual((-a).coeffs[1], -1)

    def test_mixed_tables(self):
        other = enumerate_modes('sphere2', 2)
        self.assertRaises(ValueError, SpectralField.zeros(self.table).__add__,
                          SpectralField.zeros(other))

    def test_sobolev_norm(self):
        # degree 2 has eigenvalue 6
        f = SpectralField.single(self.table, self.table.index((2, 0)))
        self.assertAlmostEqual(fields.sobolev_norm(f, 1), math.sqrt(7))
        self.assertAlmostEqual(fields.sobolev_norm(f, 0), 1)

    def test_parseval(self):
        for name, cutoff in [('circle', 5), ('torus2', 3), ('sphere2', 4),
                             ('sphere3', 5)]:
            with self.subTest(model=name):
                f = fields.random_field(name, 0.0, cutoff, seed=4)
                grid = grid_for(f.table)
                self.assertAlmostEqual(fields.lebesgue_norm(f, 2, grid),
                                       f.l2_norm(), places=12)

    def test_synthesize_matches_values(self):
        f = fields.random_field('torus2', 0.5, 3, seed=1)
        point = np.array([0.3, 1.7])
        self.assertAlmostEqual(fields.synthesize(f, point),
                               f.values(point)[0], places=12)

    def test_csv_round_trip(self):
        f = fields.random_field('circle', 0.5, 4, seed=2)
        out = io.StringIO()
        f.to_csv(out, family='sobolev')
        out.seek(0)
        back = SpectralField.from_csv(out)
        self.assertEqual(len(back), len(f))
        np.testing.assert_array_equal(back.coeffs, f.coeffs)

    def test_csv_without_metadata(self):
        source = io.StringIO("mode_id,re,im\n0,1.0,0.0\n")
        self.assertRaises(ConfigurationError, SpectralField.from_csv, source)


class TestRandomField(unittest.TestCase):
    def test_unit_sobolev_norm(self):
        for alpha in [0.0, 0.6, 1.5]:
            with self.subTest(alpha=alpha):
                f = fields.random_field('sphere2', alpha, 4, seed=0)
                self.assertAlmostEqual(fields.sobolev_norm(f, alpha), 1)

    def test_deterministic(self):
        a = fields.random_field('circle', 0.5, 8, seed=3, trial=1)
        b = fields.random_field('circle', 0.5, 8, seed=3, trial=1)
        c = fields.random_field('circle', 0.5, 8, seed=3, trial=2)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        self.assertFalse(np.allclose(a.coeffs, c.coeffs))

    def test_bad_cutoff(self):
        self.assertRaises(DomainError, fields.random_field, 'circle', 0, 0, 0)


class TestDataFamilies(unittest.TestCase):
    def test_make(self):
        family = DataFamily.make('sobolev', alpha=0.5, trials=3)
        self.assertIsInstance(family, SobolevEnsemble)
        self.assertEqual(family.trials, 3)

    def test_make_errors(self):
        self.assertRaises(ConfigurationError, DataFamily.make, 'noise')
        self.assertRaises(ConfigurationError, DataFamily.make, 'sobolev',
                          gamma=2)

    def test_members(self):
        table = enumerate_modes('circle', 6)
        family = SobolevEnsemble(alpha=0.5, seed=9, trials=4)
        members = list(family.members(table))
        self.assertEqual(len(members), 4)
        for f in members:
            self.assertAlmostEqual(fields.sobolev_norm(f, 0.5), 1)
        np.testing.assert_array_equal(members[2].coeffs,
                                      family.member(table, 2).coeffs)

    def test_with_alpha(self):
        family = SobolevEnsemble(alpha=0.2, seed=1)
        self.assertEqual(family.with_alpha(0.6),
                         SobolevEnsemble(alpha=0.6, seed=1))
        beam = LevelBeam(k=4)
        self.assertIs(beam.with_alpha(0.6), beam)

    def test_describe(self):
        self.assertEqual(WavePacket(center=4.0).describe(),
                         "wave_packet(center=4.0, width=None, trials=1)")

    def test_level_beam_at_scale(self):
        table = enumerate_modes('circle', 8)
        beam = LevelBeam().at_scale(1 / 4, table)
        self.assertEqual(beam.k, 16)
        f = beam.member(table)
        hits = np.flatnonzero(f.coeffs)
        self.assertEqual([table[i].qn for i in hits], [(-4,), (4,)])
        np.testing.assert_allclose(np.abs(f.coeffs[hits]), 1 / math.sqrt(2))

    def test_level_beam_missing_level(self):
        table = enumerate_modes('circle', 3)
        self.assertRaises(ConfigurationError, LevelBeam(k=3).member, table)
        self.assertRaises(ConfigurationError, LevelBeam().member, table)

    def test_nearest_level(self):
        table = enumerate_modes('sphere2', 6)
        # sqrt(k(k+1)) is nearest 3.1 at k=3
        self.assertEqual(fields.nearest_level(table, 3.1), 3)

    def test_highest_weight_beam(self):
        table = enumerate_modes('sphere2', 6)
        beam = HighestWeightBeam().at_scale(1 / 4, table)
        self.assertEqual(beam.k, 4)
        f = beam.member(table)
        self.assertAlmostEqual(f.coeffs[table.index((4, 4))],
                               1 / math.sqrt(2))
        self.assertAlmostEqual(f.coeffs[table.index((4, -4))],
                               1j / math.sqrt(2))
        self.assertAlmostEqual(f.l2_norm(), 1)

    def test_highest_weight_beam_errors(self):
        circle = enumerate_modes('circle', 4)
        sphere = enumerate_modes('sphere2', 3)
        self.assertRaises(ConfigurationError,
                          HighestWeightBeam(k=1).member, circle)
        self.assertRaises(ConfigurationError,
                          HighestWeightBeam(k=9).member, sphere)

    def test_wave_packet(self):
        table = enumerate_modes('circle', 16)
        packet = WavePacket().at_scale(1 / 8, table)
        self.assertEqual(packet.center, 8)
        f = packet.member(table)
        peak = table[int(np.argmax(np.abs(f.coeffs)))]
        self.assertEqual(abs(peak.qn[0]), 8)
        self.assertAlmostEqual(f.l2_norm(), 1)
        self.assertRaises(ConfigurationError,
                          WavePacket(center=2.0, width=-1.0).member, table)
