import unittest

import numpy as np

from schrolab import lp
from schrolab.exceptions import ConfigurationError
from schrolab.fields import random_field
from schrolab.lp import LPBlockSet


class TestCutoffs(unittest.TestCase):
    def test_eta_values(self):
        self.assertEqual(lp.eta(0), 1.0)
        self.assertEqual(lp.eta(1), 1.0)
        self.assertEqual(lp.eta(4), 0.0)
        self.assertEqual(lp.eta(100), 0.0)
        self.assertAlmostEqual(lp.eta(2.5), 0.5)

    def test_eta_monotone(self):
        s = np.linspace(0, 5, 2001)
        values = lp.eta(s)
        self.assertTrue(np.all(np.diff(values) <= 1e-15))
        self.assertTrue(np.all((values >= 0) & (values <= 1)))

    def test_block_support(self):
        blocks = LPBlockSet(5)
        s = np.linspace(0, 4 ** 6, 20001)
        for k in blocks:
            with self.subTest(k=k):
                lo, hi = blocks.support(k)
                outside = (s <= lo) | (s >= hi)
                if k == 0:
                    outside = s >= hi
                self.assertTrue(np.all(blocks.multiplier(k, s[outside]) == 0))


class TestPartition(unittest.TestCase):
    def test_partition_of_unity(self):
        s = np.linspace(0, 4 ** 8, 10 ** 4)
        total = LPBlockSet(8).partition(s)
        np.testing.assert_allclose(total, 1.0, rtol=0, atol=1e-12)

    def test_covering(self):
        self.assertEqual(len(LPBlockSet.covering(1)), 1)
        self.assertEqual(LPBlockSet.covering(400).K, 5)
        self.assertEqual(LPBlockSet.covering(1024).K, 5)
        self.assertRaises(ConfigurationError, LPBlockSet, -1)

    def test_blocks_reconstruct(self):
        for name, cutoff in [('circle', 20), ('torus2', 6), ('sphere2', 8)]:
            with self.subTest(model=name):
                f = random_field(name, 0.0, cutoff, seed=5)
                total = sum(b.coeffs for b in lp.decompose(f))
                np.testing.assert_allclose(total, f.coeffs, atol=1e-12)

    def test_overlap_energy(self):
        for seed in range(5):
            f = random_field('circle', 0.0, 40, seed=seed)
            energy = lp.overlap_energy(f)
            self.assertGreaterEqual(energy, 0.5)
            self.assertLessEqual(energy, 1.0 + 1e-12)


class TestScales(unittest.TestCase):
    def test_dyadic_index(self):
        self.assertEqual(lp.dyadic_index(0.5), 1)
        self.assertEqual(lp.dyadic_index(2 ** -6), 6)

    def test_bad_scales(self):
        for h in [0.3, 1.0, 2.0, 0.0, -0.25]:
            with self.subTest(h=h):
                self.assertRaises(ConfigurationError, lp.dyadic_index, h)

    def test_block_for_h(self):
        f = random_field('circle', 0.0, 20, seed=1)
        block = lp.block_for_h(f, 2 ** -3)
        np.testing.assert_array_equal(block.coeffs,
                                      lp.apply_block(f, 3).coeffs)
        lams = np.sqrt(f.eigenvalues[np.abs(block.coeffs) > 0])
        self.assertTrue(np.all((lams > 4) & (lams < 16)))

    def test_negative_block(self):
        f = random_field('circle', 0.0, 4, seed=0)
        self.assertRaises(ConfigurationError, lp.apply_block, f, -1)
