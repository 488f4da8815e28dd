import math
import unittest

import numpy as np
from scipy import integrate

from schrolab import hyperbolic
from schrolab.exceptions import ConfigurationError, DomainError
from schrolab.hyperbolic import (RadialProfile, bump_spectrum, panel_grid,
                                 smoothing_ratio, smoothing_terms,
                                 spherical_function)
from schrolab.probe import ScalingSeries, Threshold, fit_exponent


def gaussian_profile(lam_max=20.0):
    grid = hyperbolic.radial_grid(lam_max)
    return RadialProfile.from_function(lambda r: np.exp(-r ** 2), grid)


class TestSphericalFunction(unittest.TestCase):
    def test_limits(self):
        self.assertEqual(spherical_function(0.0, 0.0), 1.0)
        self.assertEqual(spherical_function(3.0, 0.0), 1.0)
        self.assertAlmostEqual(spherical_function(0.0, 2.0),
                               2 / math.sinh(2))
        self.assertAlmostEqual(spherical_function(1.5, 2.0),
                               math.sin(3) / (1.5 * math.sinh(2)))

    def test_large_radius_is_finite(self):
        values = spherical_function(np.array([1.0, 2.0]), 1000.0)
        self.assertTrue(np.all(np.isfinite(values)))

    def test_negative(self):
        self.assertRaises(DomainError, spherical_function, -1.0, 1.0)
        self.assertRaises(DomainError, spherical_function, 1.0, -1.0)


class TestPanels(unittest.TestCase):
    def test_integrates_polynomials(self):
        grid = panel_grid(0.0, 3.0, 1.0, order=4)
        self.assertEqual(len(grid), 12)
        self.assertAlmostEqual(np.dot(grid.weights, grid.nodes ** 5),
                               3 ** 6 / 6)

    def test_resolves(self):
        grid = panel_grid(0.0, 12.0, 0.5, order=16)
        self.assertTrue(grid.resolves(32))
        self.assertFalse(grid.resolves(33))

    def test_empty(self):
        self.assertRaises(ConfigurationError, panel_grid, 1.0, 1.0, 0.1)


class TestTransforms(unittest.TestCase):
    def test_plancherel(self):
        profile = gaussian_profile()
        spectrum = hyperbolic.helgason_forward(
            profile, hyperbolic.spectral_grid(20.0))
        self.assertAlmostEqual(spectrum.l2_norm() / profile.l2_norm(), 1.0,
                               places=8)

    def test_round_trip(self):
        profile = gaussian_profile()
        spectrum = hyperbolic.helgason_forward(
            profile, hyperbolic.spectral_grid(20.0))
        back = hyperbolic.helgason_inverse(spectrum, profile.grid)
        np.testing.assert_allclose(back.values, profile.values, atol=1e-8)

    def test_under_resolved(self):
        profile = gaussian_profile(lam_max=4.0)
        self.assertRaises(ConfigurationError, hyperbolic.helgason_forward,
                          profile, hyperbolic.spectral_grid(40.0))

    def test_propagation_is_unitary(self):
        spectrum = bump_spectrum(6.0)
        moved = hyperbolic.propagate_radial(spectrum, 0.7)
        self.assertAlmostEqual(moved.l2_norm(), spectrum.l2_norm())
        lam = np.array([5.0, 6.5])
        np.testing.assert_allclose(
            moved.at(lam),
            spectrum.at(lam) * np.exp(0.7j * (1 + lam ** 2)))
        self.assertRaises(DomainError, hyperbolic.propagate_radial,
                          spectrum, math.nan)

    def test_sobolev_weights(self):
        spectrum = bump_spectrum(6.0)
        self.assertEqual(hyperbolic.sobolev_norm_h3(spectrum, 0),
                         spectrum.l2_norm())
        self.assertLess(hyperbolic.sobolev_norm_h3(spectrum, -0.5),
                        spectrum.l2_norm())


class TestBump(unittest.TestCase):
    def test_support(self):
        spectrum = bump_spectrum(8.0)
        self.assertEqual((spectrum.grid.a, spectrum.grid.b), (6.0, 10.0))
        self.assertAlmostEqual(float(spectrum.at(8.0).real), math.exp(-1))
        self.assertEqual(float(spectrum.at(10.5).real), 0.0)

    def test_bad_parameters(self):
        self.assertRaises(DomainError, bump_spectrum, 0.0)
        self.assertRaises(DomainError, bump_spectrum, 4.0, -1.0)

    def test_time_kernel(self):
        self.assertAlmostEqual(complex(hyperbolic.time_kernel(0.0)), 1)
        self.assertAlmostEqual(abs(hyperbolic.time_kernel(2 * math.pi)), 0)


class TestSmoothing(unittest.TestCase):
    def test_matches_sampled_time(self):
        spectrum = bump_spectrum(2.0, 0.5)
        terms = smoothing_terms(spectrum, 1.0, -0.5)
        rgrid = panel_grid(0.0, 1.0, 0.25)
        kernel = spherical_function(spectrum.lam[None, :],
                                    rgrid.nodes[:, None])
        times = np.linspace(0.0, 1.0, 4001)
        phases = np.exp(1j * np.outer(times, spectrum.lam ** 2))
        u = (phases * (spectrum.weights * spectrum.values)) @ kernel.T
        rweights = 4 * math.pi * np.sinh(rgrid.nodes) ** 2 * rgrid.weights
        brute = math.sqrt(integrate.trapezoid(np.abs(u) ** 2 @ rweights,
                                              times))
        self.assertAlmostEqual(terms.numerator / brute, 1.0, places=4)

    def test_denominators(self):
        spectrum = bump_spectrum(8.0)
        sobolev = smoothing_ratio(spectrum, 1.0, -0.5)
        l2 = smoothing_ratio(spectrum, 1.0, -0.5, denominator='l2')
        self.assertGreater(sobolev, l2)
        self.assertGreater(l2, 0)

    def test_laplacian_numerator(self):
        spectrum = bump_spectrum(8.0)
        plain = smoothing_terms(spectrum, 1.0, -0.5)
        lap = smoothing_terms(spectrum, 1.0, 1.5)
        self.assertGreater(lap.numerator, plain.numerator)
        self.assertAlmostEqual(
            lap.denominator, hyperbolic.sobolev_norm_h3(spectrum, 1.5))

    def smoothing_series(self, denominator):
        series = ScalingSeries('smoothing_3_1', 'h3', 2.0)
        for lam0 in [8.0, 16.0, 32.0]:
            ratio = smoothing_ratio(bump_spectrum(lam0), 1.0, -0.5,
                                    denominator)
            series = series.append(1 / lam0, ratio)
        return series

    def test_half_derivative_gain_is_bounded(self):
        series = self.smoothing_series('sobolev')
        self.assertTrue(Threshold('median', 2.0).judge(series))

    def test_l2_ratio_decays_like_root_frequency(self):
        # slope in h = 1/lam0
        fit = fit_exponent(self.smoothing_series('l2'))
        self.assertAlmostEqual(fit.slope, 0.5, delta=0.1)

    def test_profile_input(self):
        profile = gaussian_profile(12.0)
        ratio = smoothing_ratio(profile, 1.0, -0.5, lam_max=12.0)
        self.assertTrue(math.isfinite(ratio))
        self.assertGreater(ratio, 0)
        self.assertRaises(ConfigurationError, smoothing_ratio, profile,
                          1.0, -0.5)

    def test_errors(self):
        spectrum = bump_spectrum(4.0)
        self.assertRaises(ConfigurationError, smoothing_ratio, spectrum,
                          1.0, 0.0)
        self.assertRaises(ConfigurationError, smoothing_ratio, spectrum,
                          0.0, -0.5)
        self.assertRaises(ConfigurationError, smoothing_ratio, spectrum,
                          1.0, -0.5, 'h1')
