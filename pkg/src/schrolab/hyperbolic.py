""" Radial spectral calculus on H^3 and local smoothing functionals

Radial functions on H^3 expand in the spherical functions

    phi_lam(r) = sin(lam r) / (lam sinh r)

with forward transform  f^(lam) = int f(r) phi_lam(r) 4pi sinh^2 r dr  and
inverse  f(r) = int f^(lam) phi_lam(r) lam^2 / (2 pi^2) dlam. On radial
functions -Delta acts as multiplication by 1 + lam^2.

Both variables are discretized with composite Gauss-Legendre panels. A
panel of width w resolves oscillations e^{i k x} as long as k w <= order.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import signal

from . import config
from .exceptions import ConfigurationError, DomainError
from .util import dumpcsv

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PanelGrid:
    """ Composite Gauss-Legendre nodes on [a, b] with plain dx weights """
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray
    step: float
    order: int

    def __len__(self):
        return len(self.nodes)

    def resolves(self, frequency):
        return frequency * self.step <= self.order * (1 + 1e-12)


def panel_grid(a, b, max_step, order=None):
    order = order or config.settings().hyperbolic.panel_order
    if not b > a:
        raise ConfigurationError(f"empty panel range [{a}, {b}]")
    count = max(1, math.ceil((b - a) / max_step - 1e-12))
    step = (b - a) / count
    x, w = leggauss(order)
    left = a + step * np.arange(count)
    nodes = (left[:, None] + step * (x + 1) / 2).ravel()
    weights = np.tile(w * step / 2, count)
    return PanelGrid(float(a), float(b), nodes, weights, step, order)


def radial_grid(lam_max, r_max=None, order=None):
    """ r-grid on [0, r_max] fine enough for frequencies up to lam_max """
    order = order or config.settings().hyperbolic.panel_order
    r_max = r_max or config.settings().hyperbolic.r_max
    return panel_grid(0.0, r_max, order / max(lam_max, 1.0), order)


def spectral_grid(lam_max, r_max=None, order=None):
    """ lam-grid on (0, lam_max] fine enough for radii up to r_max """
    order = order or config.settings().hyperbolic.panel_order
    r_max = r_max or config.settings().hyperbolic.r_max
    return panel_grid(0.0, lam_max, order / r_max, order)


def spherical_function(lam, r):
    """ sin(lam r) / (lam sinh r), with the limits at r = 0 and lam = 0 """
    lam = np.asarray(lam, dtype=float)
    r = np.asarray(r, dtype=float)
    if np.any(lam < 0) or np.any(r < 0):
        raise DomainError("spherical functions need lam >= 0 and r >= 0")
    with np.errstate(over='ignore'):
        sinh = np.sinh(r)
    ratio = np.divide(r, sinh, out=np.ones(np.broadcast(r, sinh).shape),
                      where=r > 0)
    out = np.sinc(lam * r / math.pi) * ratio
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """ Radial function samples with volume weights 4pi sinh^2(r) dr """
    grid: PanelGrid
    values: np.ndarray

    @property
    def r(self):
        return self.grid.nodes

    @property
    def weights(self):
        with np.errstate(over='ignore'):
            return 4 * math.pi * np.sinh(self.r) ** 2 * self.grid.weights

    @classmethod
    def from_function(cls, func, grid):
        return cls(grid, np.asarray(func(grid.nodes), dtype=complex))

    def l2_norm(self):
        return float(np.sqrt(np.dot(self.weights, np.abs(self.values) ** 2)))

    def to_csv(self, target):
        _dump(target, 'r', self.r, self.values, self.weights)


@dataclass(frozen=True, eq=False)
class RadialSpectrum:
    """ Transform samples with Plancherel weights lam^2 / (2 pi^2) dlam

    `density`, when present, evaluates f^ exactly at any lam.
    """
    grid: PanelGrid
    values: np.ndarray
    density: object = None

    @property
    def lam(self):
        return self.grid.nodes

    @property
    def weights(self):
        return self.lam ** 2 / (2 * math.pi ** 2) * self.grid.weights

    def at(self, lam):
        if self.density is None:
            raise ConfigurationError("spectrum has no closed form; pass the "
                                     "radial profile instead")
        return np.asarray(self.density(np.asarray(lam, dtype=float)),
                          dtype=complex)

    def with_values(self, values, density=None):
        return type(self)(self.grid, values, density)

    def l2_norm(self):
        return sobolev_norm_h3(self, 0)

    def to_csv(self, target):
        _dump(target, 'lam', self.lam, self.values, self.weights)


def _dump(target, name, coords, values, weights):
    rows = ({name: float(c), 're': float(v.real), 'im': float(v.imag),
             'weight': float(w)} for c, v, w in zip(coords, values, weights))
    dumpcsv(target, rows, [name, 're', 'im', 'weight'])


def _transform_values(profile, lam):
    if not profile.grid.resolves(float(np.max(lam, initial=0))):
        raise ConfigurationError(
            f"r panels of width {profile.grid.step:g} cannot resolve "
            f"lam = {np.max(lam):g} (order {profile.grid.order})")
    kernel = spherical_function(lam[:, None], profile.r[None, :])
    return kernel @ (profile.weights * profile.values)


def helgason_forward(profile, lgrid):
    """ f^(lam) = int f(r) phi_lam(r) 4pi sinh^2 r dr on the nodes of lgrid """
    return RadialSpectrum(lgrid, _transform_values(profile, lgrid.nodes))


def helgason_inverse(spectrum, rgrid):
    """ f(r) = int f^(lam) phi_lam(r) lam^2/(2pi^2) dlam on the nodes of rgrid """
    if not spectrum.grid.resolves(rgrid.b):
        raise ConfigurationError(
            f"lam panels of width {spectrum.grid.step:g} cannot resolve "
            f"r = {rgrid.b:g} (order {spectrum.grid.order})")
    kernel = spherical_function(spectrum.lam[None, :], rgrid.nodes[:, None])
    return RadialProfile(rgrid, kernel @ (spectrum.weights * spectrum.values))


def propagate_radial(spectrum, t):
    """ Multiply f^(lam) by e^{it(1 + lam^2)} """
    if not math.isfinite(t):
        raise DomainError(f"non-finite time {t}")

    def phase(lam):
        return np.exp(1j * t * (1 + lam ** 2))

    def density(lam):
        return spectrum.density(lam) * phase(lam)

    if spectrum.density is None:
        density = None
    return spectrum.with_values(spectrum.values * phase(spectrum.lam), density)


def sobolev_norm_h3(spectrum, s):
    """ (int (2 + lam^2)^s |f^|^2 lam^2/(2pi^2) dlam)^(1/2) """
    weights = spectrum.weights * (2 + spectrum.lam ** 2) ** s
    return float(np.sqrt(np.dot(weights, np.abs(spectrum.values) ** 2)))


def _bump(u):
    out = np.zeros_like(u, dtype=float)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1 / (1 - u[inside] ** 2))
    return out


def bump_spectrum(lam0, width=None, order=None):
    """ Smooth compactly supported f^ = exp(-1/(1-u^2)), u = (lam-lam0)/width

    The default width is lam0/4. Samples live on panels covering the
    support; `density` evaluates the bump anywhere.
    """
    width = lam0 / 4 if width is None else width
    if not (lam0 > 0 and width > 0):
        raise DomainError(f"need lam0 > 0 and width > 0, got {lam0}, {width}")
    order = order or config.settings().hyperbolic.panel_order
    low = max(lam0 - width, 0.0)
    high = lam0 + width
    r_max = config.settings().hyperbolic.r_max
    grid = panel_grid(low, high, min(order / r_max, (high - low) / 8), order)

    def density(lam):
        return _bump((np.asarray(lam, dtype=float) - lam0) / width)

    return RadialSpectrum(grid, density(grid.nodes).astype(complex), density)


def time_kernel(delta):
    """ int_0^1 e^{it delta} dt """
    delta = np.asarray(delta, dtype=float)
    return np.exp(0.5j * delta) * np.sinc(delta / (2 * math.pi))


@dataclass(frozen=True)
class SmoothingTerms:
    numerator: float
    denominator: float

    @property
    def ratio(self):
        return self.numerator / self.denominator


_SMOOTHING_S = {-0.5: 'l2', 1.5: 'laplacian'}


def smoothing_terms(f, R, s, denominator='sobolev', lam_max=None):
    """ Both sides of the local smoothing bound on [0, 1] x B_R

    s = -1/2: ||u||; s = 3/2: ||Delta u||, each against ||f||_{H^s} (or
    ||f||_{L^2} with denominator='l2'). `f` is a RadialProfile (then
    `lam_max` bounds its spectrum) or a RadialSpectrum with a density.

    Time is integrated exactly: writing sigma = lam^2, u(t, r) is
    int e^{it sigma} g_r(sigma) dsigma and int_0^1 |u|^2 dt is the
    quadratic form of g_r against time_kernel(sigma - sigma'). On a uniform
    sigma grid that form is a Toeplitz product, applied by FFT.
    """
    try:
        kind = _SMOOTHING_S[s]
    except KeyError:
        raise ConfigurationError(f"smoothing index s must be -1/2 or 3/2, "
                                 f"got {s}")
    if denominator not in ('sobolev', 'l2'):
        raise ConfigurationError(f"unknown denominator '{denominator}'")
    settings = config.settings().hyperbolic
    if not 0 < R <= settings.r_max:
        raise ConfigurationError(f"ball radius must be in (0, "
                                 f"{settings.r_max}], got {R}")

    if isinstance(f, RadialProfile):
        if lam_max is None:
            raise ConfigurationError("smoothing of a profile needs lam_max")
        spectrum = helgason_forward(f, spectral_grid(lam_max))
        low, high = 0.0, lam_max
        values_at = lambda lam: _transform_values(f, lam)
    else:
        spectrum = f
        low, high = f.grid.a, f.grid.b
        values_at = f.at

    # Uniform sigma grid over the spectral support
    span = high ** 2 - low ** 2
    dsigma = min(0.5, span / 512)
    count = math.ceil(span / dsigma) + 1
    sigma = np.linspace(low ** 2, high ** 2, count)
    dsigma = sigma[1] - sigma[0]
    lam = np.sqrt(sigma)
    trap = np.full(count, dsigma)
    trap[0] = trap[-1] = dsigma / 2
    multiplier = (1 + sigma) if kind == 'laplacian' else np.ones(count)
    amplitude = values_at(lam) * multiplier * trap * lam / (4 * math.pi ** 2)

    offsets = dsigma * np.arange(-(count - 1), count)
    kernel = time_kernel(offsets)[None, :]
    rgrid = panel_grid(0.0, R, settings.panel_order / (2 * max(high, 1.0)),
                       settings.panel_order)
    with np.errstate(over='ignore'):
        rweights = 4 * math.pi * np.sinh(rgrid.nodes) ** 2 * rgrid.weights
    total = 0.0
    for start in range(0, len(rgrid), 32):
        r = rgrid.nodes[start:start+32]
        g = spherical_function(lam[None, :], r[:, None]) * amplitude
        # (K g*)_i = sum_j K(sigma_i - sigma_j) conj(g_j)
        conv = signal.fftconvolve(np.conj(g), kernel, mode='valid', axes=1)
        form = np.real(np.sum(g * conv, axis=1))
        total += float(np.dot(rweights[start:start+32], form))
    numerator = math.sqrt(max(total, 0.0))
    den = sobolev_norm_h3(spectrum, 0 if denominator == 'l2' else s)
    log.debug("smoothing s=%s R=%s: %s sigma nodes, %s r nodes", s, R, count,
              len(rgrid))
    return SmoothingTerms(numerator, den)


def smoothing_ratio(f, R, s, denominator='sobolev', lam_max=None):
    """ ||u|| (s=-1/2) or ||Delta u|| (s=3/2) on [0,1] x B_R over ||f||_{H^s} """
    return smoothing_terms(f, R, s, denominator, lam_max).ratio
