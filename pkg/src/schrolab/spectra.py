""" Model manifolds: spectra, eigenfunctions and quadrature

Each model geometry is a ManifoldModel subclass registered under its kind
name. A model knows its closed-form spectrum, how to evaluate its
orthonormal eigenfunctions at chart points, and how to build quadrature
grids that integrate products of admitted eigenfunctions exactly.

Chart coordinates:

    circle, torus2, torus3   angle in [0, 2pi) per axis
    sphere2                  (theta, phi): colatitude, longitude
    sphere3                  geodesic angle psi in [0, pi] from a pole
    h3                       geodesic radius r >= 0 (radial functions only)
"""

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import special

from . import config
from .exceptions import ConfigurationError, DomainError, ResourceLimitError
from .util import dumpcsv, cache

log = logging.getLogger(__name__)

# Eigenvalues are integers for all compact models, so a cutoff computed as
# sqrt(n) must not drop the level it was meant to admit.
_CUTOFF_SLACK = 1e-12


class Kind(enum.Enum):
    circle = 'circle'
    torus2 = 'torus2'
    torus3 = 'torus3'
    sphere2 = 'sphere2'
    sphere3 = 'sphere3'
    h3 = 'h3'

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, string):
        aliases = {'t1': 'circle', 't2': 'torus2', 't3': 'torus3',
                   's2': 'sphere2', 's3': 'sphere3', 'hyperbolic3': 'h3'}
        key = str(string).strip().lower()
        try:
            return cls(aliases.get(key, key))
        except ValueError:
            names = ', '.join(k.value for k in cls)
            raise ConfigurationError(
                f"unknown model '{string}' (expected one of: {names})")


def sphere_eigenvalue(k, n):
    """ Eigenvalue k(k+n-1) of the degree-k spherical harmonics on S^n """
    if k < 0 or n < 2:
        raise DomainError(f"need k >= 0 and n >= 2, got k={k}, n={n}")
    return k * (k + n - 1)


def sphere_multiplicity(k, n):
    """ Dimension of the degree-k harmonic polynomials restricted to S^n

    binom(k+n, n) - binom(k+n-2, n); the second term vanishes below k=2.
    For n=2 this is 2k+1.
    """
    if k < 0 or n < 2:
        raise DomainError(f"need k >= 0 and n >= 2, got k={k}, n={n}")
    return math.comb(k + n, n) - (math.comb(k + n - 2, n) if k >= 2 else 0)


@dataclass(frozen=True)
class Mode:
    """ One eigenfunction: dense id, eigenvalue lambda^2, quantum numbers """
    id: int
    eigenvalue: float
    qn: tuple
    level: int

    @property
    def lam(self):
        return math.sqrt(self.eigenvalue)


@dataclass(frozen=True)
class Level:
    """ A group of modes sharing one eigenvalue (an eigenspace slice) """
    eigenvalue: float
    start: int
    stop: int

    def __len__(self):
        return self.stop - self.start

    @property
    def slice(self):
        return slice(self.start, self.stop)


@dataclass(frozen=True, eq=False)
class ModeTable:
    """ Every mode of a model with lambda <= cutoff, sorted

    Modes are sorted by eigenvalue, ties broken lexicographically on the
    quantum numbers, so ids are reproducible. Tables are immutable and safe
    to share between threads.
    """
    model: 'ManifoldModel'
    modes: tuple
    cutoff: float

    def __len__(self):
        return len(self.modes)

    def __iter__(self):
        return iter(self.modes)

    def __getitem__(self, i):
        return self.modes[i]

    def __repr__(self):
        return (f"ModeTable({self.model}, cutoff={self.cutoff!r}, "
                f"{len(self)} modes)")

    @cached_property
    def eigenvalues(self):
        """ lambda_j^2 for every mode, as a float array """
        return np.array([m.eigenvalue for m in self.modes], dtype=float)

    @cached_property
    def qn(self):
        """ Quantum numbers as an (n_modes, q) int array """
        width = len(self.modes[0].qn) if self.modes else 0
        return np.array([m.qn for m in self.modes],
                        dtype=int).reshape(len(self.modes), width)

    @cached_property
    def max_lambda(self):
        return math.sqrt(self.eigenvalues[-1]) if self.modes else 0.0

    @cached_property
    def levels(self):
        """ Contiguous runs of equal eigenvalue, in table order """
        levels = []
        start = 0
        for value, group in itertools.groupby(self.modes,
                                              key=lambda m: m.eigenvalue):
            count = sum(1 for _ in group)
            levels.append(Level(value, start, start + count))
            start += count
        return tuple(levels)

    @cached_property
    def level_eigenvalues(self):
        return np.array([lv.eigenvalue for lv in self.levels], dtype=float)

    @cached_property
    def level_starts(self):
        return np.array([lv.start for lv in self.levels], dtype=int)

    @cached_property
    def level_sizes(self):
        return {lv.eigenvalue: len(lv) for lv in self.levels}

    @cached_property
    def _index(self):
        return {m.qn: m.id for m in self.modes}

    def index(self, qn):
        """ Look up a mode id by quantum numbers """
        qn = tuple(int(q) for q in (qn if isinstance(qn, (tuple, list))
                                    else (qn,)))
        try:
            return self._index[qn]
        except KeyError:
            raise LookupError(f"no mode {qn} in {self!r}") from None

    def multiplicity(self, mode):
        return self.model.multiplicity(mode, self)

    def rows(self):
        for mode in self.modes:
            yield {'id': mode.id,
                   'eigenvalue': mode.eigenvalue,
                   'quantum_numbers': mode.qn,
                   'level': mode.level,
                   'multiplicity': self.multiplicity(mode)}

    def to_csv(self, target):
        """ Dump the table: id, eigenvalue, quantum numbers, level, mult. """
        comments = [f"model={self.model}", f"cutoff={self.cutoff!r}",
                    f"modes={len(self)}"]
        headers = ['id', 'eigenvalue', 'quantum_numbers', 'level',
                   'multiplicity']
        dumpcsv(target, self.rows(), headers, comments)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """ Weighted points integrating products of admitted eigenfunctions

    `axes` holds the one-dimensional factors of a product grid (points are
    their Cartesian product, first axis slowest); models use it for
    separable synthesis. `order` is the number of eigenfunction factors the
    grid integrates exactly up to `cutoff`.
    """
    model: 'ManifoldModel'
    points: np.ndarray
    weights: np.ndarray
    resolution: int
    axes: tuple = ()
    order: int = 2
    cutoff: float = None
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __len__(self):
        return len(self.weights)

    @property
    def measure(self):
        return float(self.weights.sum())

    def integrate(self, values):
        return np.dot(self.weights, values)

    def admits(self, table, order=2):
        """ Whether products of `order` modes of `table` integrate exactly """
        return self.resolution >= self.model.min_resolution(table.max_lambda,
                                                            order)

    def require(self, table, order=2, what='grid'):
        if not self.admits(table, order):
            need = self.model.min_resolution(table.max_lambda, order)
            raise ConfigurationError(
                f"{what} resolution {self.resolution} is below the minimum "
                f"{need} for cutoff {table.max_lambda:g} ({self.model})")


def _product_points(axes):
    mesh = np.meshgrid(*axes, indexing='ij')
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _check_points(points, chart_dim):
    points = np.asarray(points, dtype=float)
    points = points.reshape(-1, chart_dim)
    if not np.all(np.isfinite(points)):
        raise DomainError("non-finite point coordinates")
    return points


def _chunk_rows(n_cols):
    """ Rows per evaluation chunk; depends only on sizes, never on timing """
    chunk = config.settings().quadrature.chunk
    return max(1, min(chunk, chunk * chunk // max(n_cols, 1)))


class ManifoldModel:
    """ Base class for model geometries

    Subclasses register themselves by kind, so `ManifoldModel.make('sphere2')`
    returns the corresponding model. Models are stateless singletons.
    """
    registry = {}
    kind = None
    dim = None
    chart_dim = None
    measure = math.inf
    compact = True
    qn_names = ()

    def __init_subclass__(cls, kind=None, **kwargs):
        super().__init_subclass__(**kwargs)
        if kind is not None:
            cls.kind = kind
            cls.registry[kind] = cls

    @classmethod
    @cache
    def make(cls, kind):
        if not isinstance(kind, Kind):
            kind = Kind.parse(kind)
        return cls.registry[kind]()

    def __str__(self):
        return str(self.kind)

    def __repr__(self):
        return f"{type(self).__name__}()"

    def __eq__(self, other):
        return isinstance(other, ManifoldModel) and self.kind == other.kind

    def __hash__(self):
        return hash(self.kind)

    # Spectrum

    def spectrum(self, cutoff):
        """ Yield (eigenvalue, qn) for every mode with lambda <= cutoff """
        raise NotImplementedError

    def level(self, qn):
        raise NotImplementedError

    def multiplicity(self, mode, table=None):
        """ Full eigenspace dimension of the mode's eigenvalue """
        if table is None:
            raise ValueError("multiplicity needs the mode table")
        return table.level_sizes[mode.eigenvalue]

    def estimate_count(self, cutoff):
        return 0

    # Eigenfunctions

    def basis(self, qn, points):
        """ Evaluate eigenfunctions: returns (n_points, n_modes) array """
        raise NotImplementedError

    def sup_norm(self, qn):
        """ sup_x |e(x)| for each row of quantum numbers """
        raise NotImplementedError

    def level_amplitudes(self, table, coeffs, points):
        """ Per-level synthesis P_mu f(x): (n_levels, n_points) complex

        `points` is either a QuadratureGrid or an array of chart points.
        """
        if isinstance(points, QuadratureGrid):
            points = points.points
        points = _check_points(points, self.chart_dim)
        coeffs = np.asarray(coeffs, dtype=complex)
        out = np.empty((len(table.levels), len(points)), dtype=complex)
        rows = _chunk_rows(len(table))
        for start in range(0, len(points), rows):
            chunk = points[start:start+rows]
            weighted = self.basis(table.qn, chunk) * coeffs
            out[:, start:start+len(chunk)] = np.add.reduceat(
                weighted, table.level_starts, axis=1).T
        return out

    # Quadrature

    def min_resolution(self, cutoff, order=2):
        raise NotImplementedError

    def quadrature(self, resolution):
        raise NotImplementedError


class Circle(ManifoldModel, kind=Kind.circle):
    """ The circle of length 2pi """
    dim = 1
    chart_dim = 1
    measure = 2 * math.pi
    qn_names = ('m',)

    def spectrum(self, cutoff):
        return _lattice(1, cutoff)

    def level(self, qn):
        return int(sum(q * q for q in qn))

    def estimate_count(self, cutoff):
        return 2 * cutoff + 1

    def basis(self, qn, points):
        points = _check_points(points, self.chart_dim)
        phase = points @ np.asarray(qn, dtype=float).T
        return np.exp(1j * phase) / (2 * math.pi) ** (self.dim / 2)

    def sup_norm(self, qn):
        qn = np.asarray(qn)
        return np.full(len(qn), (2 * math.pi) ** (-self.dim / 2))

    def level_amplitudes(self, table, coeffs, points):
        if not isinstance(points, QuadratureGrid) or not points.axes:
            return super().level_amplitudes(table, coeffs, points)
        return _torus_product_amplitudes(self, table, coeffs, points)

    def min_resolution(self, cutoff, order=2):
        return order * int(math.floor(cutoff + _CUTOFF_SLACK)) + 1

    def quadrature(self, resolution):
        # Trapezoid rule per periodic axis: exact for trigonometric
        # polynomials of degree below `resolution`.
        axis = 2 * math.pi * np.arange(resolution) / resolution
        axes = (axis,) * self.dim
        weight = (2 * math.pi / resolution) ** self.dim
        points = _product_points(axes)
        weights = np.full(len(points), weight)
        return points, weights, axes


class Torus2(Circle, kind=Kind.torus2):
    """ The flat torus with side lengths 2pi """
    dim = 2
    chart_dim = 2
    measure = (2 * math.pi) ** 2
    qn_names = ('m1', 'm2')

    def spectrum(self, cutoff):
        return _lattice(self.dim, cutoff)

    def estimate_count(self, cutoff):
        return math.pi * (cutoff + 1) ** 2


class Torus3(Torus2, kind=Kind.torus3):
    dim = 3
    chart_dim = 3
    measure = (2 * math.pi) ** 3
    qn_names = ('m1', 'm2', 'm3')

    def estimate_count(self, cutoff):
        return 4 / 3 * math.pi * (cutoff + 1) ** 3


def _lattice(dim, cutoff):
    top = int(math.floor(cutoff + _CUTOFF_SLACK))
    axis = np.arange(-top, top + 1)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*(axis,) * dim,
                                                    indexing='ij')], axis=-1)
    norms = (mesh ** 2).sum(axis=1)
    keep = norms <= cutoff ** 2 * (1 + _CUTOFF_SLACK) + _CUTOFF_SLACK
    for vec, norm in zip(mesh[keep], norms[keep]):
        yield float(norm), tuple(int(v) for v in vec)


def _torus_product_amplitudes(model, table, coeffs, grid):
    """ Separable synthesis on a product grid

    Each basis function is a product of per-axis exponentials, so the
    factors are tabulated once per axis and gathered per mode.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    norm = (2 * math.pi) ** (-0.5)
    qn = table.qn
    tops = np.abs(qn).max(axis=0) if len(qn) else np.zeros(model.dim, int)
    factors = [np.exp(1j * np.outer(np.arange(-top, top + 1), axis)) * norm
               for top, axis in zip(tops, grid.axes)]
    letters = 'abc'[:model.dim]
    subscripts = ('j,' + ','.join('j' + a for a in letters)
                  + '->j' + letters)

    npoints = len(grid)
    out = np.zeros((len(table.levels), npoints), dtype=complex)
    rows = _chunk_rows(npoints)
    bounds = list(table.level_starts) + [len(table)]
    level = 0
    # Mode chunks never split a level.
    while level < len(table.levels):
        stop = level + 1
        while (stop < len(table.levels)
               and bounds[stop + 1] - bounds[level] <= rows):
            stop += 1
        sel = slice(bounds[level], bounds[stop])
        gathered = [f[qn[sel, d] + tops[d]] for d, f in enumerate(factors)]
        block = np.einsum(subscripts, coeffs[sel], *gathered)
        starts = np.asarray(bounds[level:stop]) - bounds[level]
        out[level:stop] = np.add.reduceat(
            block.reshape(block.shape[0], -1), starts, axis=0)
        level = stop
    return out


class Sphere2(ManifoldModel, kind=Kind.sphere2):
    """ The unit sphere S^2 with real orthonormal spherical harmonics

    Y_{k,0} = pbar_k^0(cos theta), Y_{k,l} = sqrt2 pbar_k^l cos(l phi) and
    Y_{k,-l} = sqrt2 pbar_k^l sin(l phi) for l > 0, where pbar are the fully
    normalized associated Legendre functions.
    """
    dim = 2
    chart_dim = 2
    measure = 4 * math.pi
    qn_names = ('k', 'l')

    def degree_cap(self):
        return config.settings().limits.sphere_degree

    def max_degree(self, cutoff):
        target = cutoff ** 2 * (1 + _CUTOFF_SLACK) + _CUTOFF_SLACK
        k = int(math.floor(math.sqrt(target)))
        while k >= 0 and sphere_eigenvalue(k, 2) > target:
            k -= 1
        return k

    def spectrum(self, cutoff):
        top = self.max_degree(cutoff)
        if top > self.degree_cap():
            raise ResourceLimitError(
                f"S^2 degree {top} exceeds the cap {self.degree_cap()}")
        for k in range(top + 1):
            for l in range(-k, k + 1):
                yield float(sphere_eigenvalue(k, 2)), (k, l)

    def level(self, qn):
        return int(qn[0])

    def multiplicity(self, mode, table=None):
        return sphere_multiplicity(mode.qn[0], 2)

    def estimate_count(self, cutoff):
        return (cutoff + 1) ** 2

    def sup_norm(self, qn):
        k = np.asarray(qn)[:, 0]
        return np.sqrt((2 * k + 1) / (4 * math.pi))

    def basis(self, qn, points):
        points = _check_points(points, self.chart_dim)
        qn = np.asarray(qn, dtype=int).reshape(-1, 2)
        if not len(qn):
            return np.zeros((len(points), 0))
        top = int(qn[:, 0].max())
        self._check_degree(top)
        x = np.cos(points[:, 0])
        plm = normalized_legendre(top, x)
        k, l = qn[:, 0], qn[:, 1]
        m = np.abs(l)
        values = plm[k, m].T  # (n_points, n_modes)
        phi = points[:, 1][:, None]
        trig = np.where(l > 0, math.sqrt(2) * np.cos(m * phi),
                        np.where(l < 0, math.sqrt(2) * np.sin(m * phi), 1.0))
        return values * trig

    def level_amplitudes(self, table, coeffs, points):
        if not isinstance(points, QuadratureGrid) or not points.axes:
            return super().level_amplitudes(table, coeffs, points)
        grid = points
        coeffs = np.asarray(coeffs, dtype=complex)
        top = int(table.qn[:, 0].max()) if len(table) else 0
        self._check_degree(top)
        theta, phi = grid.axes
        key = ('legendre', top)
        if key not in grid.cache:
            grid.cache[key] = normalized_legendre(top, np.cos(theta))
        plm = grid.cache[key]
        k, l = table.qn[:, 0], table.qn[:, 1]
        m = np.abs(l)
        # Coefficients arranged by (k, m) for the cosine and sine parts
        ccos = np.zeros((top + 1, top + 1), dtype=complex)
        csin = np.zeros((top + 1, top + 1), dtype=complex)
        scale = np.where(l == 0, 1.0, math.sqrt(2))
        pos = l >= 0
        ccos[k[pos], m[pos]] = coeffs[pos] * scale[pos]
        csin[k[~pos], m[~pos]] = coeffs[~pos] * scale[~pos]
        mm = np.arange(top + 1)[:, None]
        cos = np.cos(mm * phi)
        sin = np.sin(mm * phi)
        # degree k: sum_m pbar[k,m,theta] (ccos[k,m] cos + csin[k,m] sin)
        amps = (np.einsum('kmt,km,mp->ktp', plm, ccos, cos, optimize=True)
                + np.einsum('kmt,km,mp->ktp', plm, csin, sin, optimize=True))
        degrees = [int(table[lv.start].qn[0]) for lv in table.levels]
        return amps[degrees].reshape(len(degrees), -1)

    def _check_degree(self, top):
        if top > self.degree_cap():
            raise ResourceLimitError(
                f"S^2 degree {top} exceeds the cap {self.degree_cap()}")

    def min_resolution(self, cutoff, order=2):
        top = self.max_degree(cutoff)
        return (order * top) // 2 + 1

    def quadrature(self, resolution):
        # Gauss-Legendre in cos(theta) times equispaced longitude.
        x, wx = leggauss(resolution)
        order = np.argsort(-x)  # theta increasing
        x, wx = x[order], wx[order]
        nphi = 2 * resolution - 1
        theta = np.arccos(x)
        phi = 2 * math.pi * np.arange(nphi) / nphi
        points = _product_points((theta, phi))
        weights = np.outer(wx, np.full(nphi, 2 * math.pi / nphi)).ravel()
        return points, weights, (theta, phi)


def normalized_legendre(top, x):
    """ Fully normalized associated Legendre functions up to degree `top`

    Returns pbar[k, m, i] for 0 <= m <= k <= top at the points x[i],
    normalized so that 2pi * int pbar_k^m(x)^2 dx = 1. Entries with m > k
    are zero. The recurrence runs in k for each fixed m and only multiplies
    normalized values, so it stays finite at high degree.
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1 - x * x, 0.0, None))
    out = np.zeros((top + 1, top + 1) + x.shape)
    out[0, 0] = 1 / math.sqrt(4 * math.pi)
    for m in range(1, top + 1):
        out[m, m] = math.sqrt((2 * m + 1) / (2 * m)) * s * out[m - 1, m - 1]
    for m in range(0, top):
        out[m + 1, m] = math.sqrt(2 * m + 3) * x * out[m, m]
        for k in range(m + 2, top + 1):
            a = math.sqrt((4 * k * k - 1) / (k * k - m * m))
            b = math.sqrt(((k - 1) ** 2 - m * m) / (4 * (k - 1) ** 2 - 1))
            out[k, m] = a * (x * out[k - 1, m] - b * out[k - 2, m])
    return out


class SphereZonal(ManifoldModel, kind=Kind.sphere3):
    """ Zonal functions on S^3: functions of the geodesic angle to a pole

    e_k(psi) = sin((k+1) psi) / (pi sqrt2 sin psi), one per degree; the
    table reports the full eigenspace dimension (k+1)^2 as multiplicity.
    """
    dim = 3
    chart_dim = 1
    measure = 2 * math.pi ** 2
    qn_names = ('k',)
    sphere_dim = 3

    def max_degree(self, cutoff):
        target = cutoff ** 2 * (1 + _CUTOFF_SLACK) + _CUTOFF_SLACK
        k = int(math.floor(math.sqrt(target)))
        while k >= 0 and sphere_eigenvalue(k, 3) > target:
            k -= 1
        return k

    def spectrum(self, cutoff):
        for k in range(self.max_degree(cutoff) + 1):
            yield float(sphere_eigenvalue(k, 3)), (k,)

    def level(self, qn):
        return int(qn[0])

    def multiplicity(self, mode, table=None):
        return sphere_multiplicity(mode.qn[0], 3)

    def estimate_count(self, cutoff):
        return cutoff + 1

    def basis(self, qn, points):
        points = _check_points(points, self.chart_dim)
        k = np.asarray(qn, dtype=int).reshape(-1)
        x = np.cos(points[:, 0])[:, None]
        return special.eval_chebyu(k[None, :], x) / (math.pi * math.sqrt(2))

    def sup_norm(self, qn):
        k = np.asarray(qn).reshape(-1)
        return (k + 1) / (math.pi * math.sqrt(2))

    def min_resolution(self, cutoff, order=2):
        return (order * self.max_degree(cutoff)) // 2 + 2

    def quadrature(self, resolution):
        # Midpoint rule in psi with the sin^2 volume factor; exact for
        # cos(m psi) with m < 2 * resolution.
        psi = (np.arange(resolution) + 0.5) * math.pi / resolution
        weights = 4 * math.pi * np.sin(psi) ** 2 * math.pi / resolution
        return psi[:, None], weights, (psi,)


class HyperbolicRadial(ManifoldModel, kind=Kind.h3):
    """ Radial functions on H^3 (continuous spectrum; see hyperbolic.py) """
    dim = 3
    chart_dim = 1
    compact = False
    qn_names = ()

    def spectrum(self, cutoff):
        raise DomainError("H^3 has continuous spectrum; use the radial "
                          "transforms in schrolab.hyperbolic")

    def quadrature(self, resolution):
        raise DomainError("H^3 radial grids live in schrolab.hyperbolic")

    def min_resolution(self, cutoff, order=2):
        raise DomainError("H^3 radial grids live in schrolab.hyperbolic")


@cache
def enumerate_modes(model, cutoff):
    """ Build the sorted table of every mode with lambda <= cutoff """
    if isinstance(model, (str, Kind)):
        model = ManifoldModel.make(model)
    if not cutoff >= 0:
        raise DomainError(f"cutoff must be >= 0, got {cutoff}")
    limits = config.settings().limits
    if cutoff > limits.max_cutoff:
        raise ResourceLimitError(
            f"cutoff {cutoff} exceeds the configured cap {limits.max_cutoff}")
    if model.estimate_count(cutoff) > limits.max_modes:
        raise ResourceLimitError(
            f"about {model.estimate_count(cutoff):.0f} modes for {model} at "
            f"cutoff {cutoff}; the cap is {limits.max_modes}")
    entries = sorted(model.spectrum(cutoff), key=lambda e: (e[0], e[1]))
    modes = tuple(Mode(i, value, qn, model.level(qn))
                  for i, (value, qn) in enumerate(entries))
    log.debug("enumerated %s modes for %s up to cutoff %s",
              len(modes), model, cutoff)
    return ModeTable(model, modes, float(cutoff))


def eval_eigenfunction(model, mode, point):
    """ Value of one eigenfunction at one chart point """
    if isinstance(model, (str, Kind)):
        model = ManifoldModel.make(model)
    qn = mode.qn if isinstance(mode, Mode) else tuple(np.atleast_1d(mode))
    value = model.basis([qn], np.atleast_1d(np.asarray(point, dtype=float)))
    return complex(value[0, 0])


@cache
def quadrature_grid(model, resolution, cutoff=None, order=2):
    """ Weighted point set for a model

    `resolution` is points per periodic axis (circle, tori), Gauss-Legendre
    colatitude nodes (S^2; longitude gets 2N-1 points) or midpoints in the
    geodesic angle (zonal S^3). If `cutoff` is given, the resolution must
    integrate products of `order` admitted eigenfunctions exactly.
    """
    if isinstance(model, (str, Kind)):
        model = ManifoldModel.make(model)
    resolution = int(resolution)
    if cutoff is not None:
        need = model.min_resolution(cutoff, order)
        if resolution < need:
            raise ConfigurationError(
                f"resolution {resolution} is below the minimum {need} for "
                f"cutoff {cutoff} at order {order} ({model})")
    elif resolution < 1:
        raise ConfigurationError(f"resolution must be positive, "
                                 f"got {resolution}")
    points, weights, axes = model.quadrature(resolution)
    return QuadratureGrid(model, points, weights, resolution, axes, order,
                          cutoff)


def grid_for(table, order=2):
    """ The smallest grid integrating products of `order` modes of `table` """
    need = table.model.min_resolution(table.max_lambda, order)
    return quadrature_grid(table.model, need, table.max_lambda, order)


def eigenfunction_sup(model, mode):
    """ sup_x |e(x)| of one basis function """
    if isinstance(model, (str, Kind)):
        model = ManifoldModel.make(model)
    qn = mode.qn if isinstance(mode, Mode) else tuple(np.atleast_1d(mode))
    return float(model.sup_norm([qn])[0])


def project(table, values, grid):
    """ Analysis map: coefficients of grid samples against the table's modes

    The inverse of synthesis for functions in the span of `table`, provided
    the grid integrates products of two admitted modes exactly.
    """
    grid.require(table, 2)
    values = np.asarray(values, dtype=complex).reshape(-1)
    if len(values) != len(grid):
        raise ValueError(f"{len(values)} samples for a grid of {len(grid)}")
    weighted = grid.weights * values
    coeffs = np.zeros(len(table), dtype=complex)
    rows = _chunk_rows(len(table))
    for start in range(0, len(grid), rows):
        basis = table.model.basis(table.qn, grid.points[start:start+rows])
        coeffs += basis.conj().T @ weighted[start:start+rows]
    return coeffs
