""" Exact propagation in spectral coordinates and space-time norms

u(t, x) = sum_j e^{it lambda_j^2} f_j e_j(x). Space-time work groups modes
by eigenvalue: with P_mu f the level amplitudes on a grid, u(t) is the
phase matrix e^{it mu} applied to them, one matrix product per time chunk.
Only levels where f is nonzero enter, with phases taken relative to the
lowest of them; |u| does not see a common phase.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from more_itertools import chunked

from . import config
from .exceptions import ConfigurationError, DomainError
from .spectra import ModeTable, QuadratureGrid
from .util import dumpcsv

log = logging.getLogger(__name__)


def active_levels(f):
    """ Indices of the levels on which f has a nonzero coefficient """
    if not len(f):
        return np.zeros(0, dtype=int)
    sizes = np.add.reduceat(np.abs(f.coeffs), f.table.level_starts)
    return np.flatnonzero(sizes)


def phase_spread(f):
    """ Largest minus smallest eigenvalue among f's active levels """
    values = f.table.level_eigenvalues[active_levels(f)]
    return float(values.max() - values.min()) if len(values) else 0.0


def _top_frequency(subject):
    if isinstance(subject, ModeTable):
        return float(subject.eigenvalues.max(initial=0))
    return phase_spread(subject)


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """ Composite trapezoid nodes on [a, b]

    The left node is t = a; for a = 0 the integrand there is the limit
    u(0) = f, so the rule integrates over (0, b].
    """
    a: float
    b: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def spacing(self):
        return (self.b - self.a) / (len(self.nodes) - 1)

    def __len__(self):
        return len(self.nodes)

    def require(self, subject, what='time grid'):
        """ Spacing must resolve the fastest phase of a table or field

        For a table that is its largest eigenvalue; for a field, the
        spread of the eigenvalues it occupies.
        """
        top = _top_frequency(subject)
        limit = max_spacing(top)
        if self.spacing > limit * (1 + 1e-12):
            raise ConfigurationError(
                f"{what} spacing {self.spacing:g} exceeds 1/(4 lambda_max^2)"
                f" = {limit:g}")


def max_spacing(top_eigenvalue):
    oversample = config.settings().quadrature.time_oversample
    return math.inf if top_eigenvalue <= 0 \
        else 1 / (oversample * top_eigenvalue)


def time_grid(a=0.0, b=1.0, spacing=None, table=None):
    """ Trapezoid grid on [a, b], by explicit spacing or sized for `table`

    `table` may also be a field, which sizes the grid by its phase spread.
    """
    if not (0 <= a < b <= 1):
        raise ConfigurationError(f"need 0 <= a < b <= 1, got ({a}, {b}]")
    if spacing is None:
        if table is None:
            raise ConfigurationError("time_grid needs a spacing or a table")
        spacing = max_spacing(_top_frequency(table))
    if not spacing > 0:
        raise ConfigurationError(f"time spacing must be positive, "
                                 f"got {spacing}")
    intervals = max(1, math.ceil((b - a) / spacing - 1e-9))
    nodes = np.linspace(a, b, intervals + 1)
    step = (b - a) / intervals
    weights = np.full(intervals + 1, step)
    weights[0] = weights[-1] = step / 2
    log.debug("time grid (%s, %s] with %s nodes", a, b, len(nodes))
    return TimeGrid(float(a), float(b), nodes, weights)


def propagate(f, t):
    """ e^{-it Delta} f: coefficient j picks up e^{it lambda_j^2} """
    if not math.isfinite(t):
        raise DomainError(f"non-finite time {t}")
    return f.with_coeffs(f.coeffs * np.exp(1j * t * f.eigenvalues))


def level_phases(table, times):
    """ e^{it mu} for each time (rows) and distinct eigenvalue (columns) """
    times = np.asarray(times, dtype=float).reshape(-1)
    if not np.all(np.isfinite(times)):
        raise DomainError("non-finite times")
    return np.exp(1j * np.outer(times, table.level_eigenvalues))


def _time_rows(n_points):
    chunk = config.settings().quadrature.chunk
    return max(1, min(chunk, chunk * chunk // max(n_points, 1)))


def map_time_chunks(func, times, n_points):
    """ Apply func(index_slice, times_chunk) over fixed time chunks

    Chunks depend only on sizes. With several workers the chunks run in a
    thread pool; results always come back in chunk order.
    """
    rows = _time_rows(n_points)
    slices = [slice(c[0], c[-1] + 1)
              for c in chunked(range(len(times)), rows)]
    jobs = [(s, times[s]) for s in slices]
    workers = config.workers()
    if workers == 1 or len(jobs) == 1:
        return [func(*job) for job in jobs]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda job: func(*job), jobs))


@dataclass(frozen=True, eq=False)
class SpaceTimeSamples:
    """ u(t, x) on a time grid times a space grid """
    model: object
    cutoff: float
    times: np.ndarray
    points: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        shape = (len(self.times), len(self.points))
        if self.values.shape != shape:
            raise ValueError(f"values have shape {self.values.shape}, "
                             f"expected {shape}")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("non-finite space-time samples")

    def rows(self):
        coords = [f"x{i}" for i in range(self.points.shape[1])]
        for t, row in zip(self.times, self.values):
            for point, value in zip(self.points, row):
                out = {'t': float(t)}
                out.update(zip(coords, (float(c) for c in point)))
                out['re'] = float(value.real)
                out['im'] = float(value.imag)
                yield out

    def to_csv(self, target):
        coords = [f"x{i}" for i in range(self.points.shape[1])]
        comments = [f"model={self.model}", f"cutoff={self.cutoff!r}",
                    f"times={len(self.times)}", f"points={len(self.points)}"]
        dumpcsv(target, self.rows(), ['t'] + coords + ['re', 'im'], comments)


def sample(f, times, grid):
    """ u(t, x) at every time and grid point """
    times = np.asarray(times, dtype=float).reshape(-1)
    amps = f.level_amplitudes(grid)
    if isinstance(grid, QuadratureGrid):
        points = grid.points
    else:
        points = np.asarray(grid, dtype=float).reshape(amps.shape[1], -1)
    chunks = map_time_chunks(lambda s, ts: level_phases(f.table, ts) @ amps,
                             times, amps.shape[1])
    values = np.vstack(chunks) if chunks \
        else np.zeros((0, amps.shape[1]), dtype=complex)
    return SpaceTimeSamples(f.model, f.table.cutoff, times, points, values)


def _slice_integrals(f, p, tgrid, sgrid, weights):
    """ sum_x w_x |u(t, x)|^p for every time node, in node order """
    active = active_levels(f)
    amps = f.level_amplitudes(sgrid)[active]
    mus = f.table.level_eigenvalues[active]
    mus = mus - mus.min()

    def chunk(_, ts):
        u = np.exp(1j * np.outer(ts, mus)) @ amps
        return np.abs(u) ** p @ weights

    return np.concatenate(map_time_chunks(chunk, tgrid.nodes, amps.shape[1]))


def spacetime_norm(f, p, tgrid, sgrid):
    """ (int_t int_x |u(t, x)|^p)^(1/p) by trapezoid in t, grid in x """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    sgrid.require(f.table, 2, 'space grid')
    tgrid.require(f)
    if not np.any(f.coeffs):
        return 0.0
    slices = _slice_integrals(f, p, tgrid, sgrid, sgrid.weights)
    return float(np.dot(tgrid.weights, slices) ** (1 / p))


@dataclass(frozen=True)
class LocalizedNorm:
    """ A localized L^2 norm plus whether the region missed the grid """
    value: float
    empty: bool

    def __float__(self):
        return self.value


def localized_l2(f, tgrid, region, sgrid):
    """ Space-time L^2 norm of u restricted to `region`

    `region` is a predicate over an (n_points, chart_dim) array returning a
    boolean mask. A region holding no grid points gives 0 with `empty` set.
    """
    sgrid.require(f.table, 2, 'space grid')
    tgrid.require(f)
    mask = np.asarray(region(sgrid.points), dtype=bool).reshape(-1)
    if mask.shape != (len(sgrid),):
        raise ConfigurationError(f"region mask has shape {mask.shape}, "
                                 f"expected ({len(sgrid)},)")
    if not mask.any():
        log.warning("localized region contains no grid points")
        return LocalizedNorm(0.0, True)
    weights = np.where(mask, sgrid.weights, 0.0)
    if not np.any(f.coeffs):
        return LocalizedNorm(0.0, False)
    slices = _slice_integrals(f, 2, tgrid, sgrid, weights)
    return LocalizedNorm(float(np.sqrt(np.dot(tgrid.weights, slices))), False)
