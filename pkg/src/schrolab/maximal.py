""" Certified enclosures of the maximal Schrodinger operator

T*f(x) = sup_{0 < t <= 1} |u(t, x)|. Per point, u(t, x) is a finite sum of
e^{it mu} a_mu(x) over distinct eigenvalues mu, so |u| is Lipschitz in t
and an interval [a, b] of width w has two sound upper bounds:

    (|u(a)| + |u(b)| + L1 w) / 2          L1 = sum |mu - mu_c| |a_mu|
    sqrt((|u(a)|^2 + |u(b)|^2 + L2 w) / 2)  L2 = sum |mu - mu'| |a_mu||a_mu'|

(mu_c is any reference frequency; multiplying u by e^{-it mu_c} does not
change |u|). Intervals whose bound exceeds the running lower bound plus the
tolerance are bisected; the rest are retired and their bounds kept.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import config
from .exceptions import (ConfigurationError, DivergentConstantError,
                         DomainError, ResourceLimitError)
from .evolve import spacetime_norm, time_grid
from .fields import lebesgue_norm, sobolev_norm
from .lp import block_for_h
from .spectra import Kind, QuadratureGrid, grid_for
from .util import dumpcsv, fmt

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Enclosure:
    """ A closed interval [lo, hi] known to contain a value """
    lo: float
    hi: float

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"invalid enclosure [{self.lo}, {self.hi}]")

    def __repr__(self):
        return f"[{self.lo:.6g}, {self.hi:.6g}]"

    def __iter__(self):
        return iter((self.lo, self.hi))

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def mid(self):
        return (self.lo + self.hi) / 2

    def __contains__(self, value):
        return self.lo <= value <= self.hi


@dataclass(frozen=True, eq=False)
class MaximalProfile:
    """ Per-point enclosures of T*f on a space grid """
    grid: object
    lo: np.ndarray
    hi: np.ndarray
    tol: float

    @property
    def points(self):
        return self.grid.points if isinstance(self.grid, QuadratureGrid) \
            else self.grid

    def __len__(self):
        return len(self.lo)

    def __getitem__(self, i):
        return Enclosure(float(self.lo[i]), float(self.hi[i]))

    def rows(self):
        for point, lo, hi in zip(self.points, self.lo, self.hi):
            yield {'point': tuple(float(c) for c in np.atleast_1d(point)),
                   'lo': float(lo), 'hi': float(hi)}

    def to_csv(self, target):
        comments = [f"tol={self.tol!r}", f"points={len(self)}"]
        dumpcsv(target, self.rows(), ['point', 'lo', 'hi'], comments)


class _PointData:
    """ Level amplitudes of f at a batch of points plus Lipschitz data """

    def __init__(self, f, points):
        amps = f.level_amplitudes(points)
        mu = f.table.level_eigenvalues
        active = np.any(amps != 0, axis=1)
        self.mu = mu[active]
        self.amps = amps[active]
        size = np.abs(self.amps)
        if len(self.mu):
            # Weighted median frequency per point minimizes L1.
            cum = np.cumsum(size, axis=0)
            centre = self.mu[np.argmax(cum >= cum[-1] / 2, axis=0)]
            self.l1 = (np.abs(self.mu[:, None] - centre) * size).sum(axis=0)
            before = np.cumsum(size, axis=0) - size
            before_mu = np.cumsum(self.mu[:, None] * size, axis=0) \
                - self.mu[:, None] * size
            self.l2 = 2 * (size * (self.mu[:, None] * before
                                   - before_mu)).sum(axis=0)
            self.spread = float(self.mu[-1] - self.mu[0])
        else:
            n = amps.shape[1]
            self.l1 = self.l2 = np.zeros(n)
            self.spread = 0.0

    @property
    def npoints(self):
        return self.amps.shape[1]

    def at(self, times, which):
        """ |u(t_i, x_{which_i})| for paired arrays of times and points """
        out = np.empty(len(times))
        rows = max(1, config.settings().quadrature.chunk ** 2
                   // max(len(self.mu), 1))
        for start in range(0, len(times), rows):
            t = times[start:start+rows]
            phases = np.exp(1j * np.outer(t, self.mu))
            gathered = self.amps[:, which[start:start+rows]].T
            out[start:start+rows] = np.abs((phases * gathered).sum(axis=1))
        return out

    def grid_values(self, times):
        """ |u(t, x)| for every time (rows) and point (columns) """
        phases = np.exp(1j * np.outer(times, self.mu))
        return np.abs(phases @ self.amps)


def _bounds(ma, mb, width, l1, l2):
    tent = 0.5 * (ma + mb + l1 * width)
    square = np.sqrt(0.5 * (ma * ma + mb * mb + l2 * width))
    return np.minimum(tent, square)


def _enclose(f, points, tol):
    """ Vectorized branch and bound over all points; returns (lo, hi) """
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    limits = config.settings().maximal
    data = _PointData(f, points)
    npts = data.npoints
    if not len(data.mu):
        return np.zeros(npts), np.zeros(npts)

    intervals = max(1, math.ceil(data.spread))
    times = np.linspace(0.0, 1.0, intervals + 1)
    mags = np.vstack([data.grid_values(times[s:s+256])
                      for s in range(0, len(times), 256)])
    lo = mags.max(axis=0)
    hi = lo.copy()

    width = 1.0 / intervals
    bounds = _bounds(mags[:-1], mags[1:], width, data.l1, data.l2)
    live = bounds > lo + tol
    retired = np.where(live, 0.0, bounds).max(axis=0)
    hi = np.maximum(hi, retired)
    cand_t, cand_p = np.nonzero(live)
    start = times[cand_t]
    ma = mags[cand_t, cand_p]
    mb = mags[cand_t + 1, cand_p]
    which = cand_p

    depth = 0
    while len(which):
        depth += 1
        if depth > limits.max_depth or len(which) > limits.max_intervals:
            best = (lo, np.maximum(hi, _worst(which, npts, ma, mb, width,
                                              data)))
            raise ResourceLimitError(
                f"T* enclosure did not reach tol={tol} after {depth - 1} "
                f"bisections ({len(which)} live intervals)", best=best)
        width /= 2
        mid = start + width
        mm = data.at(mid, which)
        np.maximum.at(lo, which, mm)
        # Children: [start, mid] and [mid, start + 2 width]
        start = np.concatenate([start, mid])
        which = np.concatenate([which, which])
        ma, mb = np.concatenate([ma, mm]), np.concatenate([mm, mb])
        bounds = _bounds(ma, mb, width, data.l1[which], data.l2[which])
        live = bounds > lo[which] + tol
        np.maximum.at(hi, which[~live], bounds[~live])
        start, which, ma, mb = start[live], which[live], ma[live], mb[live]
        log.debug("bisection depth %s: %s live intervals", depth, len(which))

    hi = np.nextafter(np.maximum(hi, lo), np.inf)
    return lo, hi


def _worst(which, npts, ma, mb, width, data):
    out = np.zeros(npts)
    np.maximum.at(out, which, _bounds(ma, mb, width, data.l1[which],
                                      data.l2[which]))
    return out


def certified_sup(f, x, tol=None):
    """ Enclosure of T*f(x) = sup over t in (0, 1] of |u(t, x)| """
    tol = config.settings().maximal.tol if tol is None else tol
    point = np.atleast_1d(np.asarray(x, dtype=float))
    try:
        lo, hi = _enclose(f, point.reshape(1, -1), tol)
    except ResourceLimitError as ex:
        lo, hi = ex.best
        ex.best = Enclosure(float(lo[0]), float(hi[0]))
        raise
    return Enclosure(float(lo[0]), float(hi[0]))


def maximal_profile(f, sgrid, tol=None):
    """ certified_sup at every point of a grid (or array of points) """
    tol = config.settings().maximal.tol if tol is None else tol
    points = sgrid.points if isinstance(sgrid, QuadratureGrid) \
        else np.asarray(sgrid, dtype=float)
    try:
        lo, hi = _enclose(f, points, tol)
    except ResourceLimitError as ex:
        lo, hi = ex.best
        ex.best = MaximalProfile(sgrid, lo, hi, tol)
        raise
    log.debug("maximal profile over %s points, max hi %s", len(lo),
              hi.max(initial=0))
    return MaximalProfile(sgrid, lo, hi, tol)


def maximal_lp_norm(profile, p):
    """ Quadrature L^p norm of the lo and hi bands """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if not isinstance(profile.grid, QuadratureGrid):
        raise ConfigurationError("L^p norms need a profile on a quadrature "
                                 "grid, not bare points")
    weights = profile.grid.weights
    lo = float(np.dot(weights, profile.lo ** p) ** (1 / p))
    hi = float(np.dot(weights, profile.hi ** p) ** (1 / p))
    return Enclosure(lo, hi)


def lee_rhs(g, dg, times, mu, q):
    """ |g(a)| + mu^(1/q - 1) ||g'||_q + mu^(1/q) ||g||_q on [a, b]

    `g` and `dg` are samples at `times`; norms use the trapezoid rule.
    """
    g = np.asarray(g)
    dg = np.asarray(dg)
    times = np.asarray(times, dtype=float)
    if not (g.shape == dg.shape == times.shape):
        raise DomainError("g, dg and times must be sampled on one grid")
    if not mu > 0 or q < 1:
        raise DomainError(f"need mu > 0 and q >= 1, got mu={mu}, q={q}")
    gq = integrate.trapezoid(np.abs(g) ** q, times) ** (1 / q)
    dgq = integrate.trapezoid(np.abs(dg) ** q, times) ** (1 / q)
    return float(abs(g[0]) + mu ** (1 / q - 1) * dgq + mu ** (1 / q) * gq)


@dataclass(frozen=True)
class LeeScan:
    omega: float
    q: float
    sup: float
    mu: float
    rhs: float

    @property
    def ratio(self):
        return self.sup / self.rhs


def lee_scan(omega, q, mus=None, samples=None):
    """ sup|g| against the smallest lee_rhs over a mu grid, g = sin(omega t) """
    mus = np.logspace(-3, 6, 181) if mus is None else np.asarray(mus)
    samples = samples or max(2001, int(200 * omega) + 1)
    times = np.linspace(0.0, 1.0, samples)
    g = np.sin(omega * times)
    dg = omega * np.cos(omega * times)
    values = [lee_rhs(g, dg, times, mu, q) for mu in mus]
    best = int(np.argmin(values))
    return LeeScan(float(omega), float(q), float(np.abs(g).max()),
                   float(mus[best]), float(values[best]))


def c_alpha(alpha, n=2, head=64):
    """ (sum_{k >= 0} (1 + k(k+n-1))^-alpha)^(1/2)

    With s = (n-1)/2 the terms are ((k+s)^2 + c)^-alpha, c = 1 - s^2. The
    first `head` terms are summed directly and the tail expanded in powers
    of c/(k+s)^2, each power summed exactly with the Hurwitz zeta function.
    """
    if alpha <= 0.5:
        raise DivergentConstantError(
            f"C_alpha diverges for alpha <= 1/2 (got {alpha})")
    if n < 2:
        raise DomainError(f"sphere dimension must be >= 2, got {n}")
    k = np.arange(head + 1, dtype=float)
    total = float(np.sum((1 + k * (k + n - 1)) ** -alpha))
    s = (n - 1) / 2
    c = 1 - s * s
    shift = head + 1 + s
    if c == 0:
        tail = float(special.zeta(2 * alpha, shift))
    else:
        tail = 0.0
        for j in range(200):
            term = special.binom(-alpha, j) * c ** j \
                * special.zeta(2 * alpha + 2 * j, shift)
            tail += term
            if abs(term) <= 1e-17 * (total + tail):
                break
    return math.sqrt(total + tail)


@dataclass(frozen=True)
class CascadeStep:
    step: str
    lhs: float
    rhs: float
    slack: float = 0.0

    @property
    def margin(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.margin >= -self.slack


@dataclass(frozen=True)
class CascadeReport:
    """ The sphere chain T*f <= sum_k |P_k f| ... <= C_alpha ||f||_{H^alpha} """
    alpha: float
    c_alpha: float
    steps: tuple

    @property
    def holds(self):
        return all(s.holds for s in self.steps)

    def __getitem__(self, name):
        return next(s for s in self.steps if s.step == name)

    def rows(self):
        for s in self.steps:
            yield {'step': s.step, 'lhs': s.lhs, 'rhs': s.rhs,
                   'margin': s.margin, 'holds': s.holds}

    def to_csv(self, target):
        comments = [f"alpha={fmt(self.alpha)}", f"c_alpha={fmt(self.c_alpha)}"]
        dumpcsv(target, self.rows(), ['step', 'lhs', 'rhs', 'margin', 'holds'],
                comments)


_SPHERE_DIM = {Kind.sphere2: 2, Kind.sphere3: 3}


def sphere_triangle_bound(f, alpha, grid=None, tol=None):
    """ Check the level-by-level bound for T* on a sphere

    Steps, each reported with both sides:

    pointwise       max_x T*f(x) - sum_k |P_k f(x)| <= 0 (lower enclosure)
    maximal_l2      ||T*f||_2 (upper enclosure) <= ||sum_k |P_k f| ||_2
    triangle        ||sum_k |P_k f| ||_2 <= sum_k ||P_k f||_2
    cauchy_schwarz  sum_k ||P_k f||_2 <= C_alpha ||f||_{H^alpha}
    total           ||T*f||_2 <= C_alpha ||f||_{H^alpha}
    """
    try:
        n = _SPHERE_DIM[f.model.kind]
    except KeyError:
        raise DomainError(f"sphere_triangle_bound needs a sphere model, "
                          f"not {f.model}")
    constant = c_alpha(alpha, n)
    tol = config.settings().maximal.tol if tol is None else tol
    grid = grid or grid_for(f.table)
    grid.require(f.table, 2)

    profile = maximal_profile(f, grid, tol)
    levels = np.abs(f.level_amplitudes(grid))
    envelope = levels.sum(axis=0)
    weights = grid.weights

    def l2(values):
        return float(np.sqrt(np.dot(weights, values ** 2)))

    level_norms = [l2(row) for row in levels]
    exact_norms = [float(np.linalg.norm(f.coeffs[lv.slice]))
                   for lv in f.table.levels]
    maximal = l2(profile.hi)
    hnorm = sobolev_norm(f, alpha)
    scale = envelope.max(initial=0)
    steps = (
        CascadeStep('pointwise', float((profile.lo - envelope).max()), 0.0,
                    1e-9 * scale),
        CascadeStep('maximal_l2', maximal, l2(envelope),
                    tol * math.sqrt(grid.measure)),
        CascadeStep('triangle', l2(envelope), float(sum(level_norms)),
                    1e-9 * sum(level_norms)),
        CascadeStep('cauchy_schwarz', float(sum(exact_norms)),
                    constant * hnorm, 1e-12 * constant * hnorm),
        CascadeStep('total', maximal, constant * hnorm,
                    1e-12 * constant * hnorm),
    )
    report = CascadeReport(float(alpha), constant, steps)
    for s in steps:
        log.info("cascade %s: %s <= %s (margin %s)", s.step, s.lhs, s.rhs,
                 s.margin)
        if not s.holds:
            log.warning("cascade step %s fails: %s > %s", s.step, s.lhs, s.rhs)
    return report


@dataclass(frozen=True)
class BlockRatio:
    """ ||T* block||_q against h^(-2/q - beta) ||block||_2 + ||block||_q """
    h: float
    q: float
    beta: float
    lhs: Enclosure
    rhs: float

    @property
    def ratio(self):
        return self.lhs.hi / self.rhs if self.rhs > 0 else 0.0

    @property
    def empty(self):
        return self.rhs == 0


def lemma52_check(f, h, q, beta, grid=None, tol=None):
    """ Frequency-localized maximal bound for the dyadic block at scale h """
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    block = block_for_h(f, h)
    order = max(2, math.ceil(q))
    grid = grid or grid_for(block.table, order)
    tol = config.settings().maximal.tol if tol is None else tol
    if not np.any(block.coeffs):
        return BlockRatio(h, q, beta, Enclosure(0.0, 0.0), 0.0)
    # Tolerance relative to the block's size so ratios are scale free.
    size = block.l2_norm()
    lhs = maximal_lp_norm(maximal_profile(block, grid, tol * size), q)
    rhs = h ** (-2 / q - beta) * size + lebesgue_norm(block, q, grid)
    return BlockRatio(float(h), float(q), float(beta), lhs, rhs)


@dataclass(frozen=True)
class InterpolationReport:
    s: float
    l2_spacetime: float
    l2_data: float
    h1_spacetime: float
    h2_data: float
    maximal: Enclosure
    maximal_rhs: float

    @property
    def ratio(self):
        return self.maximal.hi / self.maximal_rhs

    @property
    def holds(self):
        tight = 1e-9 * max(self.l2_data, 1e-300)
        return (abs(self.l2_spacetime - self.l2_data) <= tight
                and self.h1_spacetime <= self.h2_data * (1 + 1e-9)
                and (self.s != 1 or self.ratio <= 1 + 1e-9))


def interpolation_check(f, s=1.0, grid=None, tol=None):
    """ The L^2 / H^1-in-time chain behind ||T*f||_2 <~ ||f||_{H^2s}

    ||u||_{L^2(M x (0,1])} equals ||f||_2 and ||u||_{L^2(M, H^1(0,1])} is at
    most ||f||_{H^2}. For s = 1, sup_t |g| <= sqrt2 ||g||_{H^1(0,1)} gives
    ||T*f||_2 <= sqrt2 ||f||_{H^2}; other s report the ratio against
    ||f||_{H^2s} only.
    """
    grid = grid or grid_for(f.table)
    tgrid = time_grid(table=f.table)
    l2_st = spacetime_norm(f, 2, tgrid, grid)
    dt = f.with_coeffs(1j * f.eigenvalues * f.coeffs)
    h1_st = math.hypot(l2_st, spacetime_norm(dt, 2, tgrid, grid))
    tol = config.settings().maximal.tol if tol is None else tol
    profile = maximal_profile(f, grid, tol)
    maximal = maximal_lp_norm(profile, 2)
    rhs = sobolev_norm(f, 2 * s) * (math.sqrt(2) if s == 1 else 1.0)
    return InterpolationReport(float(s), l2_st, f.l2_norm(), h1_st,
                               sobolev_norm(f, 2), maximal, rhs)
