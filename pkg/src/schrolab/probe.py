""" Operator-norm probes, scaling fits and their pass/fail judgement

Every probe reduces to a ratio of a norm of the dyadic block at scale h to
the block's L^2 norm, maximized over the members of a data family. Ratios
at several h form a ScalingSeries; `fit_exponent` fits value ~ h^slope and
a Threshold decides whether the slope (or the values) satisfy the bound
being probed.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import config
from .evolve import sample, spacetime_norm, time_grid
from .exceptions import ConfigurationError, DomainError, EmptyEnsembleError
from .fields import SpectralField, lebesgue_norm, sobolev_norm
from .lp import apply_block, block_for_h, dyadic_index
from .maximal import maximal_lp_norm, maximal_profile
from .spectra import (Kind, ManifoldModel, enumerate_modes, grid_for,
                      quadrature_grid)
from .util import dumpcsv, fmt

log = logging.getLogger(__name__)


def _model(model):
    if isinstance(model, ManifoldModel):
        return model
    return ManifoldModel.make(model)


def strichartz_exponent(model):
    """ p = 2(n + 2)/n for a compact model of dimension n """
    n = _model(model).dim
    return 2 * (n + 2) / n


# Known Strichartz losses h^-beta at exponent q, as (kind, largest q, beta).
# Flat tori: T^1 L^6 and T^2 L^4 lose nothing; T^n loses nothing for
# q <= 2(n+1)/n and n/4 - 1/2 at L^4. Spheres lose s_0(n) at L^4.
_LOSSES = (
    (Kind.circle, 6.0, 0.0),
    (Kind.torus2, 4.0, 0.0),
    (Kind.torus3, 8 / 3, 0.0),
    (Kind.torus3, 4.0, 0.25),
    (Kind.sphere2, 4.0, 0.125),
    (Kind.sphere3, 4.0, 0.25),
)


def strichartz_loss(model, q):
    """ beta in ||e^{-it Delta} block||_{L^q} <~ h^-beta ||block||_2

    Falls back to the general-manifold loss 1/q at q = 2(n+2)/n.
    """
    model = _model(model)
    general = strichartz_exponent(model)
    for kind, top, beta in _LOSSES:
        if model.kind is kind and q <= top + 1e-12:
            if model.kind in (Kind.sphere2, Kind.sphere3) \
                    and not math.isclose(q, top):
                continue
            return beta
    if math.isclose(q, general):
        return 1 / general
    raise ConfigurationError(f"no known Strichartz loss for {model} at "
                             f"q={fmt(q)}; set beta explicitly")


def maximal_exponent(model, p, beta=None):
    """ alpha in ||T* block||_{L^p} <~ h^-alpha ||block||_2

    The time-derivative argument gives h^(-2/p - beta); the block's own L^p
    norm costs h^-(n/2 - n/p) by Bernstein. The larger loss wins.
    """
    model = _model(model)
    beta = strichartz_loss(model, p) if beta is None else beta
    n = model.dim
    return max(2 / p + beta, n / 2 - n / p)


@dataclass(frozen=True)
class EnsembleMax:
    """ Largest ratio over the members whose block was not zero """
    value: float
    trials: int
    skipped: int = 0

    def __float__(self):
        return self.value


def _trial_count(family, trials):
    trials = family.trials if trials is None else int(trials)
    if trials < 1:
        raise ConfigurationError(f"need at least one trial, got {trials}")
    return trials


def ensemble_max(measure, family, table, trials, what):
    """ max over trials of measure(member); None from measure means skip

    Trials run in a thread pool when several workers are configured; the
    reduction is in trial order.
    """
    trials = _trial_count(family, trials)

    def one(trial):
        return measure(family.member(table, trial))

    workers = config.workers()
    if workers == 1 or trials == 1:
        values = [one(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(one, range(trials)))
    kept = [v for v in values if v is not None]
    skipped = trials - len(kept)
    if skipped:
        log.warning("%s: skipped %s of %s members with a zero block",
                    what, skipped, trials)
    if not kept:
        raise EmptyEnsembleError(f"{what}: every member of "
                                 f"{family.describe()} has a zero block")
    return EnsembleMax(float(max(kept)), len(kept), skipped)


def _is_zero(block, f):
    floor = config.settings().probe.zero_block
    return block.l2_norm() <= floor * max(f.l2_norm(), 1e-300)


def scale_table(model, h, cutoff):
    """ Mode table holding the block at scale h: lambda <= 2/h """
    dyadic_index(h)
    return enumerate_modes(_model(model), 2 / h if cutoff is None else cutoff)


def probe_grid(table, p, resolution=None):
    """ Grid exact for products of ceil(p) modes, or a checked override """
    order = max(2, math.ceil(p))
    if resolution is None:
        return grid_for(table, order)
    return quadrature_grid(table.model, resolution, table.max_lambda, order)


def strichartz_ratio(model, h, family, p, trials=None, cutoff=None,
                     resolution=None):
    """ max_f ||e^{-it Delta} block||_{L^p((0,1] x M)} / ||block||_2 """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    table = scale_table(model, h, cutoff)
    family = family.at_scale(h, table)
    sgrid = probe_grid(table, p, resolution)

    def measure(f):
        block = block_for_h(f, h)
        if _is_zero(block, f):
            return None
        tgrid = time_grid(table=block)
        return spacetime_norm(block, p, tgrid, sgrid) / block.l2_norm()

    out = ensemble_max(measure, family, table, trials,
                        f"strichartz h={fmt(h)}")
    log.info("strichartz %s h=%s p=%s: %s", table.model, fmt(h), fmt(p),
             out.value)
    return out


def maximal_ratio(model, h, family, p, trials=None, cutoff=None, tol=None,
                  resolution=None):
    """ max_f ||T* block||_{L^p} (upper enclosure) / ||block||_2 """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    table = scale_table(model, h, cutoff)
    family = family.at_scale(h, table)
    sgrid = probe_grid(table, p, resolution)
    tol = config.settings().maximal.tol if tol is None else tol

    def measure(f):
        block = block_for_h(f, h)
        if _is_zero(block, f):
            return None
        size = block.l2_norm()
        profile = maximal_profile(block, sgrid, tol * size)
        return maximal_lp_norm(profile, p).hi / size

    out = ensemble_max(measure, family, table, trials,
                        f"maximal h={fmt(h)}")
    log.info("maximal %s h=%s p=%s: %s", table.model, fmt(h), fmt(p),
             out.value)
    return out


def low_frequency_constant(table, q, grid=None):
    """ (sum over modes the low block keeps of ||e_j||_{L^q}^2)^(1/2)

    T*(low block) <= sum_j |f_j| |e_j| pointwise, so Cauchy-Schwarz bounds
    ||T*(low block)||_q by this constant times ||f||_2.
    """
    keep = np.flatnonzero(apply_block(SpectralField(
        table, np.ones(len(table))), 0).coeffs)
    grid = grid or probe_grid(table, q)
    total = sum(lebesgue_norm(SpectralField.single(table, j), q, grid) ** 2
                for j in keep)
    return math.sqrt(total)


def low_frequency_bound(model, q, cutoff, family, trials=None, tol=None,
                        resolution=None):
    """ max_f ||T*(low block f)||_{L^q} (upper enclosure) / ||f||_2 """
    if q < 2:
        raise DomainError(f"q must be >= 2, got {q}")
    table = enumerate_modes(_model(model), cutoff)
    sgrid = probe_grid(table, q, resolution)
    tol = config.settings().maximal.tol if tol is None else tol

    def measure(f):
        size = f.l2_norm()
        if size == 0:
            return 0.0
        block = apply_block(f, 0)
        if not np.any(block.coeffs):
            return 0.0
        profile = maximal_profile(block, sgrid, tol * size)
        return maximal_lp_norm(profile, q).hi / size

    return ensemble_max(measure, family, table, trials, "low frequency")


@dataclass(frozen=True)
class ScalePoint:
    h: float
    value: float
    trials: int = 1


@dataclass(frozen=True)
class ScalingSeries:
    """ Values at strictly decreasing dyadic scales h """
    inequality: str
    model: str
    p: float
    points: tuple = ()
    family: str = ''

    def __post_init__(self):
        object.__setattr__(self, 'points', tuple(self.points))
        hs = [pt.h for pt in self.points]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ConfigurationError(f"scales must strictly decrease, "
                                     f"got {hs}")
        if any(not pt.value >= 0 for pt in self.points):
            raise DomainError(f"negative or NaN value in series "
                              f"{self.inequality}")

    @classmethod
    def from_pairs(cls, pairs, inequality='', model='', p=0.0, family=''):
        points = tuple(ScalePoint(float(h), float(v)) for h, v in pairs)
        return cls(inequality, str(model), p, points, family)

    def append(self, h, value, trials=1):
        point = ScalePoint(float(h), float(value), int(trials))
        return ScalingSeries(self.inequality, self.model, self.p,
                             self.points + (point,), self.family)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def hs(self):
        return np.array([pt.h for pt in self.points])

    @property
    def values(self):
        return np.array([pt.value for pt in self.points])


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


def fit_exponent(series):
    """ Least-squares fit of log(value) on log(h) """
    if len(series) < 3:
        raise DomainError(f"need at least 3 scales to fit, got {len(series)}")
    values = series.values
    if np.any(values <= 0):
        raise DomainError("cannot fit nonpositive values on a log scale")
    x = np.log(series.hs)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    spread = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if spread == 0 else 1 - float(np.sum(resid ** 2)) / spread
    return Fit(float(slope), float(intercept), float(r2))


@dataclass(frozen=True)
class Threshold:
    """ The check a series is judged against

    min      fitted slope >= target - tol
    band     |fitted slope - target| <= tol
    ceiling  every value <= target + tol
    median   every value <= target * median(values)
    diagnostic  reported only; never fails on its own
    """
    kind: str
    target: float
    tol: float = 0.0

    kinds = ('min', 'band', 'ceiling', 'median', 'diagnostic')

    def __post_init__(self):
        if self.kind not in self.kinds:
            raise ConfigurationError(f"unknown threshold kind '{self.kind}'")

    @property
    def needs_fit(self):
        return self.kind in ('min', 'band')

    def __str__(self):
        target, tol = fmt(round(self.target, 12)), fmt(self.tol)
        return {
            'min': f"slope >= {target} - {tol}",
            'band': f"slope = {target} +/- {tol}",
            'ceiling': f"value <= {target} + {tol}",
            'median': f"value <= {target} x median",
            'diagnostic': "diagnostic",
        }[self.kind]

    def judge(self, series, fit=None):
        if self.kind == 'min':
            return fit.slope >= self.target - self.tol
        if self.kind == 'band':
            return abs(fit.slope - self.target) <= self.tol
        if self.kind == 'diagnostic':
            return True
        values = series.values
        if self.kind == 'ceiling':
            return bool(np.all(values <= self.target + self.tol))
        return bool(np.all(values <= self.target * np.median(values)))


@dataclass(frozen=True)
class ExperimentReport:
    """ A judged series: per-scale rows plus the fit and the verdict """
    series: ScalingSeries
    threshold: Threshold
    fit: Fit = None
    passed: bool = False
    notes: tuple = field(default=())

    columns = ['inequality_id', 'model', 'h', 'p_or_q', 'trials', 'value',
               'slope', 'r2', 'threshold', 'pass']

    @classmethod
    def judge(cls, series, threshold, notes=(), ok=True):
        """ Fit when possible, then judge; ok=False forces a failure """
        fit = None
        if threshold.needs_fit or (len(series) >= 3
                                   and np.all(series.values > 0)):
            fit = fit_exponent(series)
        passed = bool(ok) and bool(threshold.judge(series, fit))
        report = cls(series, threshold, fit, passed, tuple(notes))
        level = logging.INFO if passed else logging.WARNING
        log.log(level, "%s", report.summary())
        return report

    @property
    def inequality(self):
        return self.series.inequality

    def rows(self):
        slope = '' if self.fit is None else self.fit.slope
        r2 = '' if self.fit is None else self.fit.r2
        for pt in self.series:
            yield {'inequality_id': self.series.inequality,
                   'model': self.series.model,
                   'h': pt.h,
                   'p_or_q': self.series.p,
                   'trials': pt.trials,
                   'value': pt.value,
                   'slope': slope,
                   'r2': r2,
                   'threshold': str(self.threshold),
                   'pass': self.passed}

    def to_csv(self, target):
        comments = [f"family={self.series.family}"]
        comments += list(self.notes)
        dumpcsv(target, self.rows(), self.columns, comments)

    def summary(self):
        verdict = 'pass' if self.passed else 'FAIL'
        fitted = '' if self.fit is None \
            else f" slope {self.fit.slope:.4f} (r2 {self.fit.r2:.4f})"
        return (f"{self.series.inequality} {self.series.model} "
                f"p={fmt(self.series.p)}:{fitted} "
                f"max {self.series.values.max(initial=0):.6g} "
                f"vs {self.threshold}: {verdict}")


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    trial: int
    t: float
    lo: float
    hi: float
    mean_value: float
    h_alpha: float


@dataclass(frozen=True)
class SweepTable:
    """ sup_x |u(t, x) - f(x)| enclosures per alpha, trial and time

    `lo` is the maximum over grid points (a lower bound for the sup over
    the manifold); `hi` is sum_j |e^{it lambda_j^2} - 1| |f_j| sup|e_j|.
    `mean_value` is the cruder t sum_j lambda_j^2 |f_j| sup|e_j|.
    """
    model: str
    cutoff: float
    rows: tuple

    columns = ['alpha', 'trial', 't', 'lo', 'hi', 'mean_value', 'h_alpha']

    def __iter__(self):
        return iter(self.rows)

    def where(self, alpha):
        return [r for r in self.rows if r.alpha == alpha]

    def plateau(self, alpha):
        """ Worst over trials of lo at the smallest t over lo at the largest """
        worst = 0.0
        for trial in {r.trial for r in self.where(alpha)}:
            rows = [r for r in self.where(alpha) if r.trial == trial]
            if rows[0].lo > 0:
                worst = max(worst, rows[-1].lo / rows[0].lo)
        return worst

    @property
    def consistent(self):
        return all(r.lo <= r.hi * (1 + 1e-9) + 1e-12
                   and r.hi <= r.mean_value * (1 + 1e-9) + 1e-12
                   for r in self.rows)

    @property
    def monotone(self):
        """ Whether hi never grows as t decreases, per alpha and trial """
        keys = {(r.alpha, r.trial) for r in self.rows}
        for key in keys:
            his = [r.hi for r in self.rows if (r.alpha, r.trial) == key]
            if any(b > a * (1 + 1e-12) for a, b in zip(his, his[1:])):
                return False
        return True

    def to_csv(self, target):
        comments = [f"model={self.model}", f"cutoff={fmt(self.cutoff)}"]
        rows = ({c: getattr(r, c) for c in self.columns} for r in self.rows)
        dumpcsv(target, rows, self.columns, comments)


def convergence_sweep(model, family, alphas, times, cutoff, trials=None,
                      resolution=None):
    """ Distance of u(t) from f in sup norm as t decreases to 0 """
    times = np.asarray(times, dtype=float).reshape(-1)
    if not len(times) or np.any(times <= 0) or np.any(times > 1):
        raise ConfigurationError(f"sweep times must lie in (0, 1], "
                                 f"got {times.tolist()}")
    if np.any(np.diff(times) >= 0):
        raise ConfigurationError("sweep times must decrease toward 0")
    table = enumerate_modes(_model(model), cutoff)
    grid = probe_grid(table, 2, resolution)
    sups = table.model.sup_norm(table.qn) if len(table) else np.zeros(0)
    rows = []
    for alpha in alphas:
        member_family = family.with_alpha(alpha)
        count = _trial_count(member_family, trials)
        for trial in range(count):
            f = member_family.member(table, trial)
            start = f.values(grid)
            u = sample(f, times, grid).values
            lo = np.abs(u - start).max(axis=1, initial=0)
            weight = np.abs(f.coeffs) * sups
            phase = np.abs(np.exp(1j * np.outer(times, f.eigenvalues)) - 1)
            hi = phase @ weight
            mean_value = times * float(np.dot(f.eigenvalues, weight))
            size = sobolev_norm(f, alpha)
            for i, t in enumerate(times):
                rows.append(SweepRow(float(alpha), trial, float(t),
                                     float(lo[i]), float(hi[i]),
                                     float(mean_value[i]), size))
        log.info("sweep alpha=%s: %s trials over %s times", fmt(alpha),
                 count, len(times))
    return SweepTable(str(table.model), float(cutoff), tuple(rows))
