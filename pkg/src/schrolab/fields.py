""" Spectral fields, norms and probing ensembles """

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from . import spectra
from .exceptions import ConfigurationError, DomainError
from .spectra import Kind, ManifoldModel, enumerate_modes
from .util import dumpcsv, readcsv

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """ A function given by its coefficients against a mode table """
    table: spectra.ModeTable
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(coeffs) != len(self.table):
            raise DomainError(f"{len(coeffs)} coefficients for a table of "
                              f"{len(self.table)} modes")
        if not np.all(np.isfinite(coeffs)):
            raise DomainError("non-finite field coefficients")
        coeffs.flags.writeable = False
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def zeros(cls, table):
        return cls(table, np.zeros(len(table), dtype=complex))

    @classmethod
    def single(cls, table, mode_id, coeff=1.0):
        coeffs = np.zeros(len(table), dtype=complex)
        coeffs[mode_id] = coeff
        return cls(table, coeffs)

    @property
    def model(self):
        return self.table.model

    @property
    def eigenvalues(self):
        return self.table.eigenvalues

    def __len__(self):
        return len(self.coeffs)

    def __repr__(self):
        return (f"SpectralField({self.model}, cutoff={self.table.cutoff!r}, "
                f"l2={self.l2_norm():.6g})")

    def with_coeffs(self, coeffs):
        return type(self)(self.table, coeffs)

    def _check_table(self, other):
        if other.table is not self.table:
            raise ValueError("fields live on different mode tables")

    def __add__(self, other):
        self._check_table(other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_table(other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __neg__(self):
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar):
        return self.with_coeffs(self.coeffs * scalar)

    __rmul__ = __mul__

    def l2_norm(self):
        return float(np.sqrt(np.dot(np.abs(self.coeffs), np.abs(self.coeffs))))

    def level_amplitudes(self, points):
        """ P_mu f at each point, one row per distinct eigenvalue """
        return self.model.level_amplitudes(self.table, self.coeffs, points)

    def values(self, points):
        """ Synthesized values at a grid or array of chart points """
        return self.level_amplitudes(points).sum(axis=0)

    def to_csv(self, target, **meta):
        """ Write mode_id, re, im rows; model/cutoff/norm go in the header """
        comments = [f"model={self.model}", f"cutoff={self.table.cutoff!r}",
                    f"l2={self.l2_norm()!r}"]
        comments += [f"{k}={v}" for k, v in meta.items()]
        rows = ({'mode_id': i, 're': float(c.real), 'im': float(c.imag)}
                for i, c in enumerate(self.coeffs))
        dumpcsv(target, rows, ['mode_id', 're', 'im'], comments)

    @classmethod
    def from_csv(cls, source):
        meta, rows = readcsv(source)
        try:
            table = enumerate_modes(Kind.parse(meta['model']),
                                    float(meta['cutoff']))
        except KeyError as ex:
            raise ConfigurationError(f"field file lacks '{ex.args[0]}' "
                                     f"metadata", source=str(source))
        coeffs = np.zeros(len(table), dtype=complex)
        for row in rows:
            coeffs[int(row['mode_id'])] = complex(float(row['re']),
                                                  float(row['im']))
        return cls(table, coeffs)


def sobolev_norm(f, alpha):
    """ (sum_j (1 + lambda_j^2)^alpha |f_j|^2)^(1/2) """
    weights = (1 + f.eigenvalues) ** alpha
    return float(np.sqrt(np.dot(weights, np.abs(f.coeffs) ** 2)))


def synthesize(f, point):
    """ f(x) = sum_j f_j e_j(x) at a single chart point """
    if not len(f):
        return 0j
    basis = f.model.basis(f.table.qn, np.atleast_1d(
        np.asarray(point, dtype=float)))
    return complex(basis[0] @ f.coeffs)


def lebesgue_norm(f, p, grid):
    """ (sum_x w_x |f(x)|^p)^(1/p) on a quadrature grid """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    grid.require(f.table, 2)
    values = np.abs(f.values(grid))
    return float(np.dot(grid.weights, values ** p) ** (1 / p))


def trial_rng(seed, trial, model, cutoff):
    """ Independent generator per (seed, trial, model, cutoff) """
    if not isinstance(model, ManifoldModel):
        model = ManifoldModel.make(model)
    code = list(Kind).index(model.kind)
    key = int(round(float(cutoff) * 1_000_000))
    return np.random.default_rng(
        np.random.SeedSequence([int(seed), int(trial), code, key]))


def complex_gaussians(rng, n):
    re, im = rng.standard_normal(n), rng.standard_normal(n)
    return (re + 1j * im) / math.sqrt(2)


def random_field(model, alpha, cutoff, seed, trial=0):
    """ Gaussian field with f_j ~ (1 + lambda_j^2)^(-alpha/2), unit H^alpha """
    if not cutoff > 0:
        raise DomainError(f"cutoff must be positive, got {cutoff}")
    table = enumerate_modes(model, cutoff)
    rng = trial_rng(seed, trial, table.model, cutoff)
    coeffs = complex_gaussians(rng, len(table))
    coeffs *= (1 + table.eigenvalues) ** (-alpha / 2)
    f = SpectralField(table, coeffs)
    return f * (1 / sobolev_norm(f, alpha))


class DataFamily:
    """ A named family of probe data on a mode table

    Subclasses register by name so experiment configs can refer to them.
    `member(table, trial)` returns a field normalized in `norm_alpha`
    (the H^alpha index; 0 means L^2).
    """
    registry = {}
    name = None
    trials = 1
    seed = 0

    def __init_subclass__(cls, name=None, **kwargs):
        super().__init_subclass__(**kwargs)
        if name is not None:
            cls.name = name
            cls.registry[name] = cls

    @classmethod
    def make(cls, name, **params):
        try:
            family = cls.registry[name]
        except KeyError:
            known = ', '.join(sorted(cls.registry))
            raise ConfigurationError(f"unknown data family '{name}' "
                                     f"(expected one of: {known})")
        try:
            return family(**params)
        except TypeError as ex:
            raise ConfigurationError(f"bad parameters for family "
                                     f"'{name}': {ex}")

    @property
    def norm_alpha(self):
        return 0

    def at_scale(self, h, table):
        """ The member family to use for the dyadic block at scale h """
        return self

    def with_alpha(self, alpha):
        return self

    def describe(self):
        params = ', '.join(f"{k}={v}" for k, v in vars(self).items())
        return f"{self.name}({params})"

    def coefficients(self, table, trial):
        raise NotImplementedError

    def member(self, table, trial=0):
        f = SpectralField(table, self.coefficients(table, trial))
        size = sobolev_norm(f, self.norm_alpha)
        if size == 0:
            return f
        return f * (1 / size)

    def members(self, table):
        for trial in range(self.trials):
            yield self.member(table, trial)


@dataclass(frozen=True)
class SobolevEnsemble(DataFamily, name='sobolev'):
    alpha: float = 0.0
    seed: int = 0
    trials: int = 1

    @property
    def norm_alpha(self):
        return self.alpha

    def with_alpha(self, alpha):
        return replace(self, alpha=alpha)

    def coefficients(self, table, trial):
        rng = trial_rng(self.seed, trial, table.model, table.cutoff)
        coeffs = complex_gaussians(rng, len(table))
        return coeffs * (1 + table.eigenvalues) ** (-self.alpha / 2)


@dataclass(frozen=True)
class SingleMode(DataFamily, name='single_mode'):
    id: int = 0
    trials: int = 1

    def coefficients(self, table, trial):
        coeffs = np.zeros(len(table), dtype=complex)
        coeffs[self.id] = 1
        return coeffs


def nearest_level(table, lam):
    """ Level label of the distinct eigenvalue whose sqrt is closest to lam """
    if not len(table):
        raise ConfigurationError(f"empty mode table {table!r}")
    roots = np.sqrt(table.level_eigenvalues)
    start = table.level_starts[int(np.argmin(np.abs(roots - lam)))]
    return table.modes[start].level


@dataclass(frozen=True)
class LevelBeam(DataFamily, name='level_beam'):
    """ All energy on the modes of one level (sphere degree, torus shell)

    With k unset, `at_scale` picks the level nearest frequency 1/h.
    """
    k: int = None
    seed: int = 0
    trials: int = 1

    def at_scale(self, h, table):
        if self.k is not None:
            return self
        return replace(self, k=nearest_level(table, 1 / h))

    def coefficients(self, table, trial):
        if self.k is None:
            raise ConfigurationError("level_beam needs a level k")
        level = np.array([m.level for m in table.modes])
        hits = np.flatnonzero(level == self.k)
        if not len(hits):
            raise ConfigurationError(f"no level {self.k} in {table!r}")
        coeffs = np.zeros(len(table), dtype=complex)
        if len(hits) == 1 or (self.trials == 1 and self.seed == 0):
            coeffs[hits] = 1
        else:
            rng = trial_rng(self.seed, trial, table.model, table.cutoff)
            coeffs[hits] = complex_gaussians(rng, len(hits))
        return coeffs


@dataclass(frozen=True)
class HighestWeightBeam(DataFamily, name='highest_weight'):
    """ S^2 Gaussian beam (Y_kk + i Y_k,-k) / sqrt2 ~ sin^k(theta) e^(ik phi) """
    k: int = None
    trials: int = 1

    def at_scale(self, h, table):
        if self.k is not None:
            return self
        return replace(self, k=max(0, int(round(1 / h))))

    def coefficients(self, table, trial):
        if table.model.kind is not Kind.sphere2:
            raise ConfigurationError("highest-weight beams live on sphere2")
        if self.k is None:
            raise ConfigurationError("highest_weight needs a degree k")
        coeffs = np.zeros(len(table), dtype=complex)
        try:
            if self.k == 0:
                coeffs[table.index((0, 0))] = 1
                return coeffs
            coeffs[table.index((self.k, self.k))] = 1
            coeffs[table.index((self.k, -self.k))] = 1j
        except LookupError as ex:
            raise ConfigurationError(str(ex))
        return coeffs


@dataclass(frozen=True)
class WavePacket(DataFamily, name='wave_packet'):
    """ Gaussian spectral envelope around a center frequency lambda0

    An unset center follows the probing scale (lambda0 = 1/h); an unset
    width is a quarter of the center.
    """
    center: float = None
    width: float = None
    trials: int = 1

    def at_scale(self, h, table):
        if self.center is not None:
            return self
        return replace(self, center=1 / h)

    def coefficients(self, table, trial):
        center = 0.0 if self.center is None else self.center
        width = self.width if self.width is not None else max(center / 4, 1.0)
        if not width > 0:
            raise ConfigurationError(f"wave packet width must be positive, "
                                     f"got {width}")
        lam = np.sqrt(table.eigenvalues)
        envelope = np.exp(-0.5 * ((lam - center) / width) ** 2)
        return envelope.astype(complex)
