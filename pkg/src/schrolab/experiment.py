""" Experiment configs and the inequality runners they drive

An experiment file is YAML: a mapping of named sections, each one
experiment. An optional `defaults` section is merged into every other
section. String values of numeric keys are evaluated with asteval, so
`h: [2**-2, 2**-3]` and `alpha: 3/4` both work. Unknown keys are errors.
"""

import logging
from dataclasses import dataclass, field, fields, replace
from functools import partial
from pathlib import Path

import yaml
from alive_progress import alive_bar

from . import config
from .exceptions import ConfigurationError, SchrolabError
from .fields import DataFamily
from .hyperbolic import bump_spectrum, smoothing_ratio
from .lp import dyadic_index
from .maximal import (c_alpha, lee_scan, lemma52_check,
                      sphere_triangle_bound)
from .probe import (ExperimentReport, ScalingSeries, Threshold,
                    convergence_sweep, ensemble_max, low_frequency_bound,
                    low_frequency_constant, maximal_exponent, maximal_ratio,
                    probe_grid, scale_table, strichartz_exponent,
                    strichartz_loss, strichartz_ratio)
from .report import write_plot, write_reports
from .spectra import Kind, ManifoldModel, enumerate_modes
from .util import aeval, dumpcsv, loadyaml, slurp

log = logging.getLogger(__name__)

_NUMBERS = {'p', 'beta', 'alpha', 'cutoff', 'trials', 'seed', 'tol',
            'radius', 'resolution'}
_LISTS = {'h', 'alphas', 'times', 'lam0', 'omega'}


@dataclass(frozen=True)
class ExperimentConfig:
    """ One experiment section; unset values fall back to recipe defaults """
    name: str
    inequality: str
    model: str = None
    h: tuple = None
    p: float = None
    beta: float = None
    alpha: float = None
    alphas: tuple = None
    times: tuple = None
    omega: tuple = None
    cutoff: float = None
    family: dict = None
    trials: int = None
    seed: int = 0
    tol: float = None
    lam0: tuple = None
    radius: float = 1.0
    denominator: str = 'sobolev'
    resolution: int = None
    slow: bool = None
    out: str = None
    plot: bool = False
    source: str = field(default=None, compare=False)
    lines: dict = field(default=None, compare=False, repr=False)

    @classmethod
    def keys(cls):
        return {f.name for f in fields(cls)} - {'name', 'source', 'lines'}

    def error(self, msg, key=None):
        """ A ConfigurationError pointing at this section (and key) """
        where = f"{self.source}: {self.name}" if self.source else self.name
        if key:
            where += f".{key}"
        lines = self.lines or {}
        return ConfigurationError(msg, where, lines.get(key, lines.get(None)))

    @classmethod
    def from_mapping(cls, name, mapping, source=None, lines=None):
        """ Build and validate a config from a parsed section """
        lines = lines or {}
        stub = cls(name, '', source=source, lines=lines)
        if not isinstance(mapping, dict):
            raise stub.error("section must be a mapping of keys")
        values = {}
        for key, value in mapping.items():
            if key not in cls.keys():
                known = ', '.join(sorted(cls.keys()))
                raise stub.error(f"unknown key '{key}' (expected one of: "
                                  f"{known})", key)
            try:
                values[key] = _evaluate(key, value)
            except (ValueError, TypeError) as ex:
                raise stub.error(str(ex), key)
        if 'inequality' not in values:
            raise stub.error("missing required key 'inequality'")
        cfg = cls(name, source=source, lines=lines, **values)
        cfg.validate()
        return cfg

    def validate(self):
        if self.inequality not in RECIPES:
            known = ', '.join(sorted(RECIPES))
            raise self.error(f"unknown inequality '{self.inequality}' "
                             f"(expected one of: {known})", 'inequality')
        recipe = RECIPES[self.inequality]
        try:
            kind = Kind.parse(self.model or recipe.model)
        except ConfigurationError as ex:
            raise self.error(ex.msg, 'model')
        if recipe.models and kind.value not in recipe.models:
            raise self.error(f"{self.inequality} runs on "
                             f"{', '.join(recipe.models)}, not {kind}",
                             'model')
        for h in self.h or ():
            try:
                dyadic_index(h)
            except ConfigurationError as ex:
                raise self.error(ex.msg, 'h')
        if self.h and any(b >= a for a, b in zip(self.h, self.h[1:])):
            raise self.error("scales must strictly decrease", 'h')
        if self.p is not None and self.p < 2:
            raise self.error(f"p must be >= 2, got {self.p}", 'p')
        if self.trials is not None and self.trials < 1:
            raise self.error(f"need at least one trial, got {self.trials}",
                             'trials')
        if self.cutoff is not None and not self.cutoff > 0:
            raise self.error(f"cutoff must be positive, got {self.cutoff}",
                             'cutoff')
        if self.times and any(not 0 < t <= 1 for t in self.times):
            raise self.error("sweep times must lie in (0, 1]", 'times')
        if self.lam0 and any(b <= a for a, b in zip(self.lam0,
                                                     self.lam0[1:])):
            raise self.error("lam0 must strictly increase", 'lam0')
        if self.denominator not in ('sobolev', 'l2'):
            raise self.error(f"denominator must be 'sobolev' or 'l2', got "
                             f"'{self.denominator}'", 'denominator')
        if self.family is not None:
            self.data_family({})

    @property
    def recipe(self):
        return RECIPES[self.inequality]

    def manifold(self):
        return ManifoldModel.make(self.model or self.recipe.model)

    @property
    def tolerance(self):
        if self.tol is not None:
            return self.tol
        return config.settings().probe.slope_tolerance

    @property
    def is_slow(self):
        if self.slow is not None:
            return self.slow
        return self.manifold().kind.value in self.recipe.slow

    def scales(self, default=(2 ** -1, 2 ** -2, 2 ** -3)):
        return tuple(self.h or default)

    @property
    def steps(self):
        """ Progress-bar length, when the config fixes it """
        for key in ('h', 'lam0', 'alphas', 'omega'):
            value = getattr(self, key)
            if value:
                return len(value)
        return None

    def data_family(self, default):
        """ The configured data family; section seed and trials fill in """
        spec = dict(self.family if self.family is not None else default)
        if 'name' not in spec:
            raise self.error("family needs a 'name'", 'family')
        name = spec.pop('name')
        try:
            params = {k: _number(v) for k, v in spec.items()}
        except (ValueError, TypeError) as ex:
            raise self.error(str(ex), 'family')
        cls = DataFamily.registry.get(name)
        accepts = {f.name for f in fields(cls)} if cls else set()
        if 'seed' in accepts:
            params.setdefault('seed', self.seed)
        if 'trials' in accepts and self.trials is not None:
            params['trials'] = self.trials
        try:
            return DataFamily.make(name, **params)
        except ConfigurationError as ex:
            raise self.error(ex.msg, 'family')

    @property
    def stem(self):
        return self.out or self.name


def _number(value):
    if isinstance(value, str):
        return aeval(value)
    return value


def _evaluate(key, value):
    if key in _LISTS:
        if not isinstance(value, (list, tuple)):
            value = [value]
        return tuple(float(_number(v)) for v in value)
    if key in _NUMBERS and value is not None:
        value = _number(value)
        if key in ('trials', 'seed', 'resolution'):
            if float(value) != int(value):
                raise ValueError(f"{key} must be an integer, got {value}")
            return int(value)
        return float(value)
    if key == 'family' and isinstance(value, str):
        return {'name': value}
    return value


def _key_lines(text):
    """ {section: {None: line, key: line}} from the YAML node tree """
    root = yaml.compose(text, Loader=yaml.SafeLoader)
    out = {}
    if not isinstance(root, yaml.MappingNode):
        return out
    for knode, vnode in root.value:
        keys = {None: knode.start_mark.line + 1}
        if isinstance(vnode, yaml.MappingNode):
            keys.update((k.value, k.start_mark.line + 1)
                        for k, _ in vnode.value)
        out[knode.value] = keys
    return out


def parse_experiments(text, source='<string>'):
    """ Parse experiment YAML text into a list of ExperimentConfig """
    try:
        data = loadyaml(text)
        lines = _key_lines(text)
    except yaml.YAMLError as ex:
        mark = getattr(ex, 'problem_mark', None)
        problem = getattr(ex, 'problem', None) or str(ex)
        raise ConfigurationError(f"malformed YAML: {problem}", source,
                                 mark.line + 1 if mark else None)
    if data is None:
        return []
    if not isinstance(data, dict):
        raise ConfigurationError("expected a mapping of named sections",
                                 source, 1)
    defaults = data.get('defaults') or {}
    if not isinstance(defaults, dict):
        raise ConfigurationError("'defaults' must be a mapping", source,
                                 lines.get('defaults', {}).get(None))
    configs = []
    for name, section in data.items():
        if name == 'defaults':
            continue
        section_lines = dict(lines.get('defaults', {}))
        section_lines.update(lines.get(name, {}))
        merged = dict(defaults)
        merged.update(section or {})
        configs.append(ExperimentConfig.from_mapping(
            str(name), merged, source, section_lines))
    log.debug("parsed %s experiments from %s", len(configs), source)
    return configs


def load_experiments(path):
    return parse_experiments(slurp(path), str(path))


def preset_experiments():
    """ Packaged presets, with same-named user sections replacing them """
    presets = {c.name: c for c in parse_experiments(
        config.packaged_text('experiments.yaml'), 'experiments.yaml')}
    user = config.user_dir() / 'experiments.yaml'
    if user.is_file():
        for cfg in load_experiments(user):
            presets[cfg.name] = cfg
    return list(presets.values())


@dataclass(frozen=True)
class Recipe:
    """ How one inequality id is run

    `models` restricts the models it accepts (empty means any compact
    model); `slow` names the models on which it only runs with --slow,
    by default T^3 and zonal S^3.
    """
    name: str
    command: str
    func: object
    model: str
    models: tuple = ()
    slow: tuple = ()


RECIPES = {}
_SLOW = (Kind.torus3.value, Kind.sphere3.value)


def recipe(name, command, model, models=(), slow=_SLOW):
    def register(func):
        RECIPES[name] = Recipe(name, command, func, model, tuple(models),
                               tuple(slow))
        return func
    return register


_COMPACT = tuple(k.value for k in Kind if k is not Kind.h3)
_SPHERES = (Kind.sphere2.value, Kind.sphere3.value)
_TORI = (Kind.circle.value, Kind.torus2.value, Kind.torus3.value)

# (p, beta) each model's maximal-function chain is run with by default: the
# flat tori use their lossless Strichartz exponents, the spheres the
# general-manifold estimate at p = 2(n+2)/n with loss 1/p.
_MAXIMAL_P = {Kind.circle: 6.0, Kind.torus2: 4.0, Kind.torus3: 8 / 3}


def _maximal_chain(cfg):
    model = cfg.manifold()
    p = cfg.p or _MAXIMAL_P.get(model.kind) or strichartz_exponent(model)
    if cfg.beta is not None:
        beta = cfg.beta
    elif model.kind in _MAXIMAL_P:
        beta = strichartz_loss(model, p)
    else:
        beta = 1 / p
    return model, p, beta


def _sobolev(trials=4, alpha=0.0):
    return {'name': 'sobolev', 'alpha': alpha, 'trials': trials}


def _series(cfg, model, p, family):
    return ScalingSeries(cfg.inequality, str(model), float(p),
                         family=family.describe())


def _strichartz_series(cfg, bar, model, p, threshold, default_family):
    family = cfg.data_family(default_family)
    series = _series(cfg, model, p, family)
    for h in cfg.scales():
        out = strichartz_ratio(model, h, family, p, cutoff=cfg.cutoff,
                               resolution=cfg.resolution)
        series = series.append(h, out.value, out.trials)
        bar()
    return [ExperimentReport.judge(series, threshold)], []


@recipe('strichartz_5_1', 'strichartz', 'circle', _COMPACT)
def run_strichartz_5_1(cfg, bar):
    """ ||e^{-it Delta} block||_p <~ h^(-1/p) ||block||_2, p = 2(n+2)/n """
    model = cfg.manifold()
    p = cfg.p or strichartz_exponent(model)
    beta = 1 / p if cfg.beta is None else cfg.beta
    threshold = Threshold('min', -beta, cfg.tolerance)
    return _strichartz_series(cfg, bar, model, p, threshold, _sobolev())


def _lossless(cfg, bar, default_p):
    model = cfg.manifold()
    p = cfg.p or default_p
    beta = strichartz_loss(model, p) if cfg.beta is None else cfg.beta
    threshold = Threshold('min', -beta, cfg.tolerance)
    return _strichartz_series(cfg, bar, model, p, threshold, _sobolev())


@recipe('torus_6_1', 'strichartz', 'torus2', (Kind.torus2.value,
                                              Kind.torus3.value))
def run_torus_6_1(cfg, bar):
    """ L^4 Strichartz on T^n with loss n/4 - 1/2 """
    return _lossless(cfg, bar, 4.0)


@recipe('torus_6_2', 'strichartz', 'circle', (Kind.circle.value,))
def run_torus_6_2(cfg, bar):
    """ L^6 Strichartz on the circle without loss """
    return _lossless(cfg, bar, 6.0)


@recipe('torus_6_3', 'strichartz', 'torus3', (Kind.torus3.value,))
def run_torus_6_3(cfg, bar):
    """ L^q Strichartz on T^3 without loss for q <= 8/3 """
    return _lossless(cfg, bar, 8 / 3)


@recipe('sphere_sharp_1_8', 'strichartz', 'sphere2', _SPHERES)
def run_sphere_sharp(cfg, bar):
    """ Sharp L^4 loss s_0(n) on spheres, attained by concentrating beams

    Highest-weight harmonics on S^2 grow like h^(-1/8); zonal harmonics on
    S^3 like h^(-1/4).
    """
    model = cfg.manifold()
    p = cfg.p or 4.0
    beta = strichartz_loss(model, p) if cfg.beta is None else cfg.beta
    threshold = Threshold('band', -beta, cfg.tolerance)
    beam = {'name': 'highest_weight'} if model.kind is Kind.sphere2 \
        else {'name': 'level_beam'}
    return _strichartz_series(cfg, bar, model, p, threshold, beam)


@recipe('maximal_5_2', 'maximal', 'torus2', _COMPACT)
def run_maximal_5_2(cfg, bar):
    """ ||T* block||_p <~ h^-alpha ||block||_2 """
    model, p, beta = _maximal_chain(cfg)
    alpha = cfg.alpha if cfg.alpha is not None \
        else maximal_exponent(model, p, beta)
    family = cfg.data_family(_sobolev())
    series = _series(cfg, model, p, family)
    for h in cfg.scales():
        out = maximal_ratio(model, h, family, p, cutoff=cfg.cutoff,
                            resolution=cfg.resolution)
        series = series.append(h, out.value, out.trials)
        bar()
    threshold = Threshold('min', -alpha, cfg.tolerance)
    notes = [f"beta={beta!r}", f"alpha={alpha!r}"]
    return [ExperimentReport.judge(series, threshold, notes)], []


@recipe('lemma_5_7', 'maximal', 'sphere2', _COMPACT)
def run_lemma_5_7(cfg, bar):
    """ ||T* block||_q against h^(-2/q - beta) ||block||_2 + ||block||_q

    The ratio stays bounded as h -> 0, so its slope is at least -tol.
    """
    model, q, beta = _maximal_chain(cfg)
    family = cfg.data_family(_sobolev())
    series = _series(cfg, model, q, family)
    for h in cfg.scales():
        table = scale_table(model, h, cfg.cutoff)
        grid = probe_grid(table, q, cfg.resolution)

        def measure(f):
            check = lemma52_check(f, h, q, beta, grid)
            return None if check.empty else check.ratio

        out = ensemble_max(measure, family.at_scale(h, table), table, None,
                           f"lemma_5_7 h={h!r}")
        series = series.append(h, out.value, out.trials)
        bar()
    threshold = Threshold('min', 0.0, cfg.tolerance)
    return [ExperimentReport.judge(series, threshold, [f"beta={beta!r}"])], []


@recipe('sphere_sec4', 'maximal', 'sphere2', _SPHERES)
def run_sphere_sec4(cfg, bar):
    """ The level-by-level T* bound on spheres, one cascade per trial """
    model = cfg.manifold()
    alpha = 0.6 if cfg.alpha is None else cfg.alpha
    constant = c_alpha(alpha, model.dim)
    cutoff = cfg.cutoff or 16.0
    table = enumerate_modes(model, cutoff)
    family = cfg.data_family(_sobolev(alpha=alpha))
    grid = probe_grid(table, 2, cfg.resolution)
    cascades = [sphere_triangle_bound(member, alpha, grid)
                for member in family.members(table)]
    bar()
    worst = max(c['total'].lhs / c['total'].rhs for c in cascades)
    series = _series(cfg, model, 2, family).append(1 / cutoff, worst,
                                                   len(cascades))
    failed = [i for i, c in enumerate(cascades) if not c.holds]
    notes = [f"alpha={alpha!r}", f"c_alpha={constant!r}"]
    if failed:
        notes.append(f"failing trials={failed}")
    report = ExperimentReport.judge(series, Threshold('ceiling', 1.0),
                                    notes, ok=not failed)

    def write(target):
        rows = ({'trial': i, **row} for i, c in enumerate(cascades)
                for row in c.rows())
        dumpcsv(target, rows, ['trial', 'step', 'lhs', 'rhs', 'margin',
                               'holds'], notes)

    return [report], [('cascade', write)]


@recipe('low_freq', 'maximal', 'circle', _COMPACT)
def run_low_freq(cfg, bar):
    """ ||T*(low block)||_q <= (sum ||e_j||_q^2)^(1/2) ||f||_2 """
    model = cfg.manifold()
    q = cfg.p or 4.0
    cutoff = cfg.cutoff or 4.0
    table = enumerate_modes(model, cutoff)
    family = cfg.data_family(_sobolev())
    out = low_frequency_bound(model, q, cutoff, family,
                              resolution=cfg.resolution)
    bar()
    constant = low_frequency_constant(table, q, probe_grid(
        table, q, cfg.resolution))
    # Enclosures may overshoot T* by tol in sup norm.
    slack = config.settings().maximal.tol * model.measure ** (1 / q)
    series = _series(cfg, model, q, family).append(1.0, out.value,
                                                   out.trials)
    threshold = Threshold('ceiling', constant, slack)
    return [ExperimentReport.judge(series, threshold,
                                   [f"cutoff={cutoff!r}"])], []


@recipe('lee_5_8', 'maximal', 'circle')
def run_lee_5_8(cfg, bar):
    """ sup|g| against the best Lee right-hand side for g = sin(omega t) """
    q = cfg.p or 2.0
    omegas = cfg.omega or (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)
    if any(b <= a for a, b in zip(omegas, omegas[1:])):
        raise cfg.error("omega must strictly increase", 'omega')
    series = ScalingSeries(cfg.inequality, 'interval', float(q),
                           family='sin(omega t)')
    for omega in omegas:
        series = series.append(1 / omega, lee_scan(omega, q).ratio)
        bar()
    notes = ["h column holds 1/omega"]
    return [ExperimentReport.judge(series, Threshold('ceiling', 3.0),
                                   notes)], []


def _smoothing(cfg, bar, s):
    lam0s = cfg.lam0 or (8.0, 16.0, 32.0, 64.0, 128.0)
    series = ScalingSeries(cfg.inequality, str(Kind.h3), 2.0,
                           family='bump_spectrum')
    for lam0 in lam0s:
        spectrum = bump_spectrum(lam0)
        value = smoothing_ratio(spectrum, cfg.radius, s, cfg.denominator)
        series = series.append(1 / lam0, value)
        bar()
    if cfg.denominator == 'l2':
        threshold = Threshold('band', -s, cfg.tolerance)
    else:
        threshold = Threshold('median', 2.0)
    notes = [f"s={s!r}", f"radius={cfg.radius!r}",
             f"denominator={cfg.denominator}", "h column holds 1/lam0"]
    return [ExperimentReport.judge(series, threshold, notes)], []


@recipe('smoothing_3_1', 'smoothing', 'h3', (Kind.h3.value,))
def run_smoothing_3_1(cfg, bar):
    """ ||u||_{L^2([0,1] x B_R)} <~ ||f||_{H^-1/2} """
    return _smoothing(cfg, bar, -0.5)


@recipe('smoothing_3_2', 'smoothing', 'h3', (Kind.h3.value,))
def run_smoothing_3_2(cfg, bar):
    """ ||Delta u||_{L^2([0,1] x B_R)} <~ ||f||_{H^3/2} """
    return _smoothing(cfg, bar, 1.5)


@recipe('sweep', 'sweep', 'circle', _COMPACT)
def run_sweep(cfg, bar):
    """ sup|u(t) - f| as t -> 0, side by side for each alpha """
    model = cfg.manifold()
    alphas = cfg.alphas or (0.2, 0.6)
    times = cfg.times or tuple(2.0 ** -k for k in range(9))
    cutoff = cfg.cutoff or 32.0
    family = cfg.data_family(_sobolev(trials=1))
    table = convergence_sweep(model, family, alphas, times, cutoff,
                              resolution=cfg.resolution)
    reports = []
    for alpha in alphas:
        series = ScalingSeries(cfg.inequality, str(model), float(alpha),
                               family=family.with_alpha(alpha).describe())
        rows = table.where(alpha)
        for t in times:
            hits = [r for r in rows if r.t == t]
            series = series.append(t, max(r.lo for r in hits), len(hits))
        notes = ["h column holds t; p_or_q holds alpha",
                 f"plateau={table.plateau(alpha)!r}"]
        reports.append(ExperimentReport.judge(
            series, Threshold('diagnostic', 0.0), notes,
            ok=table.consistent))
        bar()
    return reports, [('table', table.to_csv)]


def commands():
    """ Inequality ids grouped by the subcommand that runs them """
    out = {}
    for r in RECIPES.values():
        out.setdefault(r.command, []).append(r.name)
    return out


def run(configs, out_dir=None, slow=False, plot=False, progress=False,
        seed=None):
    """ Run experiments and write their reports

    Prints a one-line summary per judged series. Returns 0 if every check
    passed, 2 if any failed, 1 if any experiment raised an error.
    """
    pbar = partial(alive_bar, disable=not progress, enrich_print=False)
    failed = errored = False
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
    for cfg in configs:
        if seed is not None:
            cfg = replace(cfg, seed=int(seed))
        if cfg.is_slow and not slow:
            log.warning("skipping slow experiment '%s'; use --slow to run it",
                        cfg.name)
            continue
        log.info("running %s (%s)", cfg.name, cfg.inequality)
        try:
            with pbar(cfg.steps, title=cfg.name) as bar:
                reports, extras = cfg.recipe.func(cfg, bar)
        except SchrolabError as ex:
            if hasattr(ex, 'log'):
                ex.log()
            else:
                log.error("%s: %s", cfg.name, ex)
            print(f"{cfg.name}: error: {ex}")
            errored = True
            continue
        for report in reports:
            print(report.summary())
            failed = failed or not report.passed
        if out_dir is not None:
            write_reports(out_dir / f"{cfg.stem}.csv", reports)
            for suffix, write in extras:
                write(out_dir / f"{cfg.stem}_{suffix}.csv")
            if plot or cfg.plot:
                write_plot(out_dir / f"{cfg.stem}.svg", reports,
                           title=cfg.name)
    return 1 if errored else 2 if failed else 0
