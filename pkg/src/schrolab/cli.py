"""Spectral experiments on Schrodinger evolution over model manifolds

Usage: schrolab [--help] [options] <command> [<args>...]

To see command-specific help, run `schrolab <command> --help`

Commands:
    spectra             Dump a mode table as CSV
    evolve              Dump space-time samples of a field as CSV
    maximal             Run maximal-function experiments, or certify T*f(x)
    strichartz          Run Strichartz experiments
    smoothing           Run local smoothing experiments on H^3
    sweep               Run convergence sweeps as t -> 0
    run                 Run every experiment in a config file
    report              Summarize and re-plot report CSVs
    dirs                Print directory paths used by schrolab

Options:
    -V, --version       Print version and exit

    The following options are accepted by (almost) all commands:

    -h, --help          Print this help
    -q, --quiet         Quiet output
    -v, --verbose       Verbose output
    -D, --debug         Even more verbose output
    --pdb               Start interactive debugger on crash

Models:
    circle, torus2, torus3, sphere2, sphere3 (zonal), h3 (radial)

Exit status is 0 when every inequality check passes, 2 when some check
fails, and 1 on errors.

Examples:
    $ schrolab spectra sphere2 4
    $ schrolab strichartz -o results --plot
    $ schrolab run -c experiments.yaml -o results --slow
"""

import sys
import logging
import logging.config
import math
import os
import pdb
import textwrap
from datetime import datetime
from inspect import getdoc
from textwrap import dedent

import numpy as np
from addict import Dict
from appdirs import AppDirs
from docopt import docopt

from . import util, config, experiment
from .evolve import sample
from .exceptions import ConfigurationError, SchrolabError
from .fields import DataFamily, SpectralField
from .maximal import certified_sup
from .report import plot_file, read_reports, summarize
from .spectra import enumerate_modes, grid_for

try:
    from .version import version
except ImportError:
    version = 'UNKNOWN'

log = logging.getLogger(__name__)

try:
    # Do the right thing when piping to head, etc.
    from signal import signal, SIGPIPE, SIG_DFL
    signal(SIGPIPE, SIG_DFL)
except ImportError:
    # No SIGPIPE on Windows.
    pass


def _number(text):
    try:
        return util.aeval(text, {'pi': math.pi})
    except ValueError as ex:
        raise ConfigurationError(str(ex))


def _family(name, params):
    """ Build a data family from `key=value` strings """
    kwargs = {}
    for param in params:
        key, sep, value = param.partition('=')
        if not sep:
            raise ConfigurationError(f"expected key=value, got '{param}'")
        kwargs[key.strip()] = _number(value)
    return DataFamily.make(name, **kwargs)


def _field(args):
    """ The field an evolve or maximal command works on """
    if args.field:
        return SpectralField.from_csv(args.field)
    table = enumerate_modes(args.model, float(_number(args.cutoff)))
    family = _family(args.family, args.param)
    return family.member(table, int(args.trial))


def cmd_spectra(args):
    """ Dump a mode table

    Usage: schrolab spectra [options] <model> <cutoff>

    Arguments:
        model     Model manifold (circle, torus2, sphere2, ...)
        cutoff    Largest lambda to include

    Options:
        -o, --out PATH      Write CSV here instead of stdout

        -h, --help          Print this help
        -v, --verbose       Verbose output
        -q, --quiet         Quiet output
        -D, --debug         Even more verbose output
        --pdb               Start interactive debugger on crash

    Columns are id, eigenvalue (lambda^2), quantum_numbers, level and the
    full multiplicity of the eigenvalue.
    """
    table = enumerate_modes(args.model, float(_number(args.cutoff)))
    table.to_csv(args.out or sys.stdout)


def cmd_evolve(args):
    """ Dump space-time samples of a field

    Usage: schrolab evolve [options] (<model> <cutoff> | --field PATH) [<param>...]

    Arguments:
        model     Model manifold
        cutoff    Largest lambda in the mode table
        param     Family parameters as key=value, e.g. alpha=0.6 seed=3

    Options:
        -f, --family NAME   Data family [default: sobolev]
        --trial N           Ensemble member to use [default: 0]
        --field PATH        Read coefficients from a field CSV instead
        -t, --times N       Number of time nodes in [0, 1] [default: 5]
        -c, --coeffs PATH   Also write the field's coefficients here
        -o, --out PATH      Write CSV here instead of stdout

        -h, --help          Print this help
        -v, --verbose       Verbose output
        -q, --quiet         Quiet output
        -D, --debug         Even more verbose output
        --pdb               Start interactive debugger on crash

    Samples are taken on the smallest quadrature grid admissible for the
    field's mode table.
    """
    f = _field(args)
    if args.coeffs:
        f.to_csv(args.coeffs)
    count = int(args.times)
    if count < 1:
        raise ConfigurationError(f"need at least one time node, got {count}")
    times = np.linspace(0.0, 1.0, count)
    sample(f, times, grid_for(f.table)).to_csv(args.out or sys.stdout)


def _experiments(args, command=None):
    """ Run the configured experiments belonging to a command """
    configs = (experiment.load_experiments(args.config) if args.config
               else experiment.preset_experiments())
    if command is not None:
        wanted = set(experiment.commands()[command])
        configs = [c for c in configs if c.inequality in wanted]
    if args.section:
        known = {c.name: c for c in configs}
        missing = [s for s in args.section if s not in known]
        if missing:
            raise ConfigurationError(f"no experiment named "
                                     f"{', '.join(missing)}")
        configs = [known[s] for s in args.section]
    if not configs:
        log.warning("no experiments to run")
    status = experiment.run(configs, out_dir=args.out, slow=args.slow,
                            plot=args.plot, progress=args.progress,
                            seed=args.seed)
    if status:
        sys.exit(status)


_EXPERIMENT_OPTIONS = """
    Arguments:
        section   Names of experiment sections to run (default: all)

    Options:
        -c, --config PATH   Experiment config (default: the built-in presets)
        -o, --out DIR       Write report CSVs (and plots) to DIR
        --seed N            Override every section's seed
        --plot              Also write an SVG log-log plot per section
        --slow              Include experiments marked slow
        -P, --progress      Show progress bars

        -h, --help          Print this help
        -v, --verbose       Verbose output
        -q, --quiet         Quiet output
        -D, --debug         Even more verbose output
        --pdb               Start interactive debugger on crash
"""


def cmd_maximal(args):
    """ Run maximal-function experiments, or certify T*f at one point

    Usage:
        schrolab maximal [options] [<section>...]
        schrolab maximal [options] --at POINT (<model> <cutoff> | --field PATH) [<param>...]

    With --at, prints a certified enclosure of sup over t in (0, 1] of
    |u(t, x)| at the comma-separated chart point (`pi` is accepted), for a
    member of --family or a field read from --field.

    Inequalities: maximal_5_2, lemma_5_7, sphere_sec4, low_freq, lee_5_8.

    Point options:
        --at POINT          Chart coordinates, e.g. pi or 1.2,0.5
        -f, --family NAME   Data family [default: sobolev]
        --trial N           Ensemble member to use [default: 0]
        --field PATH        Read coefficients from a field CSV
        --tol TOL           Enclosure width
    """
    if not args.at:
        return _experiments(args, 'maximal')
    f = _field(args)
    point = [float(_number(c)) for c in args.at.split(',')]
    tol = float(_number(args.tol)) if args.tol else None
    enclosure = certified_sup(f, point, tol)
    print(f"T*f({args.at}) in {enclosure!r} (width {enclosure.width:.3g})")


def cmd_strichartz(args):
    """ Run Strichartz experiments

    Usage: schrolab strichartz [options] [<section>...]

    Inequalities: strichartz_5_1, torus_6_1, torus_6_2, torus_6_3,
    sphere_sharp_1_8.
    """
    _experiments(args, 'strichartz')


def cmd_smoothing(args):
    """ Run local smoothing experiments on H^3

    Usage: schrolab smoothing [options] [<section>...]

    Inequalities: smoothing_3_1, smoothing_3_2.
    """
    _experiments(args, 'smoothing')


def cmd_sweep(args):
    """ Run convergence sweeps

    Usage: schrolab sweep [options] [<section>...]

    Tabulates sup |u(t, x) - f(x)| as t decreases to 0, for rough and
    smooth data side by side.
    """
    _experiments(args, 'sweep')


def cmd_run(args):
    """ Run every experiment in a config file

    Usage: schrolab run [options] [<section>...]

    Runs the sections of every command, slow ones only with --slow.
    """
    _experiments(args)


# The experiment commands share one options block.
for _cmd in (cmd_maximal, cmd_strichartz, cmd_smoothing, cmd_sweep, cmd_run):
    _cmd.__doc__ += textwrap.indent(dedent(_EXPERIMENT_OPTIONS), '    ')


def cmd_report(args):
    """ Summarize report CSVs

    Usage: schrolab report [options] <csv>...

    Options:
        --plot              Re-render an SVG next to each CSV

        -h, --help          Print this help
        -v, --verbose       Verbose output
        -q, --quiet         Quiet output
        -D, --debug         Even more verbose output
        --pdb               Start interactive debugger on crash

    Prints one line per series: the fitted slope, the threshold it was
    judged against, and the verdict.
    """
    for path in args.csv:
        _, rows = read_reports(path)
        for line in summarize(rows):
            print(line)
        if args.plot:
            root, _ = os.path.splitext(path)
            plot_file(path, root + '.svg')


def cmd_dirs(args):  # pylint: disable=unused-argument
    """ Print schrolab directory paths

    Usage: schrolab dirs [--help]

    Schrolab reads user overrides of schrolab.yaml, logging.yaml and
    experiments.yaml from a per-user config directory that varies between
    platforms; SCHROLAB_CONFIG_DIR replaces it. This command prints the
    directories in use on your current platform.
    """
    ad = AppDirs("schrolab")  # pylint: disable=invalid-name
    out = f"""
        config:     {config.user_dir()}
        default:    {ad.user_config_dir}
        workers:    {config.workers()}
        """
    print(dedent(out).strip())


class Args(Dict):
    """ Convenience wrapper for the docopt dict

    Lets commands read `args.out`, `args.model` or `args.tol` whether docopt
    keyed the value as a command, an option or a positional.
    """

    keyfmts = ['{key}',
               '-{key}',
               '--{key}',
               '<{key}>']

    def _realkey(self, key):
        # Look for the first key-variant that's present, otherwise use the
        # original key.
        for fmt in type(self).keyfmts:
            realkey = fmt.format(key=key)
            if realkey in self:
                return realkey
        return key

    def __getitem__(self, key):
        key = self._realkey(key)
        return super().__getitem__(key)

    def __setitem__(self, key, value):
        key = self._realkey(key)
        super().__setitem__(key, value)


def initlog(args):
    """ Set up logging """
    key = ('debug' if args.debug
           else 'verbose' if args.verbose
           else 'quiet' if args.quiet
           else 'default')
    logconf = config.load('logging.yaml')
    logging.config.dictConfig(logconf[key])


def main(argv=None):
    """ Entry point for schrolab."""
    ts_start = datetime.now()
    args = Args(docopt(__doc__.strip(), argv,
                version=version, options_first=True))
    initlog(args)
    util.debug_structure(dict(args.items()))

    expected = (FileNotFoundError, SchrolabError)

    try:
        cmd = globals().get(f'cmd_{args.command}')
        if not cmd:
            log.critical("'%s' is not a valid command; see schrolab --help",
                         args.command)
            sys.exit(1)
        args = Args(docopt(getdoc(cmd), argv, version=version))
        if args.debug:
            expected = ()  # dump all exceptions in debug mode
        initlog(args)  # because log opts may come before or after the command
        cmd(args)
        log.debug("total running time: %s", datetime.now()-ts_start)
    except KeyboardInterrupt:
        log.error("keyboard interrupt; aborting")
        sys.exit(1)
    except expected as ex:
        # Let exceptions provide an extended message.
        if hasattr(ex, 'log'):
            ex.log()
        else:
            log.error(ex)
        sys.exit(1)
    except Exception as ex:  # pylint: disable=broad-except
        log.exception(ex)
        if not args.pdb:
            sys.exit(1)
        print("\n\nCRASH -- UNHANDLED EXCEPTION")
        msg = ("Starting debugger post-mortem. If you got here by "
               "accident (perhaps by trying to see what --pdb does), "
               "you can get out with 'quit'.\n\n")
        print("\n{}\n\n".format("\n".join(textwrap.wrap(msg))))
        pdb.post_mortem()
        sys.exit(1)
