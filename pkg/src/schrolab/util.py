""" Various utility functions used in schrolab."""

import csv
import contextlib
import io
import logging
import os
import tempfile
from functools import lru_cache, partial
from pathlib import Path

import asteval
import jinja2
import yaml

log = logging.getLogger(__name__)


# Fixed line terminator: repeated runs give byte-identical files everywhere.
class CSV(csv.Dialect):
    delimiter = ','
    lineterminator = '\n'
    quoting = csv.QUOTE_MINIMAL
    doublequote = True
    quotechar = '"'
    strict = True
csv.register_dialect('sl_csv', CSV)
CSVReader = partial(csv.DictReader, dialect='sl_csv')
CSVWriter = partial(csv.DictWriter, dialect='sl_csv')


def cache(function):
    """ Simple unbounded cache decorator

    Backport of functools.cache. Here to avoid dependency on 3.9+.
    """
    return lru_cache(maxsize=None)(function)


def fmt(value):
    """ Format a value for CSV output

    Floats use repr(), which is the shortest string that round-trips, so the
    same number always prints the same way. Tuples of quantum numbers are
    semicolon-joined.
    """
    if hasattr(value, 'tolist'):  # numpy scalars and arrays
        return fmt(value.tolist())
    if isinstance(value, bool):
        return 'pass' if value else 'fail'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ';'.join(fmt(v) for v in value)
    return str(value)


@contextlib.contextmanager
def flexopen(target, mode=None, *args, **kwargs):
    """ 'Open' a path or file object with a unified interface

    `target` may be a string, Path object, or open file. Any additional
    arguments will be passed to the underlying open() call. Returns the opened
    file object.

    If flexopen opens a file, it will close it on exit. If passed an
    already-opened file, it will leave it open -- the assumption is that
    whoever opened it will close it when needed.
    """
    if isinstance(target, io.IOBase):
        yield target
    else:
        if isinstance(target, str):
            target = Path(target)
        mode = mode or 'r'
        with target.open(mode, *args, **kwargs) as f:
            yield f


@contextlib.contextmanager
def atomic_open(path, mode='w', **kwargs):
    """ Open a temporary file that replaces `path` on successful close

    Readers never see a half-written file; on error the temp file is
    removed and any existing `path` is left alone.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f'.{path.name}.', dir=path.parent)
    try:
        with os.fdopen(fd, mode, **kwargs) as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def dumpcsv(target, rows, headers=None, comments=()):
    """ Dump an iterable of mappings to a csv file

    `target` may be a string, Path, or open file object. Paths are written
    atomically. `comments` are written first as `# ` lines (metadata
    headers). Values are formatted with fmt().
    """
    rows = list(rows)
    headers = list(headers or (rows[0].keys() if rows else []))

    def write(f):
        for line in comments:
            f.write(f"# {line}\n")
        writer = CSVWriter(f, headers)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: fmt(v) for k, v in row.items()})

    if isinstance(target, io.IOBase):
        write(target)
    else:
        with atomic_open(target, newline='') as f:
            write(f)
    log.debug("wrote %s csv rows to %s", len(rows), target)


def readcsv(infile):
    """ Read in a csv file, skipping `#` metadata lines

    Returns (metadata, rows), where metadata is a dict parsed from
    `# key=value` comment lines.
    """
    with flexopen(infile, newline='') as f:
        lines = f.read().splitlines()
    meta = {}
    body = []
    for line in lines:
        if line.startswith('#'):
            key, _, value = line[1:].strip().partition('=')
            if _:
                meta[key.strip()] = value.strip()
        else:
            body.append(line)
    return meta, list(CSVReader(body))


def loadyaml(data):
    # Just so I don't have to remember the extra argument everywhere.
    # Should take anything yaml.load will take.
    return yaml.load(data, Loader=yaml.SafeLoader)


def slurp(path, *args, **kwargs):
    with flexopen(path, *args, **kwargs) as f:
        return f.read()


def aeval(expr, context=None):
    """ Safely evaluate a numeric expression such as '2**-3' or '3/4' """
    interpreter = asteval.Interpreter(symtable=dict(context or {}),
                                      minimal=True)
    result = interpreter.eval(expr, show_errors=False)
    if interpreter.error:
        msg = interpreter.error[0].get_error()[1]
        raise ValueError(f"can't evaluate '{expr}': {msg.strip()}")
    return result


def debug_structure(data, loglevel=logging.DEBUG):
    """ yamlize a data structure and log it as debug """
    for line in yaml.dump(data).splitlines():
        log.log(loglevel, line)


@cache
def jinja_env():
    env = jinja2.Environment(
            loader=jinja2.PackageLoader('schrolab'),
            finalize=lambda obj: "" if obj is None else obj,
            autoescape=jinja2.select_autoescape(
                ["svg", "svg.j2", "xml", "html"]),
            keep_trailing_newline=True,
            )
    return env


def jrender(_template, **kwargs):
    return jinja_env().get_template(_template).render(**kwargs)
