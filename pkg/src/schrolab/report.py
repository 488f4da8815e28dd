""" Report CSV files and their log-log plots """

import logging
import math
from collections import namedtuple
from itertools import groupby

from .util import atomic_open, dumpcsv, jrender, readcsv

log = logging.getLogger(__name__)

COLUMNS = ['inequality_id', 'model', 'h', 'p_or_q', 'trials', 'value',
           'slope', 'r2', 'threshold', 'pass']
COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#17becf']

Line = namedtuple('Line', 'label points')
Tick = namedtuple('Tick', 'pos label')


def write_reports(target, reports):
    """ Every report's rows in one CSV; families and notes go in the header """
    comments = []
    for report in reports:
        tag = f"{report.inequality} p={report.series.p!r}"
        comments.append(f"{tag} family={report.series.family}")
        comments.extend(f"{tag} {note}" for note in report.notes)
    rows = [row for report in reports for row in report.rows()]
    dumpcsv(target, rows, COLUMNS, comments)


def read_reports(source):
    """ (header comments, rows) of a report CSV """
    meta, rows = readcsv(source)
    missing = set(COLUMNS) - set(rows[0] if rows else COLUMNS)
    if missing:
        raise ValueError(f"{source} is not a report file "
                         f"(missing {', '.join(sorted(missing))})")
    return meta, rows


def _key(row):
    return (row['inequality_id'], row['model'], row['p_or_q'])


def lines_from_rows(rows):
    """ One plot line per (inequality, model, p) in a report file """
    out = []
    for (ineq, model, p), group in groupby(rows, _key):
        points = [(float(r['h']), float(r['value'])) for r in group]
        out.append(Line(f"{ineq} {model} p={p}", points))
    return out


def lines_from_reports(reports):
    return [Line(f"{r.inequality} {r.series.model} p={r.series.p!r}",
                 list(zip(r.series.hs.tolist(), r.series.values.tolist())))
            for r in reports]


def summarize(rows):
    """ One line per series: fitted slope, threshold and verdict """
    for (ineq, model, p), group in groupby(rows, _key):
        group = list(group)
        last = group[-1]
        slope = f" slope {float(last['slope']):.4f}" if last['slope'] else ''
        yield (f"{ineq} {model} p={p}:{slope} over {len(group)} scales "
               f"vs {last['threshold']}: {last['pass']}")


def _log_ticks(lo, hi):
    """ Power-of-two ticks covering [lo, hi], at most about eight of them """
    a, b = math.floor(math.log2(lo)), math.ceil(math.log2(hi))
    if a == b:
        a, b = a - 1, b + 1
    step = max(1, math.ceil((b - a) / 8))
    return a, b, list(range(a, b + 1, step))


class LogAxes:
    """ Maps (h, value) pairs to SVG coordinates on log2 axes """
    width, height = 640, 420
    left, right, top, bottom = 70, 20, 40, 50

    def __init__(self, lines):
        hs = [h for line in lines for h, v in line.points if h > 0 and v > 0]
        vs = [v for line in lines for h, v in line.points if h > 0 and v > 0]
        if not hs:
            hs, vs = [0.5, 1.0], [0.5, 1.0]
        self.x0, self.x1, xt = _log_ticks(min(hs), max(hs))
        self.y0, self.y1, yt = _log_ticks(min(vs), max(vs))
        self.xticks = [Tick(self.x(2.0 ** k), f"2^{k}") for k in xt]
        self.yticks = [Tick(self.y(2.0 ** k), f"2^{k}") for k in yt]

    @property
    def plot_width(self):
        return self.width - self.left - self.right

    @property
    def plot_height(self):
        return self.height - self.top - self.bottom

    def x(self, h):
        frac = (math.log2(h) - self.x0) / (self.x1 - self.x0)
        return round(self.left + frac * self.plot_width, 2)

    def y(self, value):
        frac = (math.log2(value) - self.y0) / (self.y1 - self.y0)
        return round(self.top + (1 - frac) * self.plot_height, 2)

    def polyline(self, points):
        return ' '.join(f"{self.x(h)},{self.y(v)}" for h, v in points
                        if h > 0 and v > 0)


def render_plot(lines, title=''):
    axes = LogAxes(lines)
    series = [{'label': line.label,
               'color': COLORS[i % len(COLORS)],
               'points': axes.polyline(line.points)}
              for i, line in enumerate(lines)]
    return jrender('loglog.svg.j2', axes=axes, series=series, title=title)


def write_plot(target, reports, title=''):
    with atomic_open(target) as f:
        f.write(render_plot(lines_from_reports(reports), title))
    log.info("wrote plot %s", target)


def plot_file(source, target, title=None):
    """ Re-render the plot of an existing report CSV """
    _, rows = read_reports(source)
    with atomic_open(target) as f:
        f.write(render_plot(lines_from_rows(rows), title or str(source)))
    log.info("wrote plot %s", target)
