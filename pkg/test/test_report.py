import io
import unittest
from pathlib import Path
from tempfile import TemporaryDirectory

from schrolab import report
from schrolab.probe import ExperimentReport, ScalingSeries, Threshold
from schrolab.report import Line, read_reports, render_plot, summarize


def sample_reports():
    first = ScalingSeries.from_pairs([(1/2, 1.0), (1/4, 1.5), (1/8, 2.25)],
                                     'maximal_5_2', 'torus2', 4.0, 'sobolev')
    second = ScalingSeries.from_pairs([(1.0, 0.5)], 'low_freq', 'circle', 4.0)
    return [ExperimentReport.judge(first, Threshold('min', -1.0, 0.05),
                                   ['alpha=0.75']),
            ExperimentReport.judge(second, Threshold('ceiling', 1.0))]


class TestReportFiles(unittest.TestCase):
    def test_write_and_read(self):
        with TemporaryDirectory() as tmp:
            path = Path(tmp, 'out.csv')
            report.write_reports(path, sample_reports())
            _, rows = read_reports(path)
        self.assertEqual(len(rows), 4)
        self.assertEqual(list(rows[0]), report.COLUMNS)
        self.assertEqual(rows[3]['slope'], '')
        self.assertEqual(rows[0]['pass'], 'pass')

    def test_not_a_report(self):
        source = io.StringIO("a,b\n1,2\n")
        self.assertRaises(ValueError, read_reports, source)

    def test_summarize(self):
        out = io.StringIO()
        report.write_reports(out, sample_reports())
        out.seek(0)
        _, rows = read_reports(out)
        lines = list(summarize(rows))
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[0].startswith('maximal_5_2 torus2 p=4.0:'
                                            ' slope -0.5850 over 3 scales'))
        self.assertTrue(lines[0].endswith(': pass'))
        self.assertEqual(lines[1], 'low_freq circle p=4.0: over 1 scales '
                                   'vs value <= 1.0 + 0.0: pass')


class TestPlots(unittest.TestCase):
    def test_lines(self):
        lines = report.lines_from_reports(sample_reports())
        self.assertEqual(lines[0].label, 'maximal_5_2 torus2 p=4.0')
        self.assertEqual(lines[0].points, [(0.5, 1.0), (0.25, 1.5),
                                           (0.125, 2.25)])

    def test_axes(self):
        axes = report.LogAxes([Line('a', [(0.5, 1.0), (0.125, 4.0)])])
        self.assertEqual(axes.x(2.0 ** axes.x0), axes.left)
        self.assertEqual(axes.x(2.0 ** axes.x1), axes.width - axes.right)
        self.assertEqual(axes.y(2.0 ** axes.y0), axes.height - axes.bottom)
        self.assertEqual(axes.polyline([(0.5, 0.0), (0.0, 1.0)]), '')

    def test_render(self):
        svg = render_plot([Line('a<b', [(0.5, 1.0), (0.25, 2.0)]),
                           Line('empty', [])], title='t & u')
        self.assertTrue(svg.startswith('<svg'))
        self.assertEqual(svg.count('<polyline'), 2)
        self.assertIn('a&lt;b', svg)
        self.assertIn('t &amp; u', svg)

    def test_plot_file(self):
        with TemporaryDirectory() as tmp:
            source = Path(tmp, 'out.csv')
            target = Path(tmp, 'out.svg')
            report.write_reports(source, sample_reports())
            report.plot_file(source, target)
            self.assertIn('maximal_5_2 torus2 p=4.0', target.read_text())
