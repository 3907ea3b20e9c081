"""
Tests the HoloViews views of the qbm tables
"""
import holoviews as hv
import numpy as np
import pandas as pd

from holoviews.element.comparison import ComparisonTestCase

from qbm.bath import BathSpec
from qbm.decoherence import Figure1Study, LocalizationReport
from qbm.green import solve_green
from qbm.moments import compute_moments
from qbm.phase_space import GaussianState, GridSpec, cat_wigner, gaussian_wigner
from qbm.plotting import criterion_trace, figure1_plot, green_curves, moment_curves, wigner_image


def _plot_opts(element):
    return hv.Store.lookup_options('bokeh', element, 'plot').kwargs


class TestTableViews(ComparisonTestCase):

    @classmethod
    def setUpClass(cls):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=10)
        cls.green = solve_green(spec, 2, 256)
        cls.series = compute_moments(cls.green, decimation=16)

    def test_green_curves(self):
        plot = green_curves(self.green)
        self.assertIsInstance(plot, hv.Overlay)
        self.assertEqual([c.label for c in plot], ['G', 'Gdot', 'Gddot'])
        self.assertEqual(plot.Curve.G.dimension_values('G'), self.green.g)

    def test_moment_curves(self):
        plot = moment_curves(self.series)
        self.assertEqual(len(plot), 3)
        self.assertEqual(plot.Curve.A.dimension_values('t'), self.series.t_grid)


class TestCriterionTrace(ComparisonTestCase):

    def _report(self, t_c):
        times = np.linspace(0, 4, 41)
        return LocalizationReport(t_c=t_c, times=times, min_eig_series=times - 2,
                                  horizon=4.0)

    def test_marks_localization_time(self):
        plot = criterion_trace(self._report(2.0))
        lines = [el for el in plot if isinstance(el, hv.VLine)]
        self.assertEqual(len(lines), 1)
        self.assertEqual(lines[0].data, 2.0)

    def test_without_localization_time(self):
        plot = criterion_trace(self._report(None))
        self.assertEqual(len(plot), 2)
        self.assertFalse(any(isinstance(el, hv.VLine) for el in plot))


class TestWignerImage(ComparisonTestCase):

    def setUp(self):
        self.grid = GridSpec(n_x=64, n_p=64, x_min=-8, x_max=8, p_min=-6, p_max=6)

    def test_bounds(self):
        image = wigner_image(gaussian_wigner(GaussianState.vacuum(), self.grid))
        self.assertEqual(image.bounds.lbrt(), (-8, -6, 8, 6))
        self.assertEqual([d.name for d in image.kdims], ['x', 'p'])

    def test_symmetric_color_limits(self):
        w = cat_wigner(2.0, 0.5 * np.eye(2), self.grid)
        clim = _plot_opts(wigner_image(w))['clim']
        self.assertEqual(clim[0], -clim[1])
        self.assertAlmostEqual(clim[1], np.abs(w.values).max())

    def test_orientation(self):
        state = GaussianState(d=(3, 2), sigma=0.5 * np.eye(2))
        image = wigner_image(gaussian_wigner(state, self.grid))
        self.assertGreater(image[3, 2], image[-3, 2])
        self.assertGreater(image[3, 2], image[3, -2])


class TestFigure1Plot(ComparisonTestCase):

    def test_fit_line(self):
        zetas = np.logspace(-1, 1, 5)
        table = pd.DataFrame({'zeta': zetas, 'log10_zeta': np.log10(zetas),
                              'Tc': 1.42 / zetas, 'log10_Tc': np.log10(1.42 / zetas)})
        plot = figure1_plot(Figure1Study(table=table, slope=-1.0, tau_c=1.42))
        scatter, = [el for el in plot if isinstance(el, hv.Scatter)]
        curve, = [el for el in plot if isinstance(el, hv.Curve)]
        self.assertEqual(len(scatter), 5)
        line = curve.dimension_values('log10_Tc')
        self.assertEqual(line, np.log10(1.42) + np.array([1.0, -1.0]))
