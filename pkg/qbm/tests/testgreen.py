from unittest import TestCase
from unittest.mock import patch

import numpy as np

from parameterized import parameterized

from qbm.bath import BathSpec
from qbm.config import options
from qbm.exceptions import DomainError, NumericalFailure, OutOfRangeError
from qbm.green import (
    GreenTable, default_horizon, dehoog, green_asymptote, green_laplace, green_ohmic,
    inverse_laplace_check, solve_green, talbot, v_matrix
)
from qbm.util import read_csv


class TestGreenOhmic(TestCase):

    def test_values(self):
        g, g_dot, g_ddot = green_ohmic(2.0, 1.0)
        self.assertAlmostEqual(g, (1 - np.exp(-2)) / 2)
        self.assertAlmostEqual(g_dot, np.exp(-2))
        self.assertAlmostEqual(g_ddot, -2 * np.exp(-2))

    def test_initial_conditions(self):
        g, g_dot, _ = green_ohmic(0.3, np.array([0.0, 1.0]))
        self.assertEqual(g[0], 0)
        self.assertEqual(g_dot[0], 1)

    def test_negative_time(self):
        with self.assertRaises(DomainError):
            green_ohmic(1.0, -1.0)


class TestSolveGreen(TestCase):

    def test_strictly_ohmic_uses_closed_form(self):
        spec = BathSpec(p=1, zeta=1.5, beta=1, cutoff='none')
        table = solve_green(spec, 4, 256)
        expected = green_ohmic(1.5, table.t_grid)
        np.testing.assert_allclose(table.g, expected[0])
        np.testing.assert_allclose(table.g_ddot, expected[2])
        self.assertEqual(table.residual, 0)

    def test_large_cutoff_approaches_ohmic(self):
        # the cutoff shifts gamma_hat(z) by about (2/pi) (z/omega_c) log(omega_c/z)
        t = np.linspace(1, 5, 9)
        expected = green_ohmic(1.0, t)[0]
        deviation = {}
        for omega_c, n_steps in ((200, 4096), (1000, 8192)):
            table = solve_green(BathSpec(p=1, zeta=1, beta=1, omega_c=omega_c), 5, n_steps)
            deviation[omega_c] = np.max(np.abs(table(t)[0] / expected - 1))
        self.assertLess(deviation[1000], 1e-2)
        self.assertLess(deviation[1000], deviation[200] / 2)

    def test_second_order_convergence(self):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=50)
        t = np.array([0.5, 1.0, 1.5, 2.0])
        g = [solve_green(spec, 2, n)(t)[0] for n in (512, 1024, 2048)]
        order = np.log2(np.max(np.abs(g[0] - g[1])) / np.max(np.abs(g[1] - g[2])))
        self.assertTrue(1.8 <= order <= 2.2, order)

    @parameterized.expand([(0.5,), (1.0,), (1.5,)])
    def test_initial_conditions_and_residual(self, p):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=20)
        table = solve_green(spec, 5, 1024)
        self.assertEqual(table.g[0], 0)
        self.assertEqual(table.g_dot[0], 1)
        self.assertLessEqual(table.residual, options.residual_tol)
        self.assertEqual(table.horizon, 5)

    def test_default_horizon(self):
        spec = BathSpec(p=1, zeta=2, beta=1, omega_c=20)
        self.assertEqual(default_horizon(spec), 20)
        self.assertEqual(solve_green(spec, n_steps=64).horizon, 20)

    @parameterized.expand([(0.0, 128), (1.0, 63)])
    def test_bad_grid(self, t_max, n_steps):
        with self.assertRaises(DomainError):
            solve_green(BathSpec(omega_c=10), t_max, n_steps)

    def test_residual_failure(self):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=10)
        max_refinements = options.max_refinements
        options.max_refinements = 0
        try:
            with patch('qbm.green.volterra_residual', return_value=np.ones(65)):
                with self.assertRaises(NumericalFailure) as cm:
                    solve_green(spec, 1, 64)
        finally:
            options.max_refinements = max_refinements
        self.assertIsNotNone(cm.exception.residual)
        self.assertEqual(cm.exception.exit_code, 5)


class TestGreenTable(TestCase):

    def setUp(self):
        spec = BathSpec(p=1, zeta=1, beta=1, cutoff='none')
        self.table = solve_green(spec, 4, 512)

    def test_interpolation(self):
        g, g_dot, g_ddot = self.table(1.2345)
        expected = green_ohmic(1.0, 1.2345)
        self.assertAlmostEqual(float(g), expected[0], delta=1e-8)
        self.assertAlmostEqual(float(g_dot), expected[1], delta=1e-8)
        self.assertAlmostEqual(float(g_ddot), expected[2], delta=1e-8)

    @parameterized.expand([(-0.1,), (4.5,)])
    def test_out_of_range(self, t):
        with self.assertRaises(OutOfRangeError):
            self.table(t)

    def test_rejects_wrong_initial_conditions(self):
        t = self.table.t_grid
        with self.assertRaises(NumericalFailure):
            GreenTable(spec=self.table.spec, t_grid=t, g=self.table.g + 1,
                       g_dot=self.table.g_dot, g_ddot=self.table.g_ddot)

    def test_v_matrix_determinant(self):
        for t in (0.5, 1.0, 3.0):
            v = v_matrix(self.table, t)
            self.assertAlmostEqual(v.det_v, np.exp(-t), delta=1e-8)
            np.testing.assert_allclose(v.inverse @ v.v, np.eye(2), atol=1e-12)

    def test_v_matrix_layout(self):
        v = v_matrix(self.table, 1.0).v
        g, g_dot, g_ddot = green_ohmic(1.0, 1.0)
        np.testing.assert_allclose(v, [[g_dot, g], [g_ddot, g_dot]], atol=1e-8)


class TestAsymptote(TestCase):

    def test_ohmic_limit(self):
        spec = BathSpec(p=1, zeta=2, beta=1)
        self.assertAlmostEqual(green_asymptote(spec, 7.0), 0.5)

    def test_ohmic_ratio(self):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=100)
        table = solve_green(spec, 10, 2048)
        self.assertAlmostEqual(table.g[-1] / green_asymptote(spec, 10), 1, delta=1e-2)

    @parameterized.expand([(0.5,), (1.5,)])
    def test_ratio_approaches_one(self, p):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=20)
        table = solve_green(spec, 40, 8192)
        ratio = table.g / green_asymptote(spec, np.maximum(table.t_grid, table.step))
        self.assertLess(abs(ratio[-1] - 1), abs(ratio[len(ratio) // 2] - 1))

    def test_nonpositive_time(self):
        with self.assertRaises(DomainError):
            green_asymptote(BathSpec(), 0.0)


class TestLaplaceInversion(TestCase):

    @parameterized.expand([(0.5,), (2.0,), (6.0,)])
    def test_known_transform(self, t):
        self.assertAlmostEqual(talbot(lambda z: 1 / (z + 1), t), np.exp(-t), delta=1e-8)
        self.assertAlmostEqual(dehoog(lambda z: 1 / (z + 1), t), np.exp(-t), delta=1e-7)

    @parameterized.expand([('talbot',), ('dehoog',)])
    def test_strictly_ohmic(self, method):
        spec = BathSpec(p=1, zeta=1, beta=1, cutoff='none')
        t = np.array([1.0, 2.0, 3.0])
        np.testing.assert_allclose(inverse_laplace_check(spec, t, method=method),
                                   green_ohmic(1.0, t)[0], atol=1e-7)

    @parameterized.expand([(0.5, 'talbot'), (1.5, 'talbot'), (0.5, 'dehoog'),
                           (1.5, 'dehoog')])
    def test_matches_solve_green(self, p, method):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=20)
        table = solve_green(spec, 4, 4096)
        t = np.linspace(0.5, 4, 8)
        inverted = inverse_laplace_check(spec, t, threads=2, method=method)
        np.testing.assert_allclose(inverted, table(t)[0], atol=1e-4)

    @parameterized.expand([('talbot',), ('dehoog',)])
    def test_large_cutoff(self, method):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=200)
        table = solve_green(spec, 5, 8192)
        t = np.linspace(1, 5, 8)
        inverted = inverse_laplace_check(spec, t, threads=2, method=method)
        np.testing.assert_allclose(inverted, table(t)[0], atol=1e-4)

    def test_talbot_stable_in_node_count(self):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=200)
        transform = lambda z: green_laplace(spec, z)  # noqa
        values = [talbot(transform, 5.0, nodes=n) for n in (20, 24, 28)]
        self.assertLess(np.ptp(values), 1e-5)

    def test_continued_transform_is_continuous(self):
        # across the imaginary axis the rotated ray must stay on one sheet
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=20)
        left = green_laplace(spec, -1e-7 + 3j)
        right = green_laplace(spec, 1e-7 + 3j)
        self.assertLess(abs(left - right), 1e-6 * abs(right))

    def test_nonpositive_time(self):
        with self.assertRaises(DomainError):
            inverse_laplace_check(BathSpec(), [0.0])

    def test_unknown_method(self):
        with self.assertRaises(DomainError):
            inverse_laplace_check(BathSpec(), [1.0], method='stehfest')


def test_green_csv(tmp_path):
    spec = BathSpec(p=1, zeta=1, beta=1, omega_c=20)
    table = solve_green(spec, 2, 128)
    path = table.to_csv(str(tmp_path / 'green.csv'),
                        extra_columns={'G_talbot': np.full(129, np.nan)})
    with open(path) as f:
        assert f.readline().startswith('# qbm ')
    df = read_csv(path)
    assert list(df.columns) == ['t', 'G', 'Gdot', 'Gddot', 'G_talbot']
    assert len(df) == 129
    np.testing.assert_allclose(df.G, table.g, rtol=1e-10)

