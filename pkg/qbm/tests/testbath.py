from unittest import TestCase

import numpy as np
import pytest

from parameterized import parameterized
from scipy import integrate, special

from qbm.bath import (
    BathSpec, coth, damping_kernel, damping_laplace, default_omega_c, imag_gamma_tilde,
    integrated_damping_kernel, kernel_table, noise_kernel, noise_kernel_table,
    real_gamma_tilde, real_gamma_tilde_oracle, spectral_density
)
from qbm.exceptions import DomainError, UnsupportedConfigurationError


class TestBathSpec(TestCase):

    def test_default_cutoff(self):
        spec = BathSpec(p=1, zeta=2, beta=0.1)
        self.assertEqual(spec.omega_c, default_omega_c(1, 2, 0.1))
        self.assertEqual(spec.omega_c, 500)

    def test_explicit_cutoff(self):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=20)
        self.assertEqual(spec.omega_c, 20)

    def test_strictly_ohmic(self):
        spec = BathSpec(p=1, zeta=1, beta=1, cutoff='none')
        self.assertTrue(spec.strictly_ohmic)
        self.assertEqual(spec.omega_c, np.inf)

    def test_no_cutoff_requires_ohmic(self):
        with self.assertRaises(UnsupportedConfigurationError):
            BathSpec(p=0.5, zeta=1, beta=1, cutoff='none')

    @parameterized.expand([('p', 0), ('p', 2), ('zeta', 0), ('beta', -1)])
    def test_out_of_bounds(self, name, value):
        with self.assertRaises(ValueError):
            BathSpec(**{name: value})

    def test_immutable(self):
        spec = BathSpec(p=1, zeta=1, beta=1)
        with self.assertRaises(TypeError):
            spec.zeta = 2

    def test_header(self):
        header = BathSpec(p=1, zeta=1, beta=1, omega_c=10).header()
        self.assertTrue(header.startswith('# qbm '))
        self.assertIn('omega_c=10', header)


class TestSpectralDensity(TestCase):

    def test_values(self):
        spec = BathSpec(p=0.5, zeta=2, beta=1, omega_c=10)
        w = np.array([0.5, 1, 4])
        expected = 2 * w ** 0.5 * np.exp(-w / 10)
        np.testing.assert_allclose(spectral_density(spec, w), expected)

    def test_negative_frequency(self):
        with self.assertRaises(DomainError):
            spectral_density(BathSpec(), -1)

    def test_coth_series_is_continuous(self):
        x = np.array([1e-6, 9.99e-4, 1.001e-3, 0.5])
        np.testing.assert_allclose(coth(x), 1 / np.tanh(x), rtol=1e-12)


class TestDampingKernel(TestCase):

    @parameterized.expand([(0.5,), (1.0,), (1.5,)])
    def test_closed_form_matches_quadrature(self, p):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=10)
        t = np.array([0.0, 0.05, 0.3, 2.0])
        np.testing.assert_allclose(damping_kernel(spec, t, method='quad'),
                                   damping_kernel(spec, t), rtol=1e-6, atol=1e-8)

    def test_cosine_convention_at_zero(self):
        spec = BathSpec(p=1, zeta=3, beta=1, omega_c=40)
        self.assertAlmostEqual(damping_kernel(spec, 0, convention='cosine'), 120)

    def test_even(self):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=10)
        self.assertEqual(damping_kernel(spec, -0.7), damping_kernel(spec, 0.7))

    def test_unknown_convention(self):
        with self.assertRaises(DomainError):
            damping_kernel(BathSpec(), 1.0, convention='fourier')

    def test_strictly_ohmic_unsupported(self):
        with self.assertRaises(UnsupportedConfigurationError):
            damping_kernel(BathSpec(cutoff='none'), 1.0)

    @parameterized.expand([(0.5,), (1.0,), (1.5,), (1.00005,)])
    def test_integrated_kernels(self, p):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=10)
        kernel = lambda s: damping_kernel(spec, s)  # noqa
        for t in (0.1, 1.0, 3.0):
            first = integrate.quad(kernel, 0, t, limit=200)[0]
            second = integrate.quad(lambda s: (t - s) * kernel(s), 0, t, limit=200)[0]
            self.assertAlmostEqual(integrated_damping_kernel(spec, t), first, delta=1e-6)
            self.assertAlmostEqual(integrated_damping_kernel(spec, t, order=2), second,
                                   delta=1e-6)

    def test_integrated_kernel_order(self):
        with self.assertRaises(DomainError):
            integrated_damping_kernel(BathSpec(), 1.0, order=3)


class TestDampingLaplace(TestCase):

    def test_strictly_ohmic_is_constant(self):
        spec = BathSpec(p=1, zeta=1.7, beta=1, cutoff='none')
        for z in (0.1, 1.0, 3 + 2j):
            self.assertEqual(damping_laplace(spec, z), 1.7)

    def test_large_cutoff_approaches_coupling(self):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=100)
        value = damping_laplace(spec, 1.0)
        self.assertEqual(value.imag, 0)
        self.assertAlmostEqual(value.real, 1.0, delta=0.05)

    def test_matches_time_domain(self):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=10)
        z = 2.0
        expected = integrate.quad(lambda t: damping_kernel(spec, t) * np.exp(-z * t),
                                  0, np.inf, limit=400)[0]
        self.assertAlmostEqual(damping_laplace(spec, z).real, expected, delta=1e-6)

    def test_conjugate_symmetry(self):
        spec = BathSpec(p=1.5, zeta=1, beta=1, omega_c=10)
        z = 0.8 + 1.3j
        difference = damping_laplace(spec, z.conjugate()) - np.conj(damping_laplace(spec, z))
        self.assertLess(abs(difference), 1e-10)

    @parameterized.expand([(0.0,), (-1.0,), (-0.5 + 1j,)])
    def test_left_half_plane(self, z):
        with self.assertRaises(DomainError):
            damping_laplace(BathSpec(), z)


class TestGammaTilde(TestCase):

    def test_real_part_cosine_convention(self):
        spec = BathSpec(p=1, zeta=2, beta=1, omega_c=1e6)
        self.assertAlmostEqual(real_gamma_tilde(spec, 1.0, convention='cosine'), np.pi,
                               delta=1e-5)

    def test_real_part_laplace_convention(self):
        spec = BathSpec(p=0.5, zeta=1, beta=1, omega_c=10)
        w = 2.0
        self.assertAlmostEqual(real_gamma_tilde(spec, w), spectral_density(spec, w) / w)

    @parameterized.expand([(0.5, 1.0), (1.0, 2.0), (1.5, 0.5)])
    def test_real_part_oracle(self, p, omega):
        spec = BathSpec(p=p, zeta=1, beta=1, omega_c=10)
        np.testing.assert_allclose(real_gamma_tilde_oracle(spec, omega),
                                   real_gamma_tilde(spec, omega), rtol=1e-3)

    def test_imaginary_part_ohmic_closed_form(self):
        omega_c = 20.0
        spec = BathSpec(p=1, zeta=1.5, beta=1, omega_c=omega_c)
        for w in (0.3, 1.0, 5.0):
            aw = w / omega_c
            expected = 1.5 * (np.exp(-aw) * special.expi(aw)
                              + np.exp(aw) * special.exp1(aw)) / np.pi
            self.assertAlmostEqual(imag_gamma_tilde(spec, w), expected, delta=1e-7)

    @parameterized.expand([(0.5, 1e-5), (1.5, 1.9e-6), (1.5, 1e-3)])
    def test_imaginary_part_small_frequency(self, p, w):
        # far below the cutoff gamma_tilde(w) -> zeta (-i w)**(p-1) / sin(pi p/2)
        spec = BathSpec(p=p, zeta=0.1, beta=1, omega_c=20)
        expected = 0.1 * w ** (p - 1) / np.tan(np.pi * p / 2)
        np.testing.assert_allclose(imag_gamma_tilde(spec, w), expected, rtol=1e-2)

    def test_imaginary_part_vanishes_without_cutoff(self):
        self.assertEqual(imag_gamma_tilde(BathSpec(cutoff='none'), 1.0), 0.0)

    def test_nonpositive_frequency(self):
        with self.assertRaises(DomainError):
            imag_gamma_tilde(BathSpec(), 0.0)


class TestNoiseKernel(TestCase):

    @parameterized.expand([(0.5, 1.0), (1.0, 0.1), (1.5, 2.0)])
    def test_image_sum_matches_quadrature(self, p, beta):
        spec = BathSpec(p=p, zeta=1, beta=beta, omega_c=10)
        t = np.array([0.0, 0.05, 0.4, 1.5, 5.0])
        expected = np.array([noise_kernel(spec, ti) for ti in t])
        np.testing.assert_allclose(noise_kernel_table(spec, t), expected, rtol=1e-5,
                                   atol=1e-8 * abs(expected[0]))

    def test_even(self):
        spec = BathSpec(p=1, zeta=1, beta=1, omega_c=10)
        self.assertEqual(noise_kernel(spec, -0.3), noise_kernel(spec, 0.3))

    def test_sum_rule(self):
        spec = BathSpec(p=1, zeta=0.7, beta=0.5, omega_c=20)
        total = integrate.quad(lambda t: noise_kernel_table(spec, t), 0, np.inf,
                               limit=400)[0]
        self.assertAlmostEqual(total, spec.zeta / spec.beta, delta=1e-4)

    def test_strictly_ohmic_unsupported(self):
        with self.assertRaises(UnsupportedConfigurationError):
            noise_kernel(BathSpec(cutoff='none'), 1.0)


class TestKernelTable(TestCase):

    def setUp(self):
        self.spec = BathSpec(p=1, zeta=1, beta=1, omega_c=10)
        self.t = np.linspace(0, 2, 1025)

    def test_noise(self):
        table = kernel_table(self.spec, self.t, kind='noise', threads=2)
        np.testing.assert_allclose(table.values, noise_kernel_table(self.spec, self.t))
        self.assertEqual(table.kind, 'noise')

    def test_damping(self):
        table = kernel_table(self.spec, self.t)
        np.testing.assert_allclose(table.values, damping_kernel(self.spec, self.t))

    def test_unknown_kind(self):
        with self.assertRaises(DomainError):
            kernel_table(self.spec, self.t, kind='dissipation')

    def test_nonuniform_grid(self):
        with self.assertRaises(ValueError):
            kernel_table(self.spec, self.t ** 2)


@pytest.mark.parametrize('p', [0.5, 1.0, 1.5])
def test_kernel_table_csv(tmp_path, p):
    spec = BathSpec(p=p, zeta=1, beta=1, omega_c=10)
    path = kernel_table(spec, np.linspace(0, 1, 65), kind='noise').to_csv(
        str(tmp_path / 'kernel.csv'))
    with open(path) as f:
        header = f.readline()
    assert header.startswith('# qbm ')
    assert 'kind=noise' in header
