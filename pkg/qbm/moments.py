"""
Second moments of the reduced dynamics.

The covariance the bath adds to a freely moving particle is

    M(t) = [[A, C], [C, B]]

with the double integrals

    A(t) = int_0^t int_0^t G(t-s) G(t-s') K(s-s') ds ds'
    B(t) = int_0^t int_0^t G'(t-s) G'(t-s') K(s-s') ds ds'
    C(t) = int_0^t int_0^t G(t-s) G'(t-s') K(s-s') ds ds'

of the Green's function G against the noise kernel K. The module also
provides the long-time asymptotes, the stationary momentum variance and
the pointer basis it defines.
"""

import numpy as np
import pandas as pd
import param

from scipy import special
from scipy.interpolate import CubicSpline

from .bath import BathSpec, KernelTable, _quad, coth, imag_gamma_tilde, kernel_table, real_gamma_tilde
from .config import options
from .exceptions import (
    ConfigurationError, DomainError, NumericalFailure, OutOfRangeError,
    UnsupportedConfigurationError
)
from .green import green_ohmic
from .util import (
    check_uniform_grid, header_line, min_eigenvalue, parallel_map, warn, write_csv, write_json
)

FORMS = ('printed', 'white_noise')


class MomentSeries(param.Parameterized):
    """A(t), B(t) and C(t) sampled on a uniform grid starting at 0."""

    spec = param.ClassSelector(class_=BathSpec, default=None, allow_None=True,
                               constant=True)

    t_grid = param.Array(constant=True)

    a = param.Array(constant=True)

    b = param.Array(constant=True)

    c = param.Array(constant=True)

    def __init__(self, **params):
        super().__init__(**params)
        self.step = check_uniform_grid(self.t_grid)
        for name in ('a', 'b', 'c'):
            if getattr(self, name).shape != self.t_grid.shape:
                raise ConfigurationError('Moment %r has shape %s, expected %s.'
                                         % (name, getattr(self, name).shape,
                                            self.t_grid.shape))
        self._splines = None

    @property
    def horizon(self):
        return float(self.t_grid[-1])

    @property
    def matrices(self):
        """Stack of the 2x2 matrices M(t_k), shape (n, 2, 2)."""
        return np.stack([np.stack([self.a, self.c], -1),
                         np.stack([self.c, self.b], -1)], -2)

    def matrix(self, t):
        """M(t) at an arbitrary time in the horizon by cubic interpolation."""
        tol = 1e-12 * max(self.horizon, 1.0)
        if t < -tol or t > self.horizon + tol:
            raise OutOfRangeError('Time %g lies outside the moment horizon [0, %g].'
                                  % (t, self.horizon))
        if self._splines is None:
            self._splines = [CubicSpline(self.t_grid, v) for v in (self.a, self.b, self.c)]
        a, b, c = (float(s(t)) for s in self._splines)
        return np.array([[a, c], [c, b]])

    def scaled(self, factor):
        return MomentSeries(spec=self.spec, t_grid=self.t_grid, a=factor * self.a,
                            b=factor * self.b, c=factor * self.c)

    def dframe(self):
        return pd.DataFrame({'t': self.t_grid, 'A': self.a, 'B': self.b, 'C': self.c})

    def to_csv(self, path):
        header = self.spec.header() if self.spec is not None else header_line()
        return write_csv(self.dframe(), path, header)


class PointerBasis(param.Parameterized):
    """
    Pointer covariance Gamma_inf = diag(1/B_inf, B_inf) of the minimum
    uncertainty states selected by the bath.
    """

    b_inf = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True),
                         constant=True, doc="""
        Stationary momentum variance.""")

    @property
    def gamma_inf(self):
        return np.diag([1.0 / self.b_inf, self.b_inf])

    @property
    def alpha_sq(self):
        """Squeezing parameter -log(B_inf)/2."""
        return -0.5 * np.log(self.b_inf)

    def to_dict(self):
        return {'b_inf': self.b_inf, 'alpha_sq': self.alpha_sq}

    def to_json(self, path, header=None):
        record = self.to_dict()
        if header:
            record['header'] = header
        return write_json(record, path)


def pointer_basis(b_inf):
    if not np.isfinite(b_inf) or b_inf <= 0:
        raise DomainError('pointer_basis requires B_inf > 0, got %g.' % b_inf)
    return PointerBasis(b_inf=float(b_inf))


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError('Asymptotic moments require t > 0.')
    return t


def asymptotic_A(spec, t):
    """Long-time asymptote 2 sin(pi p/2) t**p / (beta zeta Gamma(p+1))."""
    t = _check_time(t)
    p = spec.p
    value = 2 * np.sin(np.pi * p / 2) * t ** p / (spec.beta * spec.zeta * special.gamma(p + 1))
    return value if value.ndim else float(value)


def asymptotic_C(spec, t):
    """
    Long-time asymptote 2 p sin(pi p/2) t**(p-1) / (beta zeta Gamma(p+1)).

    This is the time derivative of asymptotic_A; since A' = 2C it is
    the asymptote of 2C.
    """
    t = _check_time(t)
    p = spec.p
    value = (2 * p * np.sin(np.pi * p / 2) * t ** (p - 1)
             / (spec.beta * spec.zeta * special.gamma(p + 1)))
    return value if value.ndim else float(value)


def _moments_at(k, h, g, g_dot, kernel):
    if k == 0:
        return 0.0, 0.0, 0.0
    weights = np.full(k + 1, h)
    weights[[0, -1]] *= 0.5
    lags = np.concatenate([kernel[k:0:-1], kernel[:k + 1]])
    x = weights * g[:k + 1]
    y = weights * g_dot[:k + 1]
    kx = np.convolve(lags, x, mode='valid')
    ky = np.convolve(lags, y, mode='valid')
    return float(np.dot(x, kx)), float(np.dot(y, ky)), float(np.dot(x, ky))


def compute_moments(green, spec=None, kernel=None, decimation=None, threads=None):
    """
    Evaluate A, B and C on a decimated subset of the Green's function grid.

    For every output time the inner integral is a discrete convolution of
    the noise kernel lags with the trapezoid-weighted G or G' history and
    the outer integral a trapezoid sum.

    Parameters
    ----------
    green: GreenTable
        Solved Green's function.
    spec: BathSpec
        Bath, defaults to ``green.spec``.
    kernel: KernelTable
        Precomputed noise kernel on the Green's function grid.
    decimation: int
        Keep every n-th grid point, defaults to ``options.decimation``.
    threads: int
        Worker threads for the output times.

    Returns
    -------
    MomentSeries
    """
    spec = green.spec if spec is None else spec
    decimation = options.decimation if decimation is None else int(decimation)
    if decimation < 1:
        raise ConfigurationError('decimation must be at least 1, got %d.' % decimation)
    if spec.strictly_ohmic:
        raise UnsupportedConfigurationError(
            'compute_moments needs a noise kernel with an exponential cutoff; use '
            'the white-noise context for the strictly Ohmic limit.')
    if kernel is None:
        kernel = kernel_table(spec, green.t_grid, kind='noise', threads=threads)
    elif not isinstance(kernel, KernelTable) or kernel.kind != 'noise':
        raise ConfigurationError('compute_moments expects a noise KernelTable.')
    if (len(kernel.t_grid) != len(green.t_grid)
            or not np.allclose(kernel.t_grid, green.t_grid, rtol=1e-12, atol=0)):
        raise ConfigurationError(
            'Noise kernel grid (n=%d, step %g) does not match the Green grid (n=%d, step %g).'
            % (len(kernel.t_grid), kernel.step, len(green.t_grid), green.step))

    indices = np.arange(0, len(green.t_grid), decimation)
    h = green.step
    results = parallel_map(
        lambda k: _moments_at(k, h, green.g, green.g_dot, kernel.values), indices, threads)
    a, b, c = (np.array(v) for v in zip(*results))
    series = MomentSeries(spec=spec, t_grid=green.t_grid[indices], a=a, b=b, c=c)

    eig = min_eigenvalue(series.matrices)
    trace = a + b
    bad = eig < -options.psd_rtol * np.maximum(trace, np.finfo(float).tiny)
    if np.any(bad):
        first = int(np.argmax(bad))
        warn('M(t) is not positive semidefinite at t=%g (min eigenvalue %.3g).'
             % (series.t_grid[first], eig[first]))
    return series


def moments_derivative_factor(series):
    """
    Least-squares factor kappa in C(t) = kappa dA/dt over the late half of
    the series.

    Returns
    -------
    (kappa, misfit)
        The factor and the largest relative deviation of C from kappa A'.
    """
    a_dot = np.gradient(series.a, series.t_grid, edge_order=2)
    late = slice(len(series.t_grid) // 2, None)
    x, y = a_dot[late], series.c[late]
    kappa = float(np.dot(x, y) / np.dot(x, x))
    misfit = float(np.max(np.abs(y - kappa * x)) / np.max(np.abs(y)))
    return kappa, misfit


def stationary_momentum_variance(spec):
    """
    Stationary momentum variance

        B_inf = (1/pi) int_0^inf w R coth(beta w/2) / ((w - I)**2 + R**2) dw

    where R and I are the real and imaginary parts of gamma_tilde(w + i0).
    The integrand is the imaginary part of the susceptibility times
    w**2 coth(beta w/2), written out algebraically.
    """
    if spec.strictly_ohmic:
        raise UnsupportedConfigurationError(
            'The stationary momentum variance diverges without a frequency cutoff.')

    def integrand(w):
        if w == 0:
            return 0.0
        r = real_gamma_tilde(spec, w)
        i = imag_gamma_tilde(spec, w)
        return w * r * coth(spec.beta * w / 2) / ((w - i) ** 2 + r ** 2) / np.pi

    scales = sorted({spec.zeta ** (1.0 / (2.0 - spec.p)), 1.0 / spec.beta, spec.omega_c})
    edges = [0.0] + scales
    value = sum(_quad(integrand, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    value += _quad(integrand, edges[-1], np.inf)
    if not np.isfinite(value) or value <= 0:
        raise NumericalFailure('Stationary momentum variance evaluated to %g for %r.'
                               % (value, spec), residual=value)
    return float(value)


def high_t_moments_ohmic(zeta, t, form='printed'):
    """
    High-temperature limit m(t) = lim M(t)/T of a strictly Ohmic bath.

    Parameters
    ----------
    zeta: float
        Coupling strength.
    t: float or array
        Non-negative time(s).
    form: str
        'printed' gives m11 = 2(t - G)/zeta, m12 = 2(1 - G')/zeta and
        m22 = 1 - exp(-2 zeta t). 'white_noise' gives the double integrals
        against K = 2 zeta T delta: m11 = 2 zeta int G**2, m12 = zeta G**2
        and the same m22.

    Returns
    -------
    numpy.ndarray
        Shape (2, 2) for scalar t, (n, 2, 2) otherwise.
    """
    if form not in FORMS:
        raise DomainError('Unknown high temperature form %r, expected one of %s.'
                          % (form, FORMS))
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    g, g_dot, _ = green_ohmic(zeta, t)
    m22 = -np.expm1(-2 * zeta * t)
    if form == 'printed':
        m11 = 2 * (t - g) / zeta
        m12 = 2 * (1 - g_dot) / zeta
    else:
        e = -np.expm1(-zeta * t)
        m11 = 2 / zeta * (t - e / zeta - e ** 2 / (2 * zeta))
        m12 = e ** 2 / zeta
    m = np.stack([np.stack([m11, m12], -1), np.stack([m12, m22], -1)], -2)
    return m[0] if scalar else m
