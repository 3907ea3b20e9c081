"""
Spectral densities, the damping kernel and its transforms, and the
thermal noise kernel of a harmonic heat bath.

Units are hbar = k = mass = 1 throughout.

Two normalisations of the damping kernel are available. The ``'cosine'``
convention is the bare cosine transform

    gamma(t) = int_0^inf I(w)/w cos(w t) dw,

and the ``'laplace'`` convention scales it by 2/pi so that a strictly
Ohmic bath has Laplace transform gamma_hat(z) = zeta. Everything
downstream of this module uses ``'laplace'``.
"""

import warnings

import numpy as np
import pandas as pd
import param

from param.parameterized import edit_constant
from scipy import integrate, special

from .config import options
from .exceptions import (
    DomainError, NumericalFailure, UnsupportedConfigurationError
)
from .util import check_uniform_grid, header_line, parallel_map, write_csv

CONVENTIONS = ('laplace', 'cosine')


def default_omega_c(p, zeta, beta):
    """Default cutoff 50 * max(zeta**(1/(2-p)), 1/beta)."""
    return 50.0 * max(zeta ** (1.0 / (2.0 - p)), 1.0 / beta)


class BathSpec(param.Parameterized):
    """
    Parameters of the harmonic bath: spectral density
    I(w) = zeta w**p exp(-w/omega_c) at inverse temperature beta.

    Instances are immutable. Leaving ``omega_c`` unset selects the default
    cutoff; ``cutoff='none'`` is accepted only for the strictly Ohmic case
    p = 1, where omega_c is infinite.
    """

    p = param.Number(default=1.0, bounds=(0, 2), inclusive_bounds=(False, False),
                     constant=True, doc="""
        Small-frequency exponent of the spectral density.""")

    zeta = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True),
                        constant=True, doc="""
        Coupling strength, lim I(w)/w**p as w -> 0.""")

    beta = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True),
                        constant=True, doc="""
        Inverse temperature.""")

    omega_c = param.Number(default=None, allow_None=True, bounds=(0, None),
                           inclusive_bounds=(False, True), constant=True, doc="""
        Cutoff frequency of the exponential cutoff.""")

    cutoff = param.ObjectSelector(default='exponential', objects=['exponential', 'none'],
                                  constant=True, doc="""
        Shape of the high-frequency cutoff.""")

    def __init__(self, **params):
        super().__init__(**params)
        if self.cutoff == 'none':
            if self.p != 1:
                raise UnsupportedConfigurationError(
                    'cutoff=none is only supported for the strictly Ohmic case '
                    'p=1, got p=%s.' % self.p)
            omega_c = np.inf
        elif self.omega_c is None or not np.isfinite(self.omega_c):
            omega_c = default_omega_c(self.p, self.zeta, self.beta)
        else:
            omega_c = float(self.omega_c)
        with edit_constant(self):
            self.omega_c = omega_c

    @property
    def strictly_ohmic(self):
        return self.cutoff == 'none'

    @property
    def temperature(self):
        return 1.0 / self.beta

    def header(self, **extra):
        return header_line(self, **extra)

    def __repr__(self):
        return ('BathSpec(p=%r, zeta=%r, beta=%r, omega_c=%r, cutoff=%r)'
                % (self.p, self.zeta, self.beta, self.omega_c, self.cutoff))


class KernelTable(param.Parameterized):
    """Damping or noise kernel sampled on a uniform time grid starting at 0."""

    spec = param.ClassSelector(class_=BathSpec, constant=True)

    t_grid = param.Array(constant=True)

    values = param.Array(constant=True)

    kind = param.ObjectSelector(default='damping', objects=['damping', 'noise'],
                                constant=True)

    def __init__(self, **params):
        super().__init__(**params)
        self.step = check_uniform_grid(self.t_grid)
        if self.values.shape != self.t_grid.shape:
            raise DomainError('Kernel values shape %s does not match t_grid shape %s.'
                              % (self.values.shape, self.t_grid.shape))
        if not np.all(np.isfinite(self.values)):
            raise NumericalFailure('%s kernel table contains non-finite samples.' % self.kind)

    def dframe(self):
        return pd.DataFrame({'t': self.t_grid, 'value': self.values})

    def to_csv(self, path):
        return write_csv(self.dframe(), path, self.spec.header(kind=self.kind))


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise DomainError('Unknown damping kernel convention %r, expected one of %s.'
                          % (convention, CONVENTIONS))
    return 2.0 / np.pi if convention == 'laplace' else 1.0


def _quad(func, a, b, **kwargs):
    """scipy.integrate.quad with the shared tolerances and a convergence check."""
    kwargs.setdefault('epsabs', options.quad_epsabs)
    kwargs.setdefault('epsrel', options.quad_epsrel)
    kwargs.setdefault('limit', options.quad_limit)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        value, abserr = integrate.quad(func, a, b, **kwargs)[:2]
    bound = 1e3 * max(kwargs['epsabs'], kwargs['epsrel'] * abs(value))
    if not np.isfinite(value) or abserr > bound:
        raise NumericalFailure(
            'Quadrature on [%g, %g] did not converge: error estimate %g exceeds %g.'
            % (a, b, abserr, bound), residual=abserr, where=a)
    return value


def _complex_quad(func, a, b, **kwargs):
    real = _quad(lambda x: func(x).real, a, b, **kwargs)
    imag = _quad(lambda x: func(x).imag, a, b, **kwargs)
    return real + 1j * imag


def coth(x):
    """coth(x) for x > 0, switching to the Laurent series for small x."""
    x = np.asarray(x, dtype=float)
    small = x < options.coth_series_threshold
    safe = np.where(small, 1.0, x)
    xs = np.where(small, x, 0.0)
    with np.errstate(divide='ignore'):
        series = 1.0 / xs + xs / 3.0 - xs ** 3 / 45.0
    result = np.where(small, series, 1.0 / np.tanh(safe))
    return result if result.ndim else float(result)


def spectral_density(spec, omega):
    """
    Spectral density I(w) = zeta w**p exp(-w/omega_c).

    Parameters
    ----------
    spec: BathSpec
        The bath.
    omega: float or array
        Non-negative frequencies.

    Returns
    -------
    float or array
        I(omega), without the exponential factor for cutoff='none'.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError('spectral_density requires omega >= 0, got min %g.' % omega.min())
    density = spec.zeta * omega ** spec.p
    if not spec.strictly_ohmic:
        density = density * np.exp(-omega / spec.omega_c)
    return density if density.ndim else float(density)


def damping_kernel(spec, t, convention='laplace', method='closed'):
    """
    Damping kernel gamma(t) as the cosine transform of I(w)/w.

    The kernel is even in t. With the exponential cutoff the closed form is

        gamma(t) = zeta Gamma(p) Re[(1/omega_c - i t)**(-p)],

    ``method='quad'`` evaluates the defining integral by adaptive
    quadrature instead.

    Parameters
    ----------
    spec: BathSpec
        Bath with an exponential cutoff.
    t: float or array
        Times.
    convention: str
        'laplace' (default) or 'cosine', see the module docstring.
    method: str
        'closed' or 'quad'.
    """
    norm = _check_convention(convention)
    if spec.strictly_ohmic:
        raise UnsupportedConfigurationError(
            'The strictly Ohmic damping kernel is a delta distribution; use the '
            'closed-form Green function instead.')
    t = np.abs(np.asarray(t, dtype=float))
    if method == 'closed':
        a = 1.0 / spec.omega_c
        values = spec.zeta * special.gamma(spec.p) * np.real((a - 1j * t) ** (-spec.p))
    elif method == 'quad':
        values = np.array([_damping_quad(spec, ti) for ti in t.ravel()]).reshape(t.shape)
    else:
        raise DomainError("damping_kernel method must be 'closed' or 'quad', got %r." % method)
    values = norm * values
    return values if values.ndim else float(values)


def _damping_quad(spec, t):
    p, omega_c = spec.p, spec.omega_c

    def integrand(w):
        return spec.zeta * w ** (p - 1) * np.exp(-w / omega_c)

    if t == 0:
        return (_quad(integrand, 0, omega_c) + _quad(integrand, omega_c, np.inf))
    split = min(np.pi / t, omega_c)
    head = _quad(lambda w: integrand(w) * np.cos(w * t), 0, split)
    tail = _quad(integrand, split, np.inf, weight='cos', wvar=t)
    return head + tail


def integrated_damping_kernel(spec, t, order=1, convention='laplace'):
    """
    Repeated integrals of the damping kernel from 0 to t.

    ``order=1`` gives Gamma1(t) = int_0^t gamma, ``order=2`` gives
    Gamma2(t) = int_0^t Gamma1. Both are closed form for the exponential
    cutoff; exponents within 1e-4 of 1 (but not equal) fall back to
    quadrature of gamma because the closed form cancels there.
    """
    norm = _check_convention(convention)
    if order not in (1, 2):
        raise DomainError('integrated_damping_kernel order must be 1 or 2, got %r.' % order)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError('integrated_damping_kernel requires t >= 0.')
    p, zeta = spec.p, spec.zeta
    a = 1.0 / spec.omega_c
    omega_c = spec.omega_c
    if p == 1:
        if order == 1:
            values = zeta * np.arctan(omega_c * t)
        else:
            values = zeta * (t * np.arctan(omega_c * t)
                             - np.log1p((omega_c * t) ** 2) / (2 * omega_c))
    elif abs(p - 1) < 1e-4:
        kernel = lambda s: damping_kernel(spec, s, convention='cosine')  # noqa
        flat = t.ravel()
        if order == 1:
            values = [_quad(kernel, 0, ti) if ti > 0 else 0.0 for ti in flat]
        else:
            values = [_quad(lambda s: (ti - s) * kernel(s), 0, ti) if ti > 0 else 0.0
                      for ti in flat]
        values = np.array(values).reshape(t.shape)
    elif order == 1:
        values = zeta * special.gamma(p - 1) * np.imag((a - 1j * t) ** (1 - p))
    else:
        values = zeta * special.gamma(p - 2) * (a ** (2 - p) - np.real((a - 1j * t) ** (2 - p)))
    values = norm * np.asarray(values, dtype=float)
    return values if values.ndim else float(values)


def _gamma_hat(spec, z, convention='laplace'):
    """
    gamma_hat(z) for any z off the negative real axis.

    For Re z > 0 this is the Laplace transform. Elsewhere the frequency
    integral is continued analytically by rotating the integration ray to
    nu = x exp(i arg(z)/2), which keeps the pole at nu = -iz on the same
    side of the ray as it is for Re z > 0.
    """
    norm = _check_convention(convention)
    z = complex(z)
    if spec.strictly_ohmic:
        return norm * np.pi / 2 * spec.zeta
    if z.imag < 0:
        return np.conj(_gamma_hat(spec, z.conjugate(), convention))
    if z.imag == 0 and z.real <= 0:
        raise DomainError('gamma_hat is cut along the negative real axis, got z=%s.' % z)
    direction = np.exp(0.5j * np.angle(z))
    p, zeta, omega_c = spec.p, spec.zeta, spec.omega_c

    def integrand(x):
        nu = x * direction
        return zeta * nu ** (p - 1) * np.exp(-nu / omega_c) * z / (z * z + nu * nu) * direction

    knots = sorted({0.0, min(abs(z), omega_c), max(abs(z), omega_c)})
    total = 0j
    for lo, hi in zip(knots[:-1], knots[1:]):
        if hi > lo:
            total += _complex_quad(integrand, lo, hi)
    total += _complex_quad(integrand, knots[-1], np.inf)
    return norm * total


def damping_laplace(spec, z, convention='laplace'):
    """
    Laplace transform gamma_hat(z) = int_0^inf gamma(t) exp(-z t) dt.

    Evaluated from the frequency representation
    (2/pi) int_0^inf I(nu)/nu z/(z**2+nu**2) dnu; the strictly Ohmic path
    returns zeta exactly.

    Parameters
    ----------
    spec: BathSpec
        The bath.
    z: complex
        Point with Re z > 0.
    """
    z = complex(z)
    if z.real <= 0:
        raise DomainError('damping_laplace requires Re z > 0, got z=%s.' % z)
    value = _gamma_hat(spec, z, convention)
    if z.imag == 0:
        return complex(value.real, 0.0)
    return value


def real_gamma_tilde(spec, omega, convention='laplace'):
    """
    Boundary value Re gamma_tilde(w + i0) = (pi/2) I(w)/w, times 2/pi in the
    'laplace' convention.
    """
    norm = _check_convention(convention)
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError('real_gamma_tilde requires omega > 0, got min %g.' % omega.min())
    values = norm * np.pi / 2 * spectral_density(spec, omega) / omega
    return values if np.ndim(values) else float(values)


def real_gamma_tilde_oracle(spec, omega, convention='laplace', eps=1e-2):
    """
    Independent evaluation of Re gamma_tilde(w + i0) from the time domain.

    Computes the damped cosine transform int_0^inf gamma(t) cos(w t) exp(-e t) dt
    at e = eps*w and eps*w/2 and extrapolates linearly to e = 0.
    """
    if omega <= 0:
        raise DomainError('real_gamma_tilde_oracle requires omega > 0, got %g.' % omega)

    def damped(e):
        kernel = lambda t: damping_kernel(spec, t, convention) * np.exp(-e * t)  # noqa
        return _quad(kernel, 0, np.inf, weight='cos', wvar=omega)

    e = eps * omega
    return 2 * damped(e / 2) - damped(e)


def imag_gamma_tilde(spec, omega, convention='laplace'):
    """
    Boundary value Im gamma_tilde(w + i0) by the principal value integral

        (2/pi) P int_0^inf I(nu)/nu * w / (w**2 - nu**2) dnu

    (without the 2/pi factor in the 'cosine' convention).
    """
    norm = _check_convention(convention)
    if omega <= 0:
        raise DomainError('imag_gamma_tilde requires omega > 0, got %g.' % omega)
    if spec.strictly_ohmic:
        return 0.0

    def density_over_nu(nu):
        return spec.zeta * nu ** (spec.p - 1) * np.exp(-nu / spec.omega_c)

    def regular(nu):
        return density_over_nu(nu) * omega / (omega ** 2 - nu ** 2)

    def cauchy(nu):
        return -density_over_nu(nu) * omega / (nu + omega)

    lo, hi = omega / 2, 2 * omega
    head = [0.0] + _decades(min(lo, spec.omega_c), lo)
    tail = _decades(hi, max(hi, 50 * spec.omega_c))
    value = _quad(cauchy, lo, hi, weight='cauchy', wvar=omega)
    for edges in (head, tail):
        value += sum(_quad(regular, a, b) for a, b in zip(edges[:-1], edges[1:]))
    value += _quad(regular, tail[-1], np.inf)
    return norm * value


def _decades(lo, hi, ratio=10.0):
    """Geometric knots from lo to hi, so that each quad piece spans one scale."""
    knots = [lo]
    while knots[-1] * ratio < hi:
        knots.append(knots[-1] * ratio)
    if hi > knots[-1]:
        knots.append(hi)
    return knots


def _noise_integrand(spec):
    """Integrand of K without the cosine, (1/pi) I(w) coth(beta w/2)."""
    def integrand(w):
        return spectral_density(spec, w) * coth(spec.beta * w / 2) / np.pi
    return integrand


def noise_kernel(spec, t):
    """
    Noise kernel

        K(t) = (1/pi) int_0^inf Re gamma_tilde(w) w coth(beta w/2) cos(w t) dw

    by adaptive quadrature, split at w = 1/beta and w = omega_c.

    Parameters
    ----------
    spec: BathSpec
        Bath with an exponential cutoff.
    t: float
        Time; K is even.

    Returns
    -------
    float
    """
    if spec.strictly_ohmic:
        raise UnsupportedConfigurationError(
            'noise_kernel needs an exponential cutoff; the integrand grows like '
            'w**p coth(beta w).')
    t = abs(float(t))
    integrand = _noise_integrand(spec)
    knots = sorted({1.0 / spec.beta, spec.omega_c})
    if t == 0:
        edges = [0.0] + knots
        value = sum(_quad(integrand, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
        return value + _quad(integrand, knots[-1], np.inf)
    first = min(np.pi / t, knots[0])
    value = _quad(lambda w: integrand(w) * np.cos(w * t), 0, first)
    edges = [first] + [k for k in knots if k > first]
    for lo, hi in zip(edges[:-1], edges[1:]):
        value += _quad(integrand, lo, hi, weight='cos', wvar=t)
    value += _quad(integrand, edges[-1], np.inf, weight='cos', wvar=t)
    return value


def noise_kernel_table(spec, t_grid):
    """
    Noise kernel on many times at once through the thermal image sum.

    With coth(x) = 1 + 2 sum_n exp(-2 n x) every term integrates in closed
    form, int_0^inf w**p exp(-a w) cos(w t) dw = Gamma(p+1) Re (a - i t)**-(p+1),
    so that

        K(t) = zeta Gamma(p+1)/pi [F(a0) + 2 sum_{n>=1} F(a0 + n beta)]

    with a0 = 1/omega_c. The sum is carried explicitly for
    ``options.image_terms`` terms and closed with the Euler-Maclaurin tail.
    """
    if spec.strictly_ohmic:
        raise UnsupportedConfigurationError('noise_kernel_table needs an exponential cutoff.')
    t = np.abs(np.asarray(t_grid, dtype=float))
    p, beta = spec.p, spec.beta
    b = 1.0 / spec.omega_c - 1j * t[..., None]
    n = np.arange(1, options.image_terms + 1)
    head = np.real(b[..., 0] ** (-(p + 1)))
    images = np.real((b + n * beta) ** (-(p + 1))).sum(axis=-1)
    edge = b[..., 0] + (options.image_terms + 0.5) * beta
    tail = np.real(edge ** (-p) / (p * beta) - (p + 1) * beta * edge ** (-(p + 2)) / 24)
    values = spec.zeta * special.gamma(p + 1) / np.pi * (head + 2 * (images + tail))
    return values if values.ndim else float(values)


def kernel_table(spec, t_grid, kind='damping', threads=None):
    """
    Tabulate the damping or noise kernel on a uniform grid.

    The damping kernel uses its closed form, the noise kernel the image
    sum; ``threads`` parallelises over blocks of times.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    check_uniform_grid(t_grid)
    if kind == 'damping':
        values = damping_kernel(spec, t_grid)
    elif kind == 'noise':
        blocks = np.array_split(t_grid, max(1, len(t_grid) // 512))
        values = np.concatenate(parallel_map(lambda b: noise_kernel_table(spec, b),
                                             blocks, threads))
    else:
        raise DomainError("Kernel kind must be 'damping' or 'noise', got %r." % kind)
    return KernelTable(spec=spec, t_grid=t_grid, values=np.asarray(values, dtype=float),
                       kind=kind)
