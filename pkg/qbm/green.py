"""
Green's function of the damped free particle.

G solves G'' + int_0^t gamma(t-s) G'(s) ds = 0 with G(0) = 0, G'(0) = 1.
"""

import numpy as np
import pandas as pd
import param

from scipy import special
from scipy.interpolate import CubicSpline

from .bath import BathSpec, _gamma_hat, integrated_damping_kernel
from .config import options
from .exceptions import DomainError, NumericalFailure, OutOfRangeError
from .util import check_uniform_grid, parallel_map, warn, write_csv


def default_horizon(spec):
    """Horizon max(10/zeta**(1/(2-p)), 20 beta) covering damping and thermal scales."""
    return max(10.0 / spec.zeta ** (1.0 / (2.0 - spec.p)), 20.0 * spec.beta)


class PropagatorMatrix(param.Parameterized):
    """V(t) = [[G'(t), G(t)], [G''(t), G'(t)]] and its determinant."""

    v = param.Array(constant=True)

    det_v = param.Number(constant=True)

    t = param.Number(default=0.0, constant=True)

    @property
    def inverse(self):
        (a, b), (c, d) = self.v
        return np.array([[d, -b], [-c, a]]) / self.det_v


class GreenTable(param.Parameterized):
    """
    G, G' and G'' sampled on a uniform grid on [0, T_max].

    Cubic splines through the samples give C1 interpolation for
    off-grid times.
    """

    spec = param.ClassSelector(class_=BathSpec, constant=True)

    t_grid = param.Array(constant=True)

    g = param.Array(constant=True)

    g_dot = param.Array(constant=True)

    g_ddot = param.Array(constant=True)

    residual = param.Number(default=0.0, constant=True, doc="""
        Worst Volterra residual relative to max|G''|.""")

    def __init__(self, **params):
        super().__init__(**params)
        self.step = check_uniform_grid(self.t_grid)
        if self.g[0] != 0 or self.g_dot[0] != 1:
            raise NumericalFailure('Green table violates G(0)=0, Gdot(0)=1: got %g, %g.'
                                   % (self.g[0], self.g_dot[0]))
        self._splines = {name: CubicSpline(self.t_grid, getattr(self, name))
                         for name in ('g', 'g_dot', 'g_ddot')}

    @property
    def horizon(self):
        return float(self.t_grid[-1])

    @property
    def det_v(self):
        return self.g_dot ** 2 - self.g * self.g_ddot

    @property
    def regular_horizon(self):
        """
        Last grid time before det V first falls to ``options.det_floor``;
        the phase-space map is invertible on [0, regular_horizon].
        """
        singular = np.flatnonzero(self.det_v <= max(options.det_floor, 0.0))
        if len(singular) == 0:
            return self.horizon
        return float(self.t_grid[max(singular[0] - 1, 0)])

    def check_time(self, t):
        t = np.asarray(t, dtype=float)
        tol = 1e-12 * max(self.horizon, 1.0)
        if np.any(t < -tol) or np.any(t > self.horizon + tol):
            raise OutOfRangeError('Time %s lies outside the solved horizon [0, %g].'
                                  % (np.array2string(np.atleast_1d(t)[:4]), self.horizon))
        return np.clip(t, 0, self.horizon)

    def __call__(self, t):
        """Interpolated (G, G', G'') at time(s) t."""
        t = self.check_time(t)
        return tuple(self._splines[name](t) for name in ('g', 'g_dot', 'g_ddot'))

    def dframe(self):
        return pd.DataFrame({'t': self.t_grid, 'G': self.g, 'Gdot': self.g_dot,
                             'Gddot': self.g_ddot})

    def to_csv(self, path, extra_columns=None):
        df = self.dframe()
        for name, values in (extra_columns or {}).items():
            df[name] = values
        return write_csv(df, path, self.spec.header(n_steps=len(self.t_grid) - 1))


def green_ohmic(zeta, t):
    """
    Closed-form strictly Ohmic Green's function.

    Returns
    -------
    (G, Gdot, Gddot)
        ((1 - exp(-zeta t))/zeta, exp(-zeta t), -zeta exp(-zeta t))
    """
    if zeta <= 0:
        raise DomainError('green_ohmic requires zeta > 0, got %g.' % zeta)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError('green_ohmic requires t >= 0.')
    decay = np.exp(-zeta * t)
    g = -np.expm1(-zeta * t) / zeta
    if not t.ndim:
        return float(g), float(decay), float(-zeta * decay)
    return g, decay, -zeta * decay


def green_ohmic_table(spec, t_max, n_steps):
    t_grid = np.linspace(0, t_max, n_steps + 1)
    g, g_dot, g_ddot = green_ohmic(spec.zeta, t_grid)
    return GreenTable(spec=spec, t_grid=t_grid, g=g, g_dot=g_dot, g_ddot=g_ddot)


def _product_weights(spec, h, n):
    """
    Product-integration weights of int_{(m-1)h}^{mh} gamma(s) ds against
    the two hat functions of a piecewise-linear history, m = 1..n.
    """
    lags = h * np.arange(n + 1)
    first = integrated_damping_kernel(spec, lags, order=1)
    second = integrated_damping_kernel(spec, lags, order=2)
    a = np.diff(first)
    b = np.diff(second) / h - first[:-1]
    # index m holds the weight of cell m; index 0 is unused
    return np.concatenate([[0.0], a - b]), np.concatenate([[0.0], b])


def _march(spec, h, n):
    c, b = _product_weights(spec, h, n)
    u = np.empty(n + 1)
    u_dot = np.empty(n + 1)
    g = np.empty(n + 1)
    u[0], u_dot[0], g[0] = 1.0, 0.0, 0.0
    scale = 1.0 + 0.5 * h * b[1]
    for k in range(1, n + 1):
        history = np.dot(c[1:k + 1], u[k - 1::-1])
        if k > 1:
            history += np.dot(b[2:k + 1], u[k - 1:0:-1])
        u[k] = (u[k - 1] + 0.5 * h * (u_dot[k - 1] - history)) / scale
        u_dot[k] = -(b[1] * u[k] + history)
        g[k] = g[k - 1] + 0.5 * h * (u[k - 1] + u[k])
    return g, u, u_dot, (c, b)


def volterra_residual(g_dot, g_ddot, weights):
    """
    Re-evaluate G'' + int_0^t gamma(t-s) G'(s) ds at every grid point by
    discrete convolution of the stored G' with the product weights.
    """
    c, b = weights
    n = len(g_dot) - 1
    history_c = np.convolve(c, g_dot)[:n + 1]
    history_b = np.convolve(b, g_dot)[1:n + 2] - np.append(b[1:], 0.0) * g_dot[0]
    return np.abs(g_ddot + history_c + history_b)


def solve_green(spec, t_max=None, n_steps=2048):
    """
    Solve the Green's function integro-differential equation.

    Second-order product integration (trapezoidal in time, exact in the
    kernel) marches the first-order system for (G, G'); G'' is taken from
    the equation itself. The grid is halved up to
    ``options.max_refinements`` times if the residual check fails.

    Parameters
    ----------
    spec: BathSpec
        The bath; strictly Ohmic specs use the closed form.
    t_max: float
        Horizon, defaults to default_horizon(spec).
    n_steps: int
        Number of time steps, at least 64.

    Returns
    -------
    GreenTable
    """
    t_max = default_horizon(spec) if t_max is None else float(t_max)
    if t_max <= 0:
        raise DomainError('solve_green requires T_max > 0, got %g.' % t_max)
    if n_steps < 64:
        raise DomainError('solve_green requires n_steps >= 64, got %d.' % n_steps)
    if spec.strictly_ohmic:
        return green_ohmic_table(spec, t_max, n_steps)

    for attempt in range(options.max_refinements + 1):
        h = t_max / n_steps
        g, g_dot, g_ddot, weights = _march(spec, h, n_steps)
        residual = volterra_residual(g_dot, g_ddot, weights)
        scale = max(np.abs(g_ddot).max(), np.finfo(float).tiny)
        worst = int(np.argmax(residual))
        relative = residual[worst] / scale
        finite = np.all(np.isfinite(g)) and np.all(np.isfinite(g_ddot))
        if finite and relative <= options.residual_tol:
            break
        if attempt < options.max_refinements:
            param.main.param.warning(
                'Volterra residual %.3g at t=%g exceeds tolerance; halving the step.'
                % (relative, worst * h))
            n_steps *= 2
    else:
        raise NumericalFailure(
            'Green function residual %.3g at t=%g exceeds %g after %d refinements.'
            % (relative, worst * h, options.residual_tol, options.max_refinements),
            residual=relative, where=worst * h)

    table = GreenTable(spec=spec, t_grid=h * np.arange(n_steps + 1), g=g,
                       g_dot=g_dot, g_ddot=g_ddot, residual=float(relative))
    if table.regular_horizon < table.horizon:
        warn('det V(t) falls to the floor after t=%g; phase-space propagation of %r stops there.'
             % (table.regular_horizon, spec))
    return table


def green_asymptote(spec, t):
    """
    Long-time asymptote f(t) = sin(pi p/2) t**(p-1) / (zeta Gamma(p)).

    Only used as a diagnostic of lim G/f = 1.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError('green_asymptote requires t > 0.')
    p = spec.p
    values = np.sin(np.pi * p / 2) * t ** (p - 1) / (spec.zeta * special.gamma(p))
    return values if values.ndim else float(values)


def green_laplace(spec, z):
    """Laplace transform of G, 1/(z**2 + z gamma_hat(z)), continued off the negative axis."""
    return 1.0 / (z * z + z * _gamma_hat(spec, z))


def talbot(transform, t, nodes=None):
    """
    Fixed Talbot inversion of a Laplace transform at a single time t > 0.

    The contour z(theta) = r theta (cot theta + i) with r = 2M/(5t) is
    sampled at M nodes.
    """
    nodes = options.talbot_nodes if nodes is None else nodes
    r = 2.0 * nodes / (5.0 * t)
    theta = np.pi * np.arange(1, nodes) / nodes
    cot = 1.0 / np.tan(theta)
    z = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    # nodes far down the branch cut are weighted below double precision
    keep = np.real(t * z) > r * t - 40.0
    values = np.array([transform(zk) for zk in z[keep]])
    terms = np.exp(t * z[keep]) * values * (1.0 + 1j * sigma[keep])
    total = 0.5 * np.exp(r * t) * np.real(transform(r)) + np.sum(np.real(terms))
    result = r / nodes * total
    if not np.isfinite(result):
        raise NumericalFailure('Talbot contour evaluation overflowed at t=%g.' % t,
                               where=t)
    return float(result)


def dehoog(transform, t, degree=None, tol=1e-9):
    """
    de Hoog, Knight and Stokes inversion of a Laplace transform at a
    single time t > 0.

    The Fourier series of the Bromwich integral on Re z = -log(tol)/(4t)
    is summed by the continued fraction of its quotient-difference
    table. Only Re z > 0 is sampled, so no analytic continuation of the
    transform is needed.
    """
    m = options.dehoog_degree if degree is None else degree
    period = 2.0 * t
    gamma = -np.log(tol) / (2.0 * period)
    z = gamma + 1j * np.pi * np.arange(2 * m + 1) / period
    fp = np.array([transform(zk) for zk in z], dtype=complex)

    e = np.zeros((2 * m + 1, m + 1), dtype=complex)
    q = np.zeros((2 * m + 1, m), dtype=complex)
    q[0, 0] = fp[1] / (fp[0] / 2.0)
    q[1:2 * m, 0] = fp[2:] / fp[1:2 * m]
    for r in range(1, m + 1):
        mr = 2 * (m - r)
        e[:mr, r] = q[1:mr + 1, r - 1] - q[:mr, r - 1] + e[1:mr + 1, r - 1]
        if r < m:
            q[:mr - 1, r] = q[1:mr, r - 1] * e[1:mr, r] / e[:mr - 1, r]

    d = np.empty(2 * m + 1, dtype=complex)
    d[0] = fp[0] / 2.0
    d[1::2] = -q[0, :]
    d[2::2] = -e[0, 1:]

    # diagonal Pade approximant by the three-term recurrence
    w = np.exp(1j * np.pi * t / period)
    a = np.zeros(2 * m + 2, dtype=complex)
    b = np.zeros(2 * m + 2, dtype=complex)
    a[1], b[0], b[1] = d[0], 1.0, 1.0
    for i in range(1, 2 * m):
        a[i + 1] = a[i] + d[i] * a[i - 1] * w
        b[i + 1] = b[i] + d[i] * b[i - 1] * w
    brem = (1.0 + (d[2 * m - 1] - d[2 * m]) * w) / 2.0
    rem = -brem * (1.0 - np.sqrt(1.0 + d[2 * m] * w / brem ** 2))
    a[-1] = a[2 * m] + rem * a[2 * m - 1]
    b[-1] = b[2 * m] + rem * b[2 * m - 1]
    result = np.exp(gamma * t) / period * (a[-1] / b[-1]).real
    if not np.isfinite(result):
        raise NumericalFailure('de Hoog continued fraction broke down at t=%g.' % t, where=t)
    return float(result)


INVERSIONS = {'talbot': talbot, 'dehoog': dehoog}


def inverse_laplace_check(spec, t_samples, threads=None, method='talbot'):
    """
    G(t) by numerical inversion of G_hat(z) = 1/(z**2 + z gamma_hat(z)).

    An independent oracle for solve_green. ``method='talbot'`` uses the
    fixed Talbot contour through the continued transform, ``'dehoog'``
    the Bromwich line. Times are inverted in parallel.
    """
    if method not in INVERSIONS:
        raise DomainError('Unknown inversion method %r, expected one of %s.'
                          % (method, sorted(INVERSIONS)))
    t_samples = np.atleast_1d(np.asarray(t_samples, dtype=float))
    if np.any(t_samples <= 0):
        raise DomainError('inverse_laplace_check requires t > 0.')
    transform = lambda z: green_laplace(spec, z)  # noqa
    invert = INVERSIONS[method]
    return parallel_map(lambda t: invert(transform, t), t_samples, threads)


def v_matrix(table, t):
    """
    Propagation matrix V(t) = [[G', G], [G'', G']] by cubic interpolation.
    """
    g, g_dot, g_ddot = (float(x) for x in table(t))
    v = np.array([[g_dot, g], [g_ddot, g_dot]])
    return PropagatorMatrix(v=v, det_v=g_dot ** 2 - g * g_ddot, t=float(t))
