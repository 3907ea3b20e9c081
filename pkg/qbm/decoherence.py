"""
Exact propagation of phase-space functions, the pointer weight function
and the localization time after which every state is a mixture of
pointer states.

The reduced Wigner function evolves as

    W(xi, t) = N(M(t)) * [ W(V(t)^-1 xi, 0) / |V(t)| ]

a linear map followed by convolution with the Gaussian of covariance M(t).
"""

import os

import numpy as np
import pandas as pd
import param

from scipy import fft, ndimage
from scipy.optimize import bisect, brentq

from .bath import BathSpec
from .config import options
from .exceptions import (
    ConfigurationError, CoverageError, DomainError, NotYetDefinedError, OutOfRangeError,
    SingularPropagatorError
)
from .green import GreenTable, default_horizon, green_ohmic_table, solve_green, v_matrix
from .moments import (
    MomentSeries, PointerBasis, compute_moments, high_t_moments_ohmic, pointer_basis,
    stationary_momentum_variance
)
from .phase_space import GaussianState, gaussian_convolve
from .util import (
    ensure_directory, fingerprint, header_line, min_eigenvalue, parallel_map, write_csv,
    write_json
)

# Zero-padding factor of the characteristic function in spectral propagation
SPECTRAL_PAD = 4

KERNELS = {'pointer': 0.5, 'quarter': 0.25}


class EvolutionContext(param.Parameterized):
    """
    Everything the propagator needs for one bath: Green's function,
    moments and pointer basis.
    """

    spec = param.ClassSelector(class_=BathSpec, constant=True)

    green = param.ClassSelector(class_=GreenTable, constant=True)

    moments = param.ClassSelector(class_=MomentSeries, constant=True)

    basis = param.ClassSelector(class_=PointerBasis, constant=True)

    def __init__(self, **params):
        super().__init__(**params)
        reference = fingerprint(self.spec)
        for name in ('green', 'moments'):
            table = getattr(self, name)
            if table.spec is not None and fingerprint(table.spec) != reference:
                raise ConfigurationError('%s table was computed for %r, not %r.'
                                         % (name, table.spec, self.spec))
        step = self.green.step
        index = np.rint(self.moments.t_grid / step)
        if (np.any(np.abs(index * step - self.moments.t_grid) > 1e-9 * step)
                or index[-1] > len(self.green.t_grid) - 1):
            raise ConfigurationError('Moment times are not a subset of the Green grid.')

    @classmethod
    def build(cls, spec, horizon=None, n_steps=2048, decimation=None, threads=None):
        """Run the full pipeline for a bath with an exponential cutoff."""
        horizon = default_horizon(spec) if horizon is None else horizon
        green = solve_green(spec, horizon, n_steps)
        moments = compute_moments(green, spec, decimation=decimation, threads=threads)
        basis = pointer_basis(stationary_momentum_variance(spec))
        return cls(spec=spec, green=green, moments=moments, basis=basis)

    @classmethod
    def white_noise(cls, zeta, beta, horizon, n_steps=4096, decimation=1):
        """
        Analytic context of a strictly Ohmic bath at high temperature:
        closed-form G, M(t) = T m(t) with white noise and B_inf = T.
        """
        spec = BathSpec(p=1.0, zeta=zeta, beta=beta, cutoff='none')
        green = green_ohmic_table(spec, horizon, n_steps)
        t_grid = green.t_grid[::decimation]
        m = high_t_moments_ohmic(zeta, t_grid, form='white_noise') / beta
        moments = MomentSeries(spec=spec, t_grid=t_grid, a=m[:, 0, 0], b=m[:, 1, 1],
                               c=m[:, 0, 1])
        return cls(spec=spec, green=green, moments=moments,
                   basis=pointer_basis(spec.temperature))

    @property
    def horizon(self):
        return self.moments.horizon

    @property
    def times(self):
        return self.moments.t_grid

    @property
    def gamma_inf(self):
        return self.basis.gamma_inf

    def moment_matrices(self):
        return self.moments.matrices

    def moment_matrix(self, t):
        if t == 0:
            return np.zeros((2, 2))
        return self.moments.matrix(t)

    def v(self, t):
        self.moments.matrix(t)  # horizon check
        return v_matrix(self.green, t)

    def phase_space_map(self, t):
        """V(t) for grid propagation, refused once det V has reached the floor."""
        v = self.v(t)
        limit = self.green.regular_horizon
        if t > limit + 1e-12 * max(limit, 1.0):
            raise SingularPropagatorError(
                'det V falls to %g after t=%g; cannot map a grid function to t=%g.'
                % (options.det_floor, limit, t))
        return v


class HighTemperatureLimit(param.Parameterized):
    """
    lim M(t)/T of a strictly Ohmic bath on a uniform time grid.

    Exposes the same interface as EvolutionContext to find_tc; in these
    units the pointer covariance Gamma_inf/T tends to diag(0, 1).
    """

    zeta = param.Number(default=1.0, bounds=(0, None), inclusive_bounds=(False, True),
                        constant=True)

    form = param.ObjectSelector(default='printed', objects=['printed', 'white_noise'],
                                constant=True)

    horizon = param.Number(default=None, allow_None=True, constant=True, doc="""
        Defaults to 20/zeta.""")

    n_steps = param.Integer(default=4000, bounds=(16, None), constant=True)

    gamma_inf = np.diag([0.0, 1.0])

    @property
    def times(self):
        horizon = 20.0 / self.zeta if self.horizon is None else self.horizon
        return np.linspace(0, horizon, self.n_steps + 1)

    def moment_matrices(self):
        return high_t_moments_ohmic(self.zeta, self.times, form=self.form)

    def moment_matrix(self, t):
        return high_t_moments_ohmic(self.zeta, t, form=self.form)


class LocalizationReport(param.Parameterized):
    """
    Outcome of the scan of the smallest eigenvalue of M(t) - Gamma_inf/2.

    ``t_c`` is the last upward crossing after which the criterion holds
    at every sampled time up to the horizon, or None.
    """

    t_c = param.Number(default=None, allow_None=True, constant=True)

    times = param.Array(constant=True)

    min_eig_series = param.Array(constant=True)

    crossings = param.List(default=[], constant=True, doc="""
        All (time, direction) sign changes of the criterion eigenvalue.""")

    horizon = param.Number(constant=True)

    horizon_limited = param.Boolean(default=True, constant=True)

    trend = param.ObjectSelector(default='increasing', objects=['increasing', 'decreasing'],
                                 constant=True, doc="""
        Direction of the eigenvalue over the last quarter of the horizon.""")

    kernel_onset = param.Number(default=None, allow_None=True, constant=True, doc="""
        Time after which M(t) - Gamma_inf/4 stays positive definite.""")

    husimi_time = param.Number(default=None, allow_None=True, constant=True, doc="""
        Time after which M(t) - Gamma_inf stays positive semidefinite.""")

    def to_dict(self):
        return {'t_c': self.t_c, 'horizon': self.horizon,
                'horizon_limited': self.horizon_limited, 'trend': self.trend,
                'kernel_onset': self.kernel_onset, 'husimi_time': self.husimi_time,
                'crossings': [{'t': t, 'direction': d} for t, d in self.crossings]}

    def to_json(self, path, header=None):
        record = self.to_dict()
        record['header'] = header or header_line()
        return write_json(record, path)

    def dframe(self):
        return pd.DataFrame({'t': self.times, 'min_eig': self.min_eig_series})


def positivity_criterion(m, basis):
    """
    Whether M - Gamma_inf/2 is positive semidefinite, and its smallest
    eigenvalue.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DomainError('Moment matrix must be 2x2, got shape %s.' % (m.shape,))
    scale = max(np.abs(m).max(), 1.0)
    if abs(m[0, 1] - m[1, 0]) > 1e-10 * scale:
        raise DomainError('Moment matrix is not symmetric: %s.' % m.tolist())
    gamma = basis.gamma_inf
    min_eig = float(min_eigenvalue(m - gamma / 2))
    return min_eig >= -options.psd_rtol * np.trace(gamma), min_eig


def _last_crossing(ctx, times, eig, shift, tol, rtol):
    """
    Refined time after which eig stays >= -tol, with all sign changes.
    """
    ok = eig >= -tol
    changes = np.flatnonzero(ok[1:] != ok[:-1])

    def func(t):
        return min_eigenvalue(ctx.moment_matrix(t) - shift) + tol

    crossings = []
    for i in changes:
        lo, hi = times[i], times[i + 1]
        t = bisect(func, lo, hi, xtol=rtol * hi) if func(lo) * func(hi) < 0 else hi
        crossings.append((float(t), 'up' if ok[i + 1] else 'down'))
    if not ok[-1]:
        return None, crossings
    if not len(changes):
        return float(times[0]), crossings
    return crossings[-1][0], crossings


def find_tc(ctx, rtol=1e-6):
    """
    Localization time of a context.

    Scans the smallest eigenvalue of M(t) - Gamma_inf/2 over the sampled
    times and refines the last crossing by bisection on the interpolated
    moments. The result is only guaranteed up to the horizon.

    Parameters
    ----------
    ctx: EvolutionContext or HighTemperatureLimit
        Anything exposing ``times``, ``gamma_inf``, ``moment_matrices()``
        and ``moment_matrix(t)``.
    rtol: float
        Relative bisection tolerance.

    Returns
    -------
    LocalizationReport
    """
    times = np.asarray(ctx.times, dtype=float)
    gamma = ctx.gamma_inf
    tol = options.psd_rtol * np.trace(gamma)
    matrices = ctx.moment_matrices()
    eig = min_eigenvalue(matrices - gamma / 2)
    t_c, crossings = _last_crossing(ctx, times, eig, gamma / 2, tol, rtol)
    onset, _ = _last_crossing(ctx, times, min_eigenvalue(matrices - gamma / 4),
                              gamma / 4, -tol, rtol)
    husimi, _ = _last_crossing(ctx, times, min_eigenvalue(matrices - gamma),
                               gamma, tol, rtol)
    late = eig[-max(2, len(eig) // 4):]
    trend = 'increasing' if late[-1] >= late[0] else 'decreasing'
    if t_c is None:
        param.main.param.warning('Criterion does not hold at the horizon t=%g.' % times[-1])
    return LocalizationReport(t_c=t_c, times=times, min_eig_series=eig,
                              crossings=crossings, horizon=float(times[-1]),
                              trend=trend, kernel_onset=onset, husimi_time=husimi)


def _universal_matrix(tau, form='printed'):
    m = high_t_moments_ohmic(1.0, tau, form=form)
    m[..., 1, 1] -= 0.5
    return m


def tau_c_universal(method='eigen', form='printed', tol=1e-9, tau_max=50.0, n=5000):
    """
    Scaled localization time zeta t_c of the infinite temperature Ohmic
    limit, where the criterion reduces to a zeta-independent 2x2 matrix.

    ``method='eigen'`` follows the smallest eigenvalue, ``'determinant'``
    the determinant; both refine the last sign change with Brent's method.
    """
    if method not in ('eigen', 'determinant'):
        raise DomainError("method must be 'eigen' or 'determinant', got %r." % method)
    if tau_max <= 0:
        raise DomainError('tau_max must be positive, got %g.' % tau_max)
    taus = np.linspace(0, tau_max, n + 1)[1:]
    if method == 'eigen':
        func = lambda t: min_eigenvalue(_universal_matrix(t, form))  # noqa
    else:
        func = lambda t: np.linalg.det(_universal_matrix(t, form))  # noqa
    values = func(taus)
    if method == 'determinant':
        diag = np.diagonal(_universal_matrix(taus, form), axis1=-2, axis2=-1)
        values = np.where(np.all(diag >= 0, axis=-1), values, -np.abs(values) - 1)
    negative = np.flatnonzero(values < 0)
    if len(negative) == 0 or negative[-1] == len(taus) - 1:
        raise OutOfRangeError('Criterion has no sign change on (0, %g]; raise tau_max.'
                              % tau_max)
    last = negative[-1]
    return float(brentq(func, taus[last], taus[last + 1], xtol=tol))


def _resample(w0, v):
    det = np.linalg.det(v)
    if det < options.det_floor:
        raise SingularPropagatorError('det V = %.3g is below the floor %g.'
                                      % (det, options.det_floor))
    grid = w0.grid
    x, p = grid.mesh()
    inv = np.linalg.inv(v)
    coords = np.array([((inv[0, 0] * x + inv[0, 1] * p) - grid.x_min) / grid.dx,
                       ((inv[1, 0] * x + inv[1, 1] * p) - grid.p_min) / grid.dp])
    values = ndimage.map_coordinates(w0.values, coords, order=3, mode='constant',
                                     cval=0.0) / abs(det)
    out = w0.derive(values)
    if abs(out.norm - w0.norm) > 1e-4:
        raise CoverageError('Phase-space map moved mass %.3g off the grid; widen the extents.'
                            % (w0.norm - out.norm))
    return out


def _spectral(w0, v, sigma_add):
    """
    Evaluate chi_t(k) = exp(-i k.(Vc - c)) chi_0(V^T k) exp(-k Sigma k/2)
    about the grid centre c and transform back.
    """
    if np.linalg.det(v) <= 0:
        raise SingularPropagatorError('det V = %.3g is not positive.' % np.linalg.det(v))
    grid = w0.grid
    shape = (SPECTRAL_PAD * grid.n_x, SPECTRAL_PAD * grid.n_p)
    h = grid.spacing
    centre = np.array([grid.x_min + grid.x_max, grid.p_min + grid.p_max]) / 2
    offset = centre - np.array([grid.x_min, grid.p_min])
    kx = 2 * np.pi * fft.fftshift(fft.fftfreq(shape[0], h[0]))
    kp = 2 * np.pi * fft.fftshift(fft.fftfreq(shape[1], h[1]))
    KX, KP = np.meshgrid(kx, kp, indexing='ij')
    phase = np.exp(1j * (KX * offset[0] + KP * offset[1]))
    chi0 = h[0] * h[1] * phase * fft.fftshift(fft.fft2(w0.values, s=shape))

    coords = np.array([(v[0, 0] * KX + v[1, 0] * KP - kx[0]) / (kx[1] - kx[0]),
                       (v[0, 1] * KX + v[1, 1] * KP - kp[0]) / (kp[1] - kp[0])])
    sample = lambda part: ndimage.map_coordinates(part, coords, order=3, mode='constant', cval=0.0)  # noqa
    chi = sample(chi0.real) + 1j * sample(chi0.imag)
    shift = v @ centre - centre
    s = sigma_add
    chi *= np.exp(-1j * (KX * shift[0] + KP * shift[1])
                  - 0.5 * (s[0, 0] * KX ** 2 + 2 * s[0, 1] * KX * KP + s[1, 1] * KP ** 2))
    data = chi / (phase * h[0] * h[1])
    values = fft.ifft2(fft.ifftshift(data)).real[:grid.n_x, :grid.n_p]
    out = w0.derive(values)
    if abs(out.norm - w0.norm) > 1e-4:
        raise CoverageError('Propagated function holds mass %.6g of %.6g; widen the extents.'
                            % (out.norm, w0.norm))
    return out


def _evolve(w0, v, sigma_add, method):
    method = options.propagation if method is None else method
    if method == 'resample':
        return gaussian_convolve(_resample(w0, v), sigma_add, check_mass=False)
    elif method == 'spectral':
        return _spectral(w0, v, sigma_add)
    raise DomainError("Unknown propagation method %r, expected 'resample' or 'spectral'."
                      % method)


def propagate(w0, ctx, t, method=None):
    """
    Propagate a Wigner function to time t.

    Parameters
    ----------
    w0: WignerGrid
        Initial Wigner function (s_order 0).
    ctx: EvolutionContext
        Bath tables.
    t: float
        Time within the horizon.
    method: str
        'resample' or 'spectral', defaults to ``options.propagation``.

    Returns
    -------
    WignerGrid

    Raises
    ------
    SingularPropagatorError
        Past the regular horizon of the Green table, where det V has
        reached ``options.det_floor``.
    """
    if w0.s_order != 0:
        raise DomainError('propagate expects an ordinary Wigner function, got s=%g.'
                          % w0.s_order)
    t = float(t)
    if t == 0:
        return w0.derive(w0.values.copy(), t=0.0)
    v = ctx.phase_space_map(t).v
    out = _evolve(w0, v, ctx.moment_matrix(t), method)
    return out.derive(out.values, t=t)


def propagate_gaussian(state, ctx, t):
    """Closed-form propagation (V d, V Sigma V^T + M(t)) of a Gaussian state."""
    t = float(t)
    if t == 0:
        return state
    v = ctx.v(t).v
    sigma = v @ state.sigma @ v.T + ctx.moment_matrix(t)
    return GaussianState(d=v @ state.d, sigma=sigma, strict=False)


def pointer_weight(w0, ctx, t, kernel='pointer', method=None):
    """
    Weight W_1 of the state over pointer states at time t.

    W_1 is the mapped initial function convolved with the Gaussian of
    covariance M(t) - Gamma_inf/2, so that convolving it once more with
    the pointer covariance Gamma_inf/2 gives back the propagated Wigner
    function. ``kernel='quarter'`` uses M(t) - Gamma_inf/4 instead.

    Raises
    ------
    NotYetDefinedError
        While the kernel covariance is not positive definite.
    SingularPropagatorError
        Past the regular horizon of the Green table.
    """
    if kernel not in KERNELS:
        raise DomainError('Unknown pointer kernel %r, expected one of %s.'
                          % (kernel, sorted(KERNELS)))
    if w0.s_order != 0:
        raise DomainError('pointer_weight expects an ordinary Wigner function, got s=%g.'
                          % w0.s_order)
    t = float(t)
    v = ctx.phase_space_map(t).v
    m = ctx.moment_matrix(t)
    sigma_add = m - KERNELS[kernel] * ctx.gamma_inf
    min_eig = float(min_eigenvalue(sigma_add))
    if min_eig <= 0:
        raise NotYetDefinedError(
            'Pointer weight is not defined at t=%g: kernel covariance has eigenvalue %.3g.'
            % (t, min_eig), min_eig=min_eig, t=t)
    out = _evolve(w0, v, sigma_add, method)
    return out.derive(out.values, s_order=1.0, t=t)


class Figure1Study(param.Parameterized):
    """Localization time against coupling in the infinite temperature Ohmic limit."""

    table = param.DataFrame(constant=True, doc="""
        Columns zeta, log10_zeta, Tc, log10_Tc.""")

    slope = param.Number(constant=True)

    tau_c = param.Number(constant=True)

    pipeline = param.DataFrame(default=None, allow_None=True, constant=True, doc="""
        Full-pipeline localization times at finite temperature.""")

    def write(self, out_dir):
        ensure_directory(out_dir)
        header = header_line(tau_c=self.tau_c, slope=self.slope)
        paths = [write_csv(self.table, os.path.join(out_dir, 'figure1.csv'), header)]
        script = os.path.join(out_dir, 'figure1.gp')
        with open(script, 'w') as f:
            f.write(GNUPLOT_TEMPLATE % {'header': header, 'slope': self.slope,
                                        'intercept': np.log10(self.tau_c)})
        paths.append(script)
        if self.pipeline is not None:
            paths.append(write_csv(self.pipeline, os.path.join(out_dir, 'figure1_pipeline.csv'),
                                   header))
        return paths


GNUPLOT_TEMPLATE = """\
%(header)s
set datafile separator ','
set key autotitle columnhead
set xlabel 'log10 zeta'
set ylabel 'log10 T_c'
set grid
fit_line(x) = %(intercept).12g + %(slope).12g * x
plot 'figure1.csv' using 2:4 with points pointtype 7 title 'T_c', \\
     fit_line(x) with lines title sprintf('slope %%.4f', %(slope).12g)
"""


def _pipeline_run(zeta, beta, omega_c, reference, n_steps, threads):
    horizon = 4 * reference / zeta
    # at least two steps per cutoff time
    n_steps = max(n_steps, int(np.ceil(2 * omega_c * horizon)))
    spec = BathSpec(p=1.0, zeta=zeta, beta=beta, omega_c=omega_c)
    ctx = EvolutionContext.build(spec, horizon=horizon, n_steps=n_steps, threads=threads)
    t_c = find_tc(ctx).t_c
    expected = reference / zeta
    return {'zeta': zeta, 'beta': beta, 'omega_c': omega_c,
            'Tc': np.nan if t_c is None else t_c, 'Tc_limit': expected,
            'relative_error': np.nan if t_c is None else abs(t_c - expected) / expected}


def figure1_study(zetas=None, pipeline_zetas=(0.5, 2.0), pipeline_beta=1e-3,
                  pipeline_omega_c=20.0, pipeline_cutoff_ratio=200.0, pipeline_steps=2048,
                  threads=None):
    """
    Localization time T_c(zeta) of the infinite temperature Ohmic limit
    and its log-log slope.

    The pipeline runs compare full finite temperature localization times
    with the white-noise limit. The cutoff correction to T_c falls off like
    log(omega_c/zeta) zeta/omega_c, so each run uses
    omega_c = max(pipeline_omega_c, pipeline_cutoff_ratio * zeta) and
    beta = min(pipeline_beta, 0.2/omega_c).
    """
    zetas = np.logspace(-1, 1, 9) if zetas is None else np.asarray(zetas, dtype=float)
    if np.any(zetas <= 0):
        raise DomainError('figure1_study requires positive couplings.')
    tcs = parallel_map(lambda z: find_tc(HighTemperatureLimit(zeta=z)).t_c, zetas, threads)
    if any(t is None for t in tcs):
        raise ConfigurationError('Localization time not reached within the horizon.')
    tcs = np.array(tcs)
    table = pd.DataFrame({'zeta': zetas, 'log10_zeta': np.log10(zetas), 'Tc': tcs,
                          'log10_Tc': np.log10(tcs)})
    slope = float(np.polyfit(table.log10_zeta, table.log10_Tc, 1)[0])
    pipeline = None
    if pipeline_zetas:
        reference = tau_c_universal(form='white_noise')
        rows = []
        for z in pipeline_zetas:
            omega_c = max(pipeline_omega_c, pipeline_cutoff_ratio * z)
            beta = min(pipeline_beta, 0.2 / omega_c)
            rows.append(_pipeline_run(z, beta, omega_c, reference, pipeline_steps, threads))
        pipeline = pd.DataFrame(rows)
    return Figure1Study(table=table, slope=slope, tau_c=tau_c_universal(), pipeline=pipeline)
