"""
Quasiprobability functions on a phase-space grid.

Wigner Gaussians are parameterised by their covariance Sigma with density
proportional to exp(-(xi-d) Sigma^-1 (xi-d)/2); the vacuum has
Sigma = I/2. The s-ordered family is built relative to a pointer basis:
lowering s by one unit convolves with the pointer covariance Gamma_inf/2,
so s = -1 is the pointer Husimi function.
"""

import json
import os

import numpy as np
import pandas as pd
import param

from scipy import fft, linalg, special

from .config import options
from .exceptions import (
    ConventionViolation, CoverageError, DirectionError, DomainError, ResolutionError
)
from .util import (
    check_symmetric, header_line, min_eigenvalue, trapezoid2d, warn, write_csv, write_json
)

# Relative tolerance of the Heisenberg bound det Sigma >= 1/4
PURITY_RTOL = 1e-9


def _is_power_of_two(n):
    return n >= 2 and not (n & (n - 1))


class GridSpec(param.Parameterized):
    """
    Rectangular phase-space grid with inclusive end points.

    The first array index runs over position, the second over momentum.
    """

    n_x = param.Integer(default=512, bounds=(2, None), constant=True)

    n_p = param.Integer(default=512, bounds=(2, None), constant=True)

    x_min = param.Number(default=-10.0, constant=True)

    x_max = param.Number(default=10.0, constant=True)

    p_min = param.Number(default=-10.0, constant=True)

    p_max = param.Number(default=10.0, constant=True)

    def __init__(self, **params):
        super().__init__(**params)
        for name in ('n_x', 'n_p'):
            if not _is_power_of_two(getattr(self, name)):
                raise DomainError('%s must be a power of two, got %d.'
                                  % (name, getattr(self, name)))
        if self.x_max <= self.x_min or self.p_max <= self.p_min:
            raise DomainError('Grid extents must be increasing, got x [%g, %g], p [%g, %g].'
                              % (self.x_min, self.x_max, self.p_min, self.p_max))

    @classmethod
    def covering(cls, sigmas, centers=((0, 0),), n=512, n_sigma=6.0, guard=3.0):
        """
        Square-sampled grid covering every center +- (n_sigma + guard)
        standard deviations of the widest covariance.
        """
        sigmas = np.asarray(sigmas, dtype=float).reshape(-1, 2, 2)
        std = np.sqrt(np.max(np.diagonal(sigmas, axis1=1, axis2=2), axis=0))
        reach = np.max(np.abs(np.asarray(centers, dtype=float)), axis=0)
        half = reach + (n_sigma + guard) * std
        return cls(n_x=n, n_p=n, x_min=-half[0], x_max=half[0],
                   p_min=-half[1], p_max=half[1])

    @property
    def x(self):
        return np.linspace(self.x_min, self.x_max, self.n_x)

    @property
    def p(self):
        return np.linspace(self.p_min, self.p_max, self.n_p)

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.n_x - 1)

    @property
    def dp(self):
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def spacing(self):
        return np.array([self.dx, self.dp])

    def mesh(self):
        return np.meshgrid(self.x, self.p, indexing='ij')

    def to_dict(self):
        return {k: getattr(self, k) for k in ('n_x', 'n_p', 'x_min', 'x_max', 'p_min', 'p_max')}


class WignerGrid(param.Parameterized):
    """An s-ordered quasiprobability function sampled on a GridSpec."""

    grid = param.ClassSelector(class_=GridSpec, constant=True)

    values = param.Array(constant=True)

    s_order = param.Number(default=0.0, bounds=(-1, 1), constant=True)

    t = param.Number(default=0.0, constant=True, doc="""
        Evolution time the function refers to.""")

    def __init__(self, **params):
        super().__init__(**params)
        shape = (self.grid.n_x, self.grid.n_p)
        if self.values.shape != shape:
            raise DomainError('Values of shape %s do not match grid shape %s.'
                              % (self.values.shape, shape))

    @property
    def norm(self):
        return float(trapezoid2d(self.values, self.grid.x, self.grid.p))

    def derive(self, values, **params):
        """New WignerGrid on the same grid, inheriting s_order and t."""
        params = dict({'s_order': self.s_order, 't': self.t}, **params)
        return WignerGrid(grid=self.grid, values=values, **params)

    def dframe(self):
        x, p = self.grid.mesh()
        return pd.DataFrame({'x': x.ravel(), 'p': p.ravel(), 'value': self.values.ravel()})

    def to_csv(self, path, header=None):
        header = header or header_line(s_order=self.s_order, t=self.t)
        return write_csv(self.dframe(), path, header)

    def to_raster(self, stem, header=None):
        """
        Write ``<stem>.bin`` (row-major float64, shape (n_x, n_p)) and the
        ``<stem>.json`` sidecar with the extents.
        """
        np.ascontiguousarray(self.values, dtype='<f8').tofile(stem + '.bin')
        record = dict(self.grid.to_dict(), s_order=self.s_order, t=self.t,
                      header=header or header_line(s_order=self.s_order, t=self.t))
        write_json(record, stem + '.json')
        return stem + '.bin', stem + '.json'


def read_raster(stem):
    """Inverse of WignerGrid.to_raster."""
    with open(stem + '.json') as f:
        record = json.load(f)
    grid = GridSpec(**{k: record[k] for k in ('n_x', 'n_p', 'x_min', 'x_max', 'p_min', 'p_max')})
    if not os.path.isfile(stem + '.bin'):
        raise FileNotFoundError('Raster data %r is missing.' % (stem + '.bin'))
    values = np.fromfile(stem + '.bin', dtype='<f8').reshape(grid.n_x, grid.n_p)
    return WignerGrid(grid=grid, values=values, s_order=record['s_order'],
                      t=record.get('t', 0.0))


class GaussianState(param.Parameterized):
    """
    Gaussian state with first moments d = (<X>, <P>) and Wigner covariance
    Sigma, subject to det Sigma >= 1/4.

    ``strict=False`` skips the uncertainty bound, for covariances produced
    by the contracting propagation map.
    """

    d = param.Array(default=np.zeros(2), constant=True)

    sigma = param.Array(default=0.5 * np.eye(2), constant=True)

    def __init__(self, strict=True, **params):
        if 'd' in params:
            params['d'] = np.asarray(params['d'], dtype=float).reshape(2)
        if 'sigma' in params:
            params['sigma'] = check_symmetric(params['sigma'], 'Sigma')
        super().__init__(**params)
        if min_eigenvalue(self.sigma) <= 0:
            raise DomainError('Sigma must be positive definite, got %s.' % self.sigma.tolist())
        if strict and np.linalg.det(self.sigma) < 0.25 * (1 - PURITY_RTOL):
            raise DomainError('Sigma violates the uncertainty bound: det = %g < 1/4.'
                              % np.linalg.det(self.sigma))

    @classmethod
    def vacuum(cls, d=(0, 0)):
        return cls(d=d, sigma=0.5 * np.eye(2))

    @classmethod
    def pointer(cls, basis, d=(0, 0)):
        """Pointer state centred at d, Sigma = Gamma_inf/2."""
        return cls(d=d, sigma=basis.gamma_inf / 2)

    @property
    def pure(self):
        return abs(np.linalg.det(self.sigma) - 0.25) <= 0.25 * PURITY_RTOL


def _gaussian_density(grid, d, sigma):
    x, p = grid.mesh()
    dx, dp = x - d[0], p - d[1]
    inv = np.linalg.inv(sigma)
    quad = inv[0, 0] * dx ** 2 + 2 * inv[0, 1] * dx * dp + inv[1, 1] * dp ** 2
    return np.exp(-0.5 * quad) / (2 * np.pi * np.sqrt(np.linalg.det(sigma)))


def _check_coverage(values, grid, tol, what):
    mass = trapezoid2d(values, grid.x, grid.p)
    if abs(mass - 1) > tol:
        raise CoverageError('%s holds mass %.9g on the grid x [%g, %g], p [%g, %g]; '
                            'widen the extents.' % (what, mass, grid.x_min, grid.x_max,
                                                     grid.p_min, grid.p_max))
    return mass


def gaussian_wigner(state, grid):
    """Sample the Wigner function of a Gaussian state; the grid must hold its mass."""
    values = _gaussian_density(grid, state.d, state.sigma)
    _check_coverage(values, grid, 1e-6, 'Gaussian state')
    return WignerGrid(grid=grid, values=values, s_order=0.0)


def cat_wigner(x0, sigma, grid):
    """
    Wigner function of the even superposition of a pure Gaussian displaced
    to +x0 and -x0 along position.

        W = [W_s(xi - d) + W_s(xi + d) + 2 W_s(xi) cos(2 x0 p)]
            / (2 (1 + exp(-2 x0**2 Sigma_pp)))

    with d = (x0, 0) and W_s the Gaussian of covariance Sigma.
    """
    sigma = check_symmetric(sigma, 'Sigma')
    state = GaussianState(sigma=sigma)
    if not state.pure:
        raise DomainError('cat_wigner needs a pure Gaussian (det Sigma = 1/4), got det %g.'
                          % np.linalg.det(sigma))
    x0 = float(x0)
    overlap = special.erfc(abs(x0) / np.sqrt(2 * sigma[0, 0]))
    if overlap > 0.1:
        warn('Cat lobes at +-%g overlap by %.2f in L1; the superposition is ill-conditioned.'
             % (x0, overlap))
    d = np.array([x0, 0.0])
    _, p = grid.mesh()
    values = (_gaussian_density(grid, d, sigma) + _gaussian_density(grid, -d, sigma)
              + 2 * _gaussian_density(grid, np.zeros(2), sigma) * np.cos(2 * x0 * p))
    values /= 2 * (1 + np.exp(-2 * x0 ** 2 * sigma[1, 1]))
    _check_coverage(values, grid, 1e-6, 'Cat state')
    return WignerGrid(grid=grid, values=values, s_order=0.0)


def _pad_length(n, std, spacing):
    return fft.next_fast_len(n + 2 * int(np.ceil(4 * std / spacing)))


def gaussian_convolve(w, sigma_add, check_mass=True):
    """
    Convolve w with the normalised Gaussian of covariance sigma_add.

    The product with the Gaussian characteristic factor is taken on a
    zero-padded real FFT so the periodic wrap never reaches the data.

    Raises
    ------
    ResolutionError
        When a nonzero kernel has fewer than ``options.kernel_samples``
        grid samples per standard deviation along an axis.
    """
    sigma_add = check_symmetric(sigma_add, 'sigma_add')
    scale = max(np.abs(sigma_add).max(), np.finfo(float).tiny)
    if min_eigenvalue(sigma_add) < -1e-12 * scale:
        raise DomainError('sigma_add must be positive semidefinite, got %s.'
                          % sigma_add.tolist())
    if not np.any(sigma_add):
        return w.derive(w.values.copy())
    grid = w.grid
    std = np.sqrt(np.clip(np.diag(sigma_add), 0, None))
    for axis, (s, h) in enumerate(zip(std, grid.spacing)):
        if 0 < s < options.kernel_samples * h:
            raise ResolutionError(
                'Kernel std %g along %s is under-resolved by spacing %g; need at least '
                '%g samples per standard deviation.'
                % (s, 'xp'[axis], h, options.kernel_samples))
    shape = (_pad_length(grid.n_x, std[0], grid.dx), _pad_length(grid.n_p, std[1], grid.dp))
    spectrum = fft.rfft2(w.values, s=shape)
    kx = 2 * np.pi * fft.fftfreq(shape[0], grid.dx)[:, None]
    kp = 2 * np.pi * fft.rfftfreq(shape[1], grid.dp)[None, :]
    exponent = sigma_add[0, 0] * kx ** 2 + 2 * sigma_add[0, 1] * kx * kp + sigma_add[1, 1] * kp ** 2
    values = fft.irfft2(spectrum * np.exp(-0.5 * exponent), s=shape)[:grid.n_x, :grid.n_p]
    out = w.derive(values)
    if check_mass and abs(out.norm - w.norm) > 1e-6:
        raise CoverageError('Convolution moved mass %.3g off the grid; widen the extents.'
                            % (w.norm - out.norm))
    return out


def resolve_s_step(basis, family=None):
    """
    Covariance added per unit decrease of s.

    The step is c Gamma_inf/2 with c the largest factor for which every
    member Sigma of the state family survives deconvolution,
    Sigma - c Gamma_inf/2 >= 0. For one member that factor is the
    smallest generalized eigenvalue of the pencil (Sigma, Gamma_inf/2).

    Parameters
    ----------
    basis: PointerBasis
        Pointer basis providing Gamma_inf.
    family: list of 2x2 arrays
        Wigner covariances of the family, defaults to the scaled pointer
        states l Gamma_inf/2 for l in [1, 4]. The pointer state itself
        bounds the step at Gamma_inf/2; squeezed or rotated members
        lower it.

    Returns
    -------
    2x2 array
    """
    half = basis.gamma_inf / 2
    if family is None:
        family = [scale * half for scale in np.linspace(1, 4, 7)]
    factors = []
    for sigma in family:
        sigma = check_symmetric(sigma, 'Sigma')
        factors.append(linalg.eigh(sigma, half, eigvals_only=True)[0])
    c = min(factors)
    if c <= 0:
        raise DomainError('State family contains a covariance that is not positive '
                          'definite; no s-step exists.')
    return c * half


def s_transform(w, s_from, s_to, basis):
    """Smooth an s-ordered function from s_from down to s_to < s_from."""
    for s in (s_from, s_to):
        if not -1 <= s <= 1:
            raise DomainError('s must lie in [-1, 1], got %g.' % s)
    if s_to >= s_from:
        raise DirectionError('s_transform only lowers s; got %g -> %g.' % (s_from, s_to))
    if abs(w.s_order - s_from) > 1e-12:
        raise DomainError('Grid has s_order %g, not s_from = %g.' % (w.s_order, s_from))
    out = gaussian_convolve(w, (s_from - s_to) * resolve_s_step(basis))
    return out.derive(out.values, s_order=s_to)


def husimi_pointer(w, basis):
    """
    Husimi function in the pointer basis, W convolved with Gamma_inf/2.

    Raises
    ------
    ConventionViolation
        If the result is negative beyond 1e-9 of its maximum.
    """
    if w.s_order != 0:
        raise DomainError('husimi_pointer expects an ordinary Wigner function, got s=%g.'
                          % w.s_order)
    out = gaussian_convolve(w, basis.gamma_inf / 2)
    peak = out.values.max()
    if out.values.min() < -1e-9 * peak:
        raise ConventionViolation('Husimi function is negative: min %.3g, max %.3g.'
                                  % (out.values.min(), peak))
    return out.derive(out.values, s_order=-1.0)


def pointer_overlap(xi, xi_prime, basis):
    """|<psi_xi|psi_xi'>|**2 = exp(-D Gamma_inf^-1 D / 2) with D = xi - xi'."""
    delta = np.asarray(xi, dtype=float) - np.asarray(xi_prime, dtype=float)
    inv = np.diag([basis.b_inf, 1.0 / basis.b_inf])
    return float(np.exp(-0.5 * delta @ inv @ delta))


def negativity_volume(w):
    return float(trapezoid2d(np.clip(-w.values, 0, None), w.grid.x, w.grid.p))


def moments_from_grid(w):
    """
    First moments and covariance of a grid function by trapezoid quadrature.

    Returns
    -------
    (d, sigma)
    """
    x, p = w.grid.mesh()
    integrate = lambda f: trapezoid2d(f * w.values, w.grid.x, w.grid.p)  # noqa
    norm = integrate(1.0)
    d = np.array([integrate(x), integrate(p)]) / norm
    dx, dp = x - d[0], p - d[1]
    sxx, sxp, spp = (integrate(v) / norm for v in (dx * dx, dx * dp, dp * dp))
    return d, np.array([[sxx, sxp], [sxp, spp]])
