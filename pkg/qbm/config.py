"""
Process-wide numerical options and the flat key-value config file reader.
"""

import os

import param

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .exceptions import ConfigurationError


class qbm_options(param.Parameterized):
    """
    Numerical defaults shared by all modules.

    Values are read at call time, so assigning to ``qbm.config.options``
    changes the behaviour of every subsequent computation.
    """

    quad_epsabs = param.Number(default=1e-10, bounds=(0, None), doc="""
        Absolute tolerance of every adaptive quadrature.""")

    quad_epsrel = param.Number(default=1e-8, bounds=(0, None), doc="""
        Relative tolerance of every adaptive quadrature.""")

    quad_limit = param.Integer(default=400, bounds=(50, None), doc="""
        Maximum number of subintervals per adaptive quadrature.""")

    coth_series_threshold = param.Number(default=1e-3, bounds=(0, 0.1), doc="""
        Below this argument coth(x) is evaluated from its Laurent series.""")

    image_terms = param.Integer(default=256, bounds=(8, None), doc="""
        Explicit terms of the thermal image sum used for noise kernel tables
        before the Euler-Maclaurin tail takes over.""")

    talbot_nodes = param.Integer(default=24, bounds=(8, 200), doc="""
        Number of nodes of the fixed Talbot contour. Round-off in the
        transform is amplified by about exp(0.4 nodes).""")

    dehoog_degree = param.Integer(default=20, bounds=(4, 100), doc="""
        Order M of the de Hoog continued fraction, which samples 2M+1
        points of the Bromwich line.""")

    residual_tol = param.Number(default=1e-6, bounds=(0, None), doc="""
        Bound on the Volterra residual relative to max|G''|.""")

    max_refinements = param.Integer(default=2, bounds=(0, 8), doc="""
        Number of step halvings solve_green attempts before giving up.""")

    decimation = param.Integer(default=8, bounds=(1, None), doc="""
        Moment output times are every n-th point of the Green's function grid.""")

    psd_rtol = param.Number(default=1e-12, bounds=(0, None), doc="""
        Eigenvalues down to -psd_rtol * trace(Gamma_inf) count as non-negative.""")

    kernel_samples = param.Number(default=4, bounds=(0, None), doc="""
        Minimum number of grid samples per standard deviation of a
        convolution kernel along each axis.""")

    det_floor = param.Number(default=1e-12, bounds=(0, None), doc="""
        Smallest admissible det V(t) for phase-space propagation.""")

    propagation = param.ObjectSelector(default='spectral',
                                       objects=['resample', 'spectral'], doc="""
        How propagate applies the linear map V(t): inverse-map bicubic
        resampling in phase space or evaluation of the characteristic
        function at V^T k.""")

    threads = param.Integer(default=None, allow_None=True, bounds=(1, None), doc="""
        Cap on worker threads; None lets concurrent.futures decide.""")


options = qbm_options(name='options')


_FLOAT_KEYS = ('p', 'zeta', 'beta', 'omega_c', 'tmax', 'x0', 'extent')
_INT_KEYS = ('n_steps', 'decimation', 'threads', 'grid_n')


def load_config_file(path):
    """
    Read a flat key-value config file.

    The format is the flat subset of TOML: one ``key = value`` per line,
    ``#`` comments, no tables. Dashes in keys are normalised to underscores
    so that file keys mirror the command line flags.

    Parameters
    ----------
    path: str
        Path of the config file.

    Returns
    -------
    dict
        Mapping of normalised keys to values.
    """
    if not os.path.isfile(path):
        raise ConfigurationError('Config file %r does not exist.' % path)
    with open(path, 'rb') as f:
        try:
            raw = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError('Could not parse config file %r: %s' % (path, e))
    values = {}
    for key, value in raw.items():
        if isinstance(value, dict):
            raise ConfigurationError(
                'Config file %r must be flat, found table %r.' % (path, key))
        key = key.replace('-', '_')
        if key in _FLOAT_KEYS and isinstance(value, (int, float)):
            value = float(value)
        elif key in _INT_KEYS and isinstance(value, float) and value.is_integer():
            value = int(value)
        values[key] = value
    return values
