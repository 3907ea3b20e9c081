"""
Provides numeric and file helpers shared by the qbm modules
"""

import json
import os

from concurrent.futures import ThreadPoolExecutor
from functools import wraps

import numpy as np
import pandas as pd
import param
import holoviews as hv

from packaging.version import Version

from .config import options
from .exceptions import ConfigurationError, DomainError

np_version = Version(np.__version__)
hv_version = Version(hv.__version__)

# numpy 2 renamed trapz
if np_version >= Version('2.0.0'):
    trapezoid = np.trapezoid
else:
    trapezoid = np.trapz


def with_hv_extension(func, extension='bokeh', logo=False):
    """If hv.extension is not loaded, load before calling function"""
    @wraps(func)
    def wrapper(*args, **kwargs):
        if extension and not getattr(hv.extension, '_loaded', False):
            hv.extension(extension, logo=logo)
        return func(*args, **kwargs)
    return wrapper


def trapezoid2d(values, x, p):
    """Trapezoid-rule integral of a 2D array sampled on the x (rows), p (columns) axes."""
    return trapezoid(trapezoid(values, p, axis=1), x)


def parallel_map(func, items, threads=None):
    """
    Map func over items with a thread pool, preserving input order.

    ``threads`` defaults to ``options.threads``; a value of 1 evaluates
    inline without spawning a pool.
    """
    items = list(items)
    threads = options.threads if threads is None else threads
    if threads == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, items))


def check_symmetric(m, name='matrix', rtol=1e-10):
    m = np.asarray(m, dtype=float)
    if m.shape != (2, 2):
        raise DomainError('%s must be a 2x2 matrix, got shape %s.' % (name, m.shape))
    scale = max(np.abs(m).max(), 1e-300)
    if abs(m[0, 1] - m[1, 0]) > rtol * scale:
        raise DomainError('%s is not symmetric: off-diagonal entries %g and %g.'
                          % (name, m[0, 1], m[1, 0]))
    return 0.5 * (m + m.T)


def min_eigenvalue(m):
    """Smallest eigenvalue of a symmetric 2x2 matrix or a stack of them."""
    m = np.asarray(m, dtype=float)
    a, b, c = m[..., 0, 0], 0.5 * (m[..., 0, 1] + m[..., 1, 0]), m[..., 1, 1]
    mean = 0.5 * (a + c)
    radius = np.hypot(0.5 * (a - c), b)
    return mean - radius


def check_uniform_grid(t, name='t_grid', start_at_zero=True):
    """
    Validate a uniform, strictly increasing time grid and return its spacing.
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or len(t) < 2:
        raise ConfigurationError('%s must be one-dimensional with at least two samples.' % name)
    if start_at_zero and t[0] != 0:
        raise ConfigurationError('%s must start at 0, starts at %g.' % (name, t[0]))
    h = np.diff(t)
    if np.any(h <= 0):
        raise ConfigurationError('%s must be strictly increasing.' % name)
    step = (t[-1] - t[0]) / (len(t) - 1)
    if np.max(np.abs(h - step)) > 1e-9 * max(step, abs(t[-1])):
        raise ConfigurationError('%s must be uniformly spaced.' % name)
    return step


def header_line(obj=None, **extra):
    """
    Build the one-line fingerprint comment written at the top of output files.

    Parameterized objects contribute their parameter values; keyword
    arguments are appended verbatim.
    """
    fields = {}
    if obj is not None:
        fields.update(fingerprint(obj))
    fields.update(extra)
    body = ' '.join('%s=%s' % (k, _format_value(v)) for k, v in fields.items())
    return '# qbm %s' % body


def fingerprint(obj):
    values = obj.param.values() if hasattr(obj.param, 'values') else obj.param.get_param_values()
    values = dict(values)
    values.pop('name', None)
    return {k: v for k, v in sorted(values.items()) if not isinstance(v, np.ndarray)}


def _format_value(value):
    if isinstance(value, float):
        return '%.12g' % value
    return str(value)


def ensure_directory(path):
    """Create ``path`` if needed and fail with OSError when it is not writable."""
    os.makedirs(path, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError('Output directory %r is not writable.' % path)
    return path


def write_csv(df, path, header=None):
    """Write a DataFrame as CSV preceded by an optional comment header line."""
    with open(path, 'w', newline='') as f:
        if header:
            f.write(header.rstrip('\n') + '\n')
        df.to_csv(f, index=False, float_format='%.12g')
    return path


def read_csv(path):
    """Read a CSV written by write_csv, skipping the comment header."""
    return pd.read_csv(path, comment='#')


def write_json(record, path):
    with open(path, 'w') as f:
        json.dump(record, f, indent=2, sort_keys=True, default=_json_default)
        f.write('\n')
    return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError('%s type object is not JSON serializable.' % type(obj).__name__)


def warn(message):
    """Emit a warning through param's logger."""
    param.main.param.warning(message)
