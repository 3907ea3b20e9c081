"""
Command line interface.

    qbm green|kernel|moments|tc|evolve|figure1 [options]

Every command reads an optional flat config file (``--config``), lets
flags override its values and writes its artifacts to ``--out``. Exit
codes: 0 success, 2 usage, 3 I/O, 4 domain or range, 5 numerical failure.
"""

import argparse
import logging
import os
import sys

import numpy as np
import pandas as pd
import param

from .bath import BathSpec, kernel_table
from .config import load_config_file, options
from .decoherence import (
    EvolutionContext, figure1_study, find_tc, pointer_weight, propagate, propagate_gaussian,
    tau_c_universal
)
from .exceptions import NotYetDefinedError, QBMError
from .green import default_horizon, inverse_laplace_check, solve_green
from .moments import compute_moments, pointer_basis, stationary_momentum_variance
from .phase_space import GaussianState, GridSpec, cat_wigner, gaussian_wigner, negativity_volume
from .util import ensure_directory, header_line, write_csv, write_json

EXIT_IO = 3
EXIT_DOMAIN = 4

COMMANDS = ('green', 'kernel', 'moments', 'tc', 'evolve', 'figure1')


class RunConfig(param.Parameterized):
    """Resolved configuration of one command invocation."""

    command = param.ObjectSelector(default='green', objects=list(COMMANDS))

    p = param.Number(default=None, allow_None=True)

    zeta = param.Number(default=None, allow_None=True)

    beta = param.Number(default=None, allow_None=True)

    omega_c = param.Number(default=None, allow_None=True)

    cutoff = param.ObjectSelector(default='exponential', objects=['exponential', 'none'])

    tmax = param.Number(default=None, allow_None=True, doc="""
        Horizon of the Green's function; defaults to the bath time scales.""")

    n_steps = param.Integer(default=2048, bounds=(64, None))

    decimation = param.Integer(default=8, bounds=(1, None))

    threads = param.Integer(default=None, allow_None=True, bounds=(1, None))

    out = param.String(default='.')

    check = param.ObjectSelector(default=None, allow_None=True,
                                 objects=[None, 'talbot', 'dehoog'])

    state = param.ObjectSelector(default='cat', objects=['cat', 'gaussian'])

    x0 = param.Number(default=3.0)

    times = param.List(default=[])

    grid_n = param.Integer(default=256, bounds=(16, None))

    extent = param.Number(default=None, allow_None=True, doc="""
        Half-width of the square phase-space grid; sized automatically when unset.""")

    zetas = param.List(default=[])

    pipeline = param.Boolean(default=True)

    _bath_keys = ('p', 'zeta', 'beta')

    def bath(self):
        return BathSpec(p=self.p, zeta=self.zeta, beta=self.beta, omega_c=self.omega_c,
                        cutoff=self.cutoff)

    def header(self):
        return header_line(self)

    def path(self, name):
        return os.path.join(self.out, name)


def _float_list(text):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got %r' % text)


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='flat key = value config file')
    common.add_argument('--out', help='output directory (default: current directory)')
    common.add_argument('--threads', type=int, help='cap on worker threads')
    verbosity = common.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true', help='log progress and debug output')
    verbosity.add_argument('--quiet', action='store_true', help='log errors only')

    bath = argparse.ArgumentParser(add_help=False)
    bath.add_argument('--p', type=float, help='small-frequency exponent, 0 < p < 2')
    bath.add_argument('--zeta', type=float, help='coupling strength')
    bath.add_argument('--beta', type=float, help='inverse temperature')
    bath.add_argument('--omega-c', type=float, help='cutoff frequency')
    bath.add_argument('--cutoff', choices=['exponential', 'none'])
    bath.add_argument('--tmax', type=float, help='horizon of the Green function')
    bath.add_argument('--n-steps', type=int, help='time steps of the Green function')
    bath.add_argument('--decimation', type=int, help='moment output every n-th step')

    parser = argparse.ArgumentParser(
        prog='qbm', description='Exact decoherence of a free quantum Brownian particle.')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    green = sub.add_parser('green', parents=[common, bath], help="solve the Green's function")
    green.add_argument('--check', choices=['talbot', 'dehoog'],
                       help='compare with Laplace inversion')
    sub.add_parser('kernel', parents=[common, bath], help='tabulate damping and noise kernels')
    sub.add_parser('moments', parents=[common, bath], help='second moments and pointer basis')
    sub.add_parser('tc', parents=[common, bath], help='localization time')
    evolve = sub.add_parser('evolve', parents=[common, bath], help='propagate an initial state')
    evolve.add_argument('--state', choices=['cat', 'gaussian'])
    evolve.add_argument('--x0', type=float, help='displacement of the initial state')
    evolve.add_argument('--times', type=_float_list, help='comma separated output times')
    evolve.add_argument('--grid-n', type=int, help='samples per phase-space axis')
    evolve.add_argument('--extent', type=float, help='half-width of the phase-space grid')
    figure1 = sub.add_parser('figure1', parents=[common], help='localization time against coupling')
    figure1.add_argument('--zetas', type=_float_list, help='comma separated couplings')
    figure1.add_argument('--no-pipeline', dest='pipeline', action='store_false', default=None,
                         help='skip the finite temperature pipeline runs')
    return parser


def resolve_config(args, parser):
    """Merge config file values and flags into a RunConfig; flags win."""
    values = load_config_file(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in ('config', 'verbose', 'quiet') or value is None:
            continue
        values[key] = value
    values['command'] = args.command
    unknown = set(values) - set(RunConfig.param)
    if unknown:
        parser.error('unknown config keys: %s' % ', '.join(sorted(unknown)))
    if args.command != 'figure1':
        missing = [k for k in RunConfig._bath_keys if values.get(k) is None]
        if missing:
            parser.error('missing required bath parameters: %s'
                         % ', '.join('--' + k for k in missing))
    return RunConfig(**values)


def _context(config):
    spec = config.bath()
    horizon = config.tmax or default_horizon(spec)
    if spec.strictly_ohmic:
        return EvolutionContext.white_noise(spec.zeta, spec.beta, horizon,
                                            n_steps=config.n_steps,
                                            decimation=config.decimation)
    return EvolutionContext.build(spec, horizon, config.n_steps, config.decimation,
                                  config.threads)


def cmd_green(config):
    spec = config.bath()
    table = solve_green(spec, config.tmax, config.n_steps)
    columns = {}
    record = {'residual': table.residual, 'n_steps': len(table.t_grid) - 1,
              'horizon': table.horizon, 'min_det_v': float(table.det_v.min())}
    if config.check is not None:
        sampled = np.arange(config.decimation, len(table.t_grid), config.decimation)
        check = np.full(len(table.t_grid), np.nan)
        check[sampled] = inverse_laplace_check(spec, table.t_grid[sampled], config.threads,
                                               method=config.check)
        columns['G_' + config.check] = check
        record['max_%s_deviation' % config.check] = float(np.nanmax(np.abs(check - table.g)))
    record['header'] = config.header()
    return [table.to_csv(config.path('green.csv'), columns),
            write_json(record, config.path('green_residual.json'))]


def cmd_kernel(config):
    spec = config.bath()
    horizon = config.tmax or default_horizon(spec)
    t_grid = np.linspace(0, horizon, config.n_steps + 1)
    damping = kernel_table(spec, t_grid, kind='damping')
    noise = kernel_table(spec, t_grid, kind='noise', threads=config.threads)
    df = pd.DataFrame({'t': t_grid, 'damping': damping.values, 'noise': noise.values})
    return [write_csv(df, config.path('kernel.csv'), config.header())]


def cmd_moments(config):
    spec = config.bath()
    green = solve_green(spec, config.tmax, config.n_steps)
    series = compute_moments(green, spec, decimation=config.decimation, threads=config.threads)
    basis = pointer_basis(stationary_momentum_variance(spec))
    return [series.to_csv(config.path('moments.csv')),
            basis.to_json(config.path('pointer.json'), config.header())]


def cmd_tc(config):
    ctx = _context(config)
    report = find_tc(ctx)
    header = config.header()
    paths = [ctx.moments.to_csv(config.path('moments.csv')),
             ctx.basis.to_json(config.path('pointer.json'), header),
             report.to_json(config.path('localization.json'), header),
             write_csv(report.dframe(), config.path('criterion.csv'), header)]
    if report.t_c is None:
        param.main.param.warning('No localization time within the horizon %g.' % report.horizon)
    else:
        print('t_c = %.9g' % report.t_c)
    return paths


def _initial_state(config, grid):
    if config.state == 'cat':
        return cat_wigner(config.x0, 0.5 * np.eye(2), grid)
    return gaussian_wigner(GaussianState.vacuum(d=(config.x0, 0)), grid)


def _evolve_grid(config, ctx, times):
    if config.extent is not None:
        e = config.extent
        return GridSpec(n_x=config.grid_n, n_p=config.grid_n, x_min=-e, x_max=e,
                        p_min=-e, p_max=e)
    initial = GaussianState.vacuum(d=(config.x0, 0))
    states = [initial] + [propagate_gaussian(initial, ctx, t) for t in times]
    return GridSpec.covering([s.sigma for s in states],
                             [s.d for s in states] + [-initial.d], n=config.grid_n)


def cmd_evolve(config):
    ctx = _context(config)
    times = config.times or [0.5 * ctx.horizon, ctx.horizon]
    grid = _evolve_grid(config, ctx, times)
    w0 = _initial_state(config, grid)
    header = config.header()
    rows, paths = [], []
    for t in times:
        w = propagate(w0, ctx, t)
        paths.extend(w.to_raster(config.path('wigner_t%g' % t), header))
        try:
            w1 = pointer_weight(w0, ctx, t)
        except NotYetDefinedError as e:
            param.main.param.message('Pointer weight undefined at t=%g (min eig %.3g).'
                                     % (t, e.min_eig))
            min_w1 = np.nan
        else:
            paths.extend(w1.to_raster(config.path('pointer_t%g' % t), header))
            min_w1 = float(w1.values.min())
        rows.append({'t': t, 'negativity_volume_W0': negativity_volume(w), 'min_W1': min_w1})
    paths.append(write_csv(pd.DataFrame(rows), config.path('evolve.csv'), header))
    return paths


def cmd_figure1(config):
    pipeline_zetas = (0.5, 2.0) if config.pipeline else ()
    study = figure1_study(config.zetas or None, pipeline_zetas=pipeline_zetas,
                          threads=config.threads)
    paths = study.write(config.out)
    print('slope = %.6f, tau_c = %.9g (determinant check %.9g)'
          % (study.slope, study.tau_c, tau_c_universal(method='determinant')))
    return paths


def _set_verbosity(args):
    logger = param.parameterized.get_logger()
    if args.verbose:
        logger.setLevel(logging.DEBUG)
    elif args.quiet:
        logger.setLevel(logging.ERROR)


def _report_error(out, error, exit_code):
    info = error.to_dict() if isinstance(error, QBMError) else {
        'error': type(error).__name__, 'message': str(error), 'exit_code': exit_code}
    sys.stderr.write('qbm: %s\n' % info['message'])
    try:
        write_json(info, os.path.join(out, 'error.json'))
    except OSError:
        pass
    return exit_code


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    _set_verbosity(args)
    out = args.out or '.'
    try:
        config = resolve_config(args, parser)
    except SystemExit as e:
        return e.code
    except QBMError as e:
        return _report_error(out, e, e.exit_code)
    except ValueError as e:
        return _report_error(out, e, EXIT_DOMAIN)
    command = globals()['cmd_' + config.command]
    threads = options.threads
    options.threads = config.threads
    try:
        ensure_directory(config.out)
        for path in command(config):
            param.main.param.message('wrote %s' % path)
    except QBMError as e:
        return _report_error(config.out, e, e.exit_code)
    except OSError as e:
        return _report_error(config.out, e, EXIT_IO)
    except ValueError as e:
        return _report_error(config.out, e, EXIT_DOMAIN)
    finally:
        options.threads = threads
    return 0


if __name__ == '__main__':
    sys.exit(main())
