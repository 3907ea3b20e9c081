"""
HoloViews views of the qbm tables.

The functions return HoloViews objects and load the bokeh extension on
first use; nothing is rendered or saved here.
"""

import numpy as np

import holoviews as hv
import colorcet as cc

from .util import with_hv_extension


@with_hv_extension
def green_curves(table, width=600, height=300):
    """Overlay of G, G' and G'' against time."""
    df = table.dframe()
    curves = [hv.Curve(df, 't', column, label=column).opts(width=width, height=height)
              for column in ('G', 'Gdot', 'Gddot')]
    return hv.Overlay(curves).opts(title="Green's function")


@with_hv_extension
def moment_curves(series, logy=False, width=600, height=300):
    """A, B and C against time, one curve each."""
    df = series.dframe()
    curves = [hv.Curve(df, 't', column, label=column).opts(width=width, height=height,
                                                          logy=logy)
              for column in ('A', 'B', 'C')]
    return hv.Overlay(curves).opts(title='Moments')


@with_hv_extension
def criterion_trace(report, width=600, height=300):
    """
    Smallest eigenvalue of M(t) - Gamma_inf/2 with the localization time
    marked when it was reached.
    """
    curve = hv.Curve(report.dframe(), 't', 'min_eig', label='min eigenvalue')
    plot = curve * hv.HLine(0).opts(color='gray', line_dash='dotted')
    if report.t_c is not None:
        plot = plot * hv.VLine(report.t_c, label='t_c').opts(color='red')
    return plot.opts(hv.opts.Curve(width=width, height=height))


@with_hv_extension
def wigner_image(w, cmap=None, width=400, height=400):
    """
    Quasiprobability function as an image with a diverging colormap
    centred on zero, so that negative regions stand out.
    """
    grid = w.grid
    limit = np.abs(w.values).max() or 1.0
    bounds = (grid.x_min, grid.p_min, grid.x_max, grid.p_max)
    # hv.Image rows run along the vertical (p) axis
    image = hv.Image(w.values.T[::-1], bounds=bounds, kdims=['x', 'p'], vdims=['W'])
    return image.opts(cmap=cmap or cc.coolwarm, clim=(-limit, limit), colorbar=True,
                      width=width, height=height, title='s = %g, t = %g' % (w.s_order, w.t))


@with_hv_extension
def figure1_plot(study, width=500, height=400):
    """log10 T_c against log10 zeta with the fitted line."""
    table = study.table
    points = hv.Scatter(table, 'log10_zeta', 'log10_Tc', label='T_c').opts(size=6)
    x = np.array([table.log10_zeta.min(), table.log10_zeta.max()])
    line = hv.Curve((x, np.log10(study.tau_c) + study.slope * x), 'log10_zeta', 'log10_Tc',
                    label='slope %.4f' % study.slope)
    return (points * line).opts(width=width, height=height)
