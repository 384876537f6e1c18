"""
Plotting utilities for curvature grids and energy leaves.

The command-line tool never imports this module.
"""

import itertools
import math

from mpl_toolkits.axes_grid1 import make_axes_locatable
import numpy as np


tango_hex = {
    'butter2': '#edd400',
    'chameleon3': '#4e9a06',
    'orange2': '#f57900',
    'skyblue2': '#3465a4',
    'plum2': '#75507b',
    'chocolate2': '#c17d11',
    'scarletred2': '#cc0000',
    'aluminium5': '#555753', }


_LABELS = {
    'r1212': r'$R^1{}_{212}$',
    'r1313': r'$R^1{}_{313}$',
    'r2323': r'$R^2{}_{323}$',
    'k_int': r'$K_{\mathrm{int}}$',
}


def nice_sci_notation(x, ndecimals=2, precision=None, exponent=None):
    if x == 0:
        return r'$0$'
    if not exponent:
        exponent = int(math.floor(math.log10(abs(x))))

    coeff = round(x/float(10**exponent), ndecimals)
    precision = precision or ndecimals

    return r"${0:.{1}f}\times10^{{{2:d}}}$".format(coeff, precision, exponent)


def get_cbar_axes(ax, position='right', size='5%', pad='3%'):
    divider = make_axes_locatable(ax)
    cax = divider.append_axes(position, size, pad=pad)
    return cax


def curvature_map(ax, grid, column, cmap='RdBu_r', colorbar=True):
    """
    Colour map of one curvature over the ``(u, u1)`` plane.

    Parameters
    ----------
    ax : :py:class:`matplotlib.axes.Axes`
    grid : dict
        Output of :func:`jetflowlib.geometry.curvature_grid`.
    column : str
        One of ``'r1212'``, ``'r1313'``, ``'r2323'``, ``'k_int'``.
    cmap : str (optional)
    colorbar : bool (optional, default: True)

    Returns
    -------
    mesh : :py:class:`matplotlib.collections.QuadMesh`
    """
    if column not in _LABELS:
        raise ValueError('no curvature column "{}"'.format(column))

    values = np.ma.masked_invalid(grid[column])
    mesh = ax.pcolormesh(
        grid['u'], grid['u1'], values, cmap=cmap, shading='auto')

    ax.set_xlabel(r'$u$')
    ax.set_ylabel(r'$u_1$')

    if colorbar:
        cax = get_cbar_axes(ax)
        cbar = ax.figure.colorbar(mesh, cax=cax)
        cbar.set_label(_LABELS[column])

    finite = values.compressed()
    if finite.size and np.ptp(finite) < 1e-12:
        ax.set_title('constant {}'.format(nice_sci_notation(finite[0])))

    return mesh


def leaves(ax, traces, colors=None, lw=1.5):
    """
    Draw traced energy leaves as curves ``u1(u)``.

    Parameters
    ----------
    ax : :py:class:`matplotlib.axes.Axes`
    traces : sequence of :class:`jetflowlib.energy.LeafTrace`
    colors : sequence of colours (optional)
        Cycled; Tango colours by default.

    Returns
    -------
    lines : list of :py:class:`matplotlib.lines.Line2D`
    """
    colors = itertools.cycle(colors or list(tango_hex.values()))
    lines = []
    for trace, color in zip(traces, colors):
        line, = ax.plot(trace.u, trace.u1, color=color, lw=lw)
        ax.plot(trace.u[0], trace.u1[0], 'o', color=color, ms=4)
        lines.append(line)

    ax.axhline(0.0, linestyle=':', color=tango_hex['aluminium5'], lw=1.0)
    ax.set_xlabel(r'$u$')
    ax.set_ylabel(r'$u_1$')
    return lines


__all__ = """
    tango_hex
    nice_sci_notation
    get_cbar_axes
    curvature_map
    leaves
""".split()
