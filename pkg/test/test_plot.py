import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pytest

from jetflowlib import plot
from jetflowlib.energy import trace_leaves
from jetflowlib.geometry import OdeRhs, curvature_grid
from jetflowlib.registry import instantiate
from jetflowlib.util import Region


def test_nice_sci_notation():
    assert plot.nice_sci_notation(0) == r'$0$'
    assert plot.nice_sci_notation(1.0) == r'$1.00\times10^{0}$'
    assert plot.nice_sci_notation(0.00052) == r'$5.20\times10^{-4}$'
    assert plot.nice_sci_notation(-12345.0, 1) == r'$-1.2\times10^{4}$'


def test_curvature_map_with_masked_nodes():
    ode = OdeRhs('-alpha*u1 - lambda*u', {'alpha': 0.2, 'lambda': 1.0})
    grid = curvature_grid(ode, Region((0.0, 1.0), (-1.0, 1.0), 3, 3))
    fig, ax = plt.subplots()
    mesh = plot.curvature_map(ax, grid, 'r2323')
    assert mesh.get_array().mask.sum() == 3
    assert len(fig.axes) == 2
    assert ax.get_title() == ''
    plt.close(fig)


def test_constant_curvature_gets_a_title():
    ode, _ = instantiate('kappa', {'kappa': 2.0})
    grid = curvature_grid(ode, Region((-1.0, 1.0), (0.1, 0.5), 3, 3))
    fig, ax = plt.subplots()
    plot.curvature_map(ax, grid, 'k_int', colorbar=False)
    assert ax.get_title() == r'constant $2.00\times10^{0}$'
    assert len(fig.axes) == 1
    with pytest.raises(ValueError):
        plot.curvature_map(ax, grid, 'r1234')
    plt.close(fig)


def test_leaves():
    traces = trace_leaves(OdeRhs('-u'), [(0.0, 1.0), (0.0, 2.0)], 0.5,
                          n_samples=11)
    fig, ax = plt.subplots()
    lines = plot.leaves(ax, traces, colors=['k'])
    assert len(lines) == 2
    assert all(line.get_color() == 'k' for line in lines)
    assert len(lines[0].get_xdata()) == 11
    plt.close(fig)
