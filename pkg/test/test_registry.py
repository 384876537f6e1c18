import json
import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from jetflowlib import registry as reg
from jetflowlib.dynamics import geodesic_residual, integrate_solution
from jetflowlib.energy import check_energy_candidate
from jetflowlib.errors import ConstraintViolation, UnknownEntry, \
    UnknownParameter
from jetflowlib.geometry import JetPoint, leaf_geometry, sectional_curvatures
from jetflowlib.lagrangian import el_residual_at
from jetflowlib.util import Region


CASES = [
    ('kappa', {}, {}),
    ('kappa', {'kappa': -0.5}, {}),
    ('kzero', {}, {}),
    ('damped', {}, {}),
    ('damped', {'alpha': 0.5, 'lambda': 2.0}, {}),
    ('gravity', {}, {}),
    ('gravity', {'G': 2.0}, {'rho': '1 + u^2'}),
    ('kfamily', {}, {}),
    ('kfamily', {}, {'K': 'u'}),
]


def sample(region, n=4):
    return Region(region.u, region.u1, n, n).grid()


def test_names():
    assert reg.names() == ['damped', 'gravity', 'kappa', 'kfamily', 'kzero']


def test_defaults_and_labels():
    ode, entry = reg.instantiate('kappa')
    assert entry.params == {'kappa': 1.0}
    assert entry.label() == 'kappa(kappa=1)'
    assert ode.name == 'kappa(kappa=1)'

    _, entry = reg.instantiate('damped', {'alpha': 0.2})
    assert entry.params == {'alpha': 0.2, 'lambda': 1.0}
    assert_allclose(entry.derived['omega'], math.sqrt(0.99), rtol=1e-15)

    _, entry = reg.instantiate('kfamily')
    assert entry.functions == {'K': '1'}
    assert entry.label() == 'kfamily(K=1)'


def test_instantiate_errors():
    with pytest.raises(UnknownEntry):
        reg.instantiate('pendulum')
    with pytest.raises(UnknownEntry):
        reg.describe('pendulum')
    with pytest.raises(UnknownParameter):
        reg.instantiate('kappa', {'alpha': 1.0})
    with pytest.raises(UnknownParameter):
        reg.instantiate('kappa', functions={'K': 'u'})
    with pytest.raises(ConstraintViolation):
        reg.instantiate('kappa', {'kappa': 0.0})
    with pytest.raises(ConstraintViolation):
        reg.instantiate('damped', {'alpha': 3.0})
    with pytest.raises(ConstraintViolation):
        reg.instantiate('gravity', {'G': -1.0})


@pytest.mark.parametrize('name, params, functions', CASES)
def test_reference_curvatures(name, params, functions):
    ode, entry = reg.instantiate(name, params, functions)
    for u, u1 in sample(entry.region):
        ref = entry.reference_curvatures(u, u1)
        curv = sectional_curvatures(ode, (0.0, u, u1))
        assert_allclose(ref['r1212'], curv.r1212, rtol=1e-8, atol=1e-9)
        assert_allclose(ref['r1313'], curv.r1313, rtol=1e-8, atol=1e-9)
        assert_allclose(ref['r2323'], curv.r2323, rtol=1e-8, atol=1e-9)
        assert_allclose(ref['k_int'], leaf_geometry(ode, (0.0, u, u1)).k_int,
                        rtol=1e-8, atol=1e-9)


@pytest.mark.parametrize('name, params, functions', CASES)
def test_energies_are_first_integrals(name, params, functions):
    ode, entry = reg.instantiate(name, params, functions)
    rep = check_energy_candidate(ode, entry.energy_model(),
                                 sample(entry.energy_region))
    assert rep['passes']


@pytest.mark.parametrize('name, params, functions',
                         [c for c in CASES if c[0] != 'kfamily'])
def test_lagrangians_reproduce_the_equation(name, params, functions):
    ode, entry = reg.instantiate(name, params, functions)
    L = entry.lagrangian_model()
    for u, u1 in sample(entry.region):
        assert abs(el_residual_at(ode, L, u, u1)) <= 1e-8


def test_damped_log_energy():
    ode, entry = reg.instantiate('damped')
    rep = check_energy_candidate(ode, entry.log_energy, entry.energy_region)
    assert rep['passes']
    u, u1 = 0.5, 0.4
    assert_allclose(math.log(2.0 * entry.energy.value(u, u1)),
                    entry.log_energy.value(u, u1), rtol=1e-13)


def test_kappa_energy_along_a_solution():
    ode, entry = reg.instantiate('kappa')
    curve = integrate_solution(ode, JetPoint(0.0, 0.0, 0.5), 0.5,
                               method='DOP853', n_samples=11)
    values = [entry.energy.value(u, u1) for _, u, u1 in curve.points]
    assert_allclose(values, values[0], rtol=1e-9)


def test_gravity_density_matches_uniform_case():
    _, uniform = reg.instantiate('gravity')
    _, dense = reg.instantiate('gravity', functions={'rho': 'rho0'})
    for u in (-0.8, 0.3, 1.0):
        assert_allclose(dense.phi.value(u, 1.0), uniform.phi.value(u, 1.0),
                        rtol=1e-10)
        assert_allclose(dense.energy.value(u, 0.7),
                        uniform.energy.value(u, 0.7), rtol=1e-10)
        assert_allclose(dense.phi.jet(u, 1.0).d_u, -1.0, rtol=1e-12)


def test_gravity_potential():
    Phi, Phi_u = reg.gravity_potential('1', 1.0, 2.0)
    assert_allclose(Phi, 8.0 * math.pi, rtol=1e-12)
    assert_allclose(Phi_u, 8.0 * math.pi, rtol=1e-12)
    Phi, Phi_u = reg.gravity_potential('u', 0.5, -1.0)
    assert_allclose(Phi_u, math.pi, rtol=1e-12)
    assert_allclose(Phi, -math.pi / 3.0, rtol=1e-12)


def test_kfamily_first_integral():
    ode, entry = reg.instantiate('kfamily', functions={'K': 'u'})
    assert_allclose(entry.first_integral((0.0, 1.0, 2.0)), 1.5, rtol=1e-13)
    assert_allclose(reg.kfamily_first_integral('u', (0.0, 1.0, 2.0)), 1.5,
                    rtol=1e-13)
    curve = integrate_solution(ode, JetPoint(0.0, 0.2, 0.8), 0.5,
                               method='DOP853', n_samples=11)
    values = [entry.first_integral(p) for p in curve.points]
    assert_allclose(values, values[0], atol=1e-9)


def test_primitive_field_order():
    with pytest.raises(ValueError):
        reg.PrimitiveField(None, order=3)


def test_closed_forms():
    _, entry = reg.instantiate('damped')
    assert entry.closed_forms() == [
        'energy', 'log_energy', 'lagrangian',
        'r1212', 'r1313', 'r2323', 'k_int']
    _, entry = reg.instantiate('kfamily')
    assert entry.closed_forms() == [
        'energy', 'first_integral', 'r1212', 'r1313', 'r2323', 'k_int']
    assert entry.lagrangian_model() is None


def test_initial_points():
    ode, entry = reg.instantiate('kappa')
    points = entry.initial_points(5)
    assert len(points) == 5
    inner = entry.region.shrink(0.5)
    for p in points:
        assert p.x == 0.0
        assert inner.u[0] <= p.u <= inner.u[1]
        assert inner.u1[0] <= p.u1 <= inner.u1[1]
        assert ode.in_domain(p.u, p.u1)


@pytest.mark.parametrize('name', reg.names())
def test_solutions_stay_clear_over_the_span(name):
    ode, entry = reg.instantiate(name)
    assert entry.x_span > 0.25
    for p in entry.initial_points(10):
        curve = integrate_solution(ode, p, entry.x_span, method='DOP853')
        assert not curve.stats['event']
        assert curve.t[-1] == entry.x_span
        assert np.all(curve.points[:, 2] > 0.0)


def test_linear_spans_end_before_the_first_turn():
    _, entry = reg.instantiate('damped')
    omega = entry.derived['omega']
    assert_allclose(entry.x_span, 0.6 * math.atan2(omega, 1.1) / omega)
    _, entry = reg.instantiate('gravity')
    assert_allclose(entry.x_span, 0.6 * math.atan2(1.175, 0.5))


def test_listing():
    doc = json.loads(reg.listing_json())
    entries = doc['entries']
    assert [e['name'] for e in entries] == reg.names()
    gravity = entries[1]
    assert [p['name'] for p in gravity['parameters']] == ['G', 'rho0', 'm']
    assert gravity['functions'][0] == {
        'name': 'rho', 'default': None, 'doc': 'density expression over u'}
    assert gravity['constraints'] == ['G > 0', 'm > 0']
    assert reg.listing_json() == reg.listing_json()


def test_counterexample():
    ode, curve = reg.counterexample()
    for x in np.linspace(-1.0, 1.0, 9):
        f, df, d2f, _ = curve(x)
        assert_allclose(d2f - ode.value(f, df), -1.0, rtol=1e-12)
        assert_allclose(geodesic_residual(ode, curve, x), np.zeros(3),
                        atol=1e-12)
