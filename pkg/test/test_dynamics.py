import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from jetflowlib import dynamics as dyn
from jetflowlib.errors import SingularCrossing, SingularPoint
from jetflowlib.geometry import JetPoint, OdeRhs


def oscillator():
    return OdeRhs('-u', name='harmonic')


def damped():
    return OdeRhs('-alpha*u1 - lambda*u', {'alpha': 0.2, 'lambda': 1.0})


def test_solution_of_harmonic_oscillator():
    curve = dyn.integrate_solution(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 1.0, method='DOP853',
        n_samples=51)
    x = curve.t
    assert len(curve) == 51
    assert curve.kind == 'solution'
    assert not curve.event
    assert_allclose(curve.points[:, 0], x)
    assert_allclose(curve.points[:, 1], np.sin(x), atol=1e-9)
    assert_allclose(curve.points[:, 2], np.cos(x), atol=1e-9)
    assert_allclose(curve.tangents[:, 0], 1.0)
    assert_allclose(curve.tangents[:, 2], -curve.points[:, 1], rtol=1e-14)
    assert curve.max_residual() <= 1e-6
    assert_allclose(dyn.speed_profile(oscillator(), curve), 1.0, rtol=1e-12)


def test_solution_stops_at_excluded_plane():
    curve = dyn.integrate_solution(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 3.0, n_samples=21)
    assert curve.event
    assert_allclose(curve.t_stop, 0.5 * math.pi, atol=1e-6)
    assert curve.t[-1] < curve.t_stop
    assert np.all(curve.points[:, 2] > 0.0)

    with pytest.raises(SingularCrossing) as info:
        dyn.integrate_solution(
            oscillator(), JetPoint(0.0, 0.0, 1.0), 3.0, strict=True)
    assert_allclose(info.value.x_stop, 0.5 * math.pi, atol=1e-6)


def test_solution_argument_errors():
    ode = oscillator()
    with pytest.raises(ValueError):
        dyn.integrate_solution(ode, JetPoint(1.0, 0.0, 1.0), 0.5)
    with pytest.raises(ValueError):
        dyn.integrate_solution(ode, JetPoint(0.0, 0.0, 1.0), 1.0, tol=0.0)
    with pytest.raises(SingularPoint):
        dyn.integrate_solution(ode, JetPoint(0.0, 1.0, 0.0), 1.0)


def test_geodesic_residual_of_counterexample():
    ode = OdeRhs('u1')
    curve = dyn.prolongation(
        lambda x: x + math.exp(x), lambda x: 1.0 + math.exp(x),
        math.exp, math.exp)
    for x in np.linspace(0.0, 1.0, 20):
        assert_allclose(dyn.geodesic_residual(ode, curve, x), np.zeros(3),
                        atol=1e-12)
        f, df, d2f, _ = curve(x)
        assert_allclose(d2f - ode.value(f, df), -1.0, rtol=1e-12)


def test_geodesic_residual_detects_non_solutions():
    exact = dyn.prolongation(np.sin, np.cos, lambda x: -np.sin(x),
                             lambda x: -np.cos(x))
    assert_allclose(dyn.geodesic_residual(oscillator(), exact, 0.4),
                    np.zeros(3), atol=1e-15)

    line = dyn.prolongation(lambda x: x, lambda x: 1.0, lambda x: 0.0,
                            lambda x: 0.0)
    res = dyn.geodesic_residual(damped(), line, 0.5)
    assert np.max(np.abs(res)) > 1e-3


def test_geodesic_along_e1_is_the_prolonged_solution():
    ode = oscillator()
    curve = dyn.integrate_geodesic(
        ode, JetPoint(0.0, 0.0, 1.0), (1.0, 1.0, 0.0), 1.0, method='DOP853',
        n_samples=41)
    assert curve.kind == 'geodesic'
    t = curve.t
    assert_allclose(curve.points[:, 0], t, atol=1e-9)
    assert_allclose(curve.points[:, 1], np.sin(t), atol=1e-9)
    assert_allclose(curve.points[:, 2], np.cos(t), atol=1e-9)
    assert_allclose(curve.velocity, np.tile([1.0, 0.0, 0.0], (41, 1)),
                    atol=1e-9)


def test_geodesic_keeps_its_speed():
    ode = damped()
    curve = dyn.integrate_geodesic(
        ode, JetPoint(0.0, 0.2, 1.0), (0.0, 0.3, 0.5), 0.5, method='DOP853')
    speed = dyn.speed_profile(ode, curve)
    assert_allclose(speed, speed[0], rtol=1e-8)
    assert_allclose(np.sum(curve.velocity**2, axis=1), speed, rtol=1e-10)
    assert curve.max_residual() <= 1e-6


def test_geodesic_argument_errors():
    with pytest.raises(ValueError):
        dyn.integrate_geodesic(damped(), (0.0, 0.0, 1.0), (0, 0, 0), 1.0)
    with pytest.raises(ValueError):
        dyn.integrate_geodesic(damped(), (0.0, 0.0, 1.0), (1, 0, 0), -1.0)


def test_segments_between_crossings():
    segments = dyn.integrate_segments(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 7.0, method='DOP853',
        n_samples=101)
    assert len(segments) == 3
    assert [s.event for s in segments] == [True, True, False]
    assert_allclose(segments[0].t_stop, 0.5 * math.pi, atol=1e-8)
    assert_allclose(segments[1].t_stop, 1.5 * math.pi, atol=1e-8)
    signs = [np.sign(s.points[:, 2]) for s in segments]
    assert np.all(signs[0] > 0)
    assert np.all(signs[1] < 0)
    assert np.all(signs[2] > 0)
    for s in segments:
        assert_allclose(s.points[:, 1], np.sin(s.t), atol=1e-8)


def test_batch_is_ordered():
    inits = [JetPoint(0.0, u, 1.0) for u in (0.0, 0.1, 0.2, 0.3)]
    serial = dyn.integrate_batch(oscillator(), inits, 0.5, n_samples=11)
    threaded = dyn.integrate_batch(oscillator(), inits, 0.5, jobs=3,
                                   n_samples=11)
    for a, b in zip(serial, threaded):
        assert_allclose(a.points, b.points, rtol=0, atol=0)
    assert [c.points[0, 1] for c in serial] == [0.0, 0.1, 0.2, 0.3]


def test_curve_rows():
    curve = dyn.integrate_solution(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 0.5, n_samples=5)
    rows = dyn.curve_to_rows(curve)
    assert len(rows) == 5
    assert all(len(r) == len(dyn.CURVE_COLUMNS) for r in rows)
    assert rows[0][:4] == [0.0, 0.0, 0.0, 1.0]
