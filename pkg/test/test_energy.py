import dataclasses
import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from jetflowlib import energy as en
from jetflowlib.dynamics import integrate_segments, integrate_solution
from jetflowlib.errors import EmptyRegion, NotAnEnergy, NotReachable, \
    SingularCrossing
from jetflowlib.geometry import JetPoint, OdeRhs
from jetflowlib.util import Region


def oscillator():
    return OdeRhs('-u')


def damped(alpha=0.2, lam=1.0):
    return OdeRhs('-alpha*u1 - lambda*u', {'alpha': alpha, 'lambda': lam})


def test_candidate_energy_of_oscillator():
    region = Region((-1.0, 1.0), (0.2, 2.0), 11, 11)
    rep = en.check_energy_candidate(oscillator(), 'u1^2 + u^2', region)
    assert rep['passes']
    assert rep['scaled_residual'] <= 1e-14
    assert rep['n_points'] == 121
    assert_allclose(rep['min_abs_mu'], 0.4)


def test_wrong_candidates_fail():
    region = Region((-1.0, 1.0), (0.2, 2.0), 5, 5)
    rep = en.check_energy_candidate(oscillator(), 'u1', region)
    assert not rep['passes']
    assert_allclose(rep['scaled_residual'], 1.0)

    # a function of an energy is again an energy
    rep = en.check_energy_candidate(damped(0.0), '(u1^2 + u^2)^2', region)
    assert rep['scaled_residual'] <= 1e-13
    assert rep['min_abs_mu'] > 0.0

    rep = en.check_energy_candidate(oscillator(), 'u', [(0.0, 1.0)])
    assert not rep['passes']
    assert rep['min_abs_mu'] == 0.0
    assert rep['scaled_residual'] == 1.0


def test_empty_sample_set():
    with pytest.raises(EmptyRegion):
        en.check_energy_candidate(oscillator(), 'u1^2 + u^2', [])


def test_energy_model():
    E = en.EnergyModel.closed_form('a*u1^2 + u^2', {'a': 1.0})
    assert E.kind == 'closed_form'
    assert E.value(1.0, 2.0) == 5.0
    assert E.jet(1.0, 2.0).d_v == 4.0
    assert en.as_energy(E) is E

    label = en.EnergyModel.numeric_label(oscillator(), 0.0)
    assert_allclose(label.value(0.5, 0.5), math.sqrt(0.5), rtol=1e-9)
    with pytest.raises(ValueError):
        label.jet(0.5, 0.5)


def test_checked_energy_model():
    region = Region((-1.0, 1.0), (0.2, 2.0), 5, 5)
    E = en.EnergyModel.checked(oscillator(), 'a*u1^2 + u^2', region, {'a': 1.0})
    assert E.kind == 'closed_form'
    assert E.value(1.0, 2.0) == 5.0

    with pytest.raises(NotAnEnergy) as info:
        en.EnergyModel.checked(oscillator(), 'u1', region)
    assert not info.value.report['passes']
    assert_allclose(info.value.report['scaled_residual'], 1.0)


def test_foliation_defect():
    p = JetPoint(0.0, 0.3, 0.8)
    assert en.foliation_defect(oscillator(), 'u1^2 + u^2', p) <= 1e-15
    assert en.foliation_defect(oscillator(), 'u1', p) > 0.1
    assert_allclose(en.energy_gradient('u1^2 + u^2', p), [0.0, 0.6, 1.6])


def test_trace_leaf_on_a_circle():
    trace = en.trace_leaf(oscillator(), (0.0, 1.0), 0.5, n_samples=11)
    assert len(trace) == 11
    assert trace.end[0] == 0.5
    assert_allclose(trace.end[1], math.sqrt(0.75), rtol=1e-9)
    assert_allclose(trace.u**2 + trace.u1**2, 1.0, rtol=1e-9)
    assert en.leaf_invariant_error('u1^2 + u^2', trace) <= 1e-9

    backwards = en.trace_leaf(oscillator(), (0.5, -1.0), -0.5)
    assert_allclose(backwards.end[1], -1.0, rtol=1e-9)

    same = en.trace_leaf(oscillator(), (0.2, 1.0), 0.2)
    assert len(same) == 1


def test_trace_leaf_fold():
    with pytest.raises(SingularCrossing) as info:
        en.trace_leaf(oscillator(), (0.0, 1.0), 1.5)
    assert abs(info.value.x_stop - 1.0) < 1e-3


def test_trace_leaves_in_order():
    starts = [(0.0, 1.0), (0.0, 2.0), (0.0, 0.5)]
    traces = en.trace_leaves(oscillator(), starts, 0.3, jobs=2)
    assert [t.u1[0] for t in traces] == [1.0, 2.0, 0.5]
    with pytest.raises(SingularCrossing):
        en.trace_leaves(oscillator(), starts, 0.9)
    traces = en.trace_leaves(oscillator(), starts, 0.9, skip_folds=True)
    assert traces[2] is None
    assert traces[0] is not None


def test_energy_label():
    label = en.energy_label(oscillator(), (0.0, 0.5, 0.5), 0.0)
    assert_allclose(label, math.sqrt(0.5), rtol=1e-9)

    with pytest.raises(NotReachable) as info:
        en.energy_label(oscillator(), (0.0, 0.5, 0.5), 1.0)
    assert abs(info.value.u_stop - math.sqrt(0.5)) < 1e-3


def test_damped_label_not_reachable():
    with pytest.raises(NotReachable):
        en.energy_label(damped(), (0.0, 1.0, 0.05), 2.0)
    assert en.energy_label(damped(), (0.0, 1.0, 0.05), -1.0) > 0.05


def test_conservation_across_crossings():
    segments = integrate_segments(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 7.0, method='DOP853')
    rep = en.conservation_report(oscillator(), 'u1^2 + u^2', segments)
    assert len(rep['segments']) == 3
    assert rep['event']
    assert_allclose(rep['e0'], 1.0)
    assert rep['drift'] <= 1e-8


def test_conservation_over_ten_periods():
    segments = integrate_segments(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 20.0 * math.pi,
        tol=1e-12, method='DOP853')
    rep = en.conservation_report(oscillator(), '(u1^2 + u^2)/2', segments)
    assert len(rep['segments']) == 21
    assert_allclose(rep['e0'], 0.5)
    assert rep['drift'] <= 1e-10


def test_conservation_sees_jumps_between_segments():
    segments = integrate_segments(
        oscillator(), JetPoint(0.0, 0.0, 1.0), 20.0 * math.pi,
        method='DOP853')
    bad = segments[2]
    points = bad.points.copy()
    points[:, 1:] *= 1.01
    segments[2] = dataclasses.replace(bad, points=points)
    rep = en.conservation_report(oscillator(), '(u1^2 + u^2)/2', segments)
    assert rep['drift'] > 1e-3
    assert max(rep['segments']) < 1e-6


def test_conservation_detects_drift():
    curve = integrate_solution(damped(), JetPoint(0.0, 0.0, 1.0), 1.0)
    rep = en.conservation_report(damped(), 'u1^2 + u^2', curve)
    assert rep['drift'] > 0.1
    assert not rep['event']
    assert rep['n_samples'] == len(curve)


def test_leaf_rows():
    trace = en.trace_leaf(oscillator(), (0.0, 1.0), 0.5, n_samples=5)
    rows = en.leaf_rows(trace, 'u1^2 + u^2')
    assert len(rows) == 5
    assert_allclose([r[2] for r in rows], 1.0, rtol=1e-9)
    assert en.leaf_rows(trace)[0][2] == ''
    assert np.all(np.diff([r[0] for r in rows]) > 0)
