"""
Energy foliation.

A function ``E(u, u1)`` defines the foliation when its differential is
a multiple of ``w3``, i.e. when

    u1 E_u + phi E_u1 = 0,

so that ``E`` is constant along solutions. Leaves are traced by the
characteristics ``du1/du = phi/u1`` of this equation.
"""

import dataclasses
import logging

import numpy as np
from scipy.integrate import solve_ivp

from jetflowlib.config import resolve
from jetflowlib.errors import EmptyRegion, NotAnEnergy, NotReachable, \
    SingularCrossing, StepFailure
from jetflowlib.expr import PHI_VARS, as_field
from jetflowlib.geometry import as_point, frame_at, phi_jet
from jetflowlib.util import Region, WorkerMap


logger = logging.getLogger(__name__)


LEAF_COLUMNS = ('u', 'u1', 'E_closed_form')

_FOLD_FRACTION = 1.0e-3


@dataclasses.dataclass(frozen=True)
class EnergyModel:
    """
    A coordinate on the leaf space.

    Parameters
    ----------
    kind : str
        ``'closed_form'``: ``field`` is a closed-form energy;
        ``'numeric_label'``: the leaf is labelled by the ``u1`` value
        where it crosses the section ``u = u_ref``.
    field : :class:`~jetflowlib.expr.ScalarField` or None
    u_ref : float or None
    ode : :class:`~jetflowlib.geometry.OdeRhs` or None
        Needed by numeric labels.
    """
    kind: str
    field: object = None
    u_ref: float = None
    ode: object = None

    @classmethod
    def closed_form(cls, E, params=None):
        return cls('closed_form', field=as_field(E, params, PHI_VARS))

    @classmethod
    def checked(cls, ode, E, region, params=None, settings=None):
        """
        Closed form that passes :func:`check_energy_candidate` on
        ``region``.

        Raises
        ------
        NotAnEnergy
            With the failing report.
        """
        model = cls.closed_form(E, params)
        report = check_energy_candidate(ode, model, region, settings=settings)
        if not report['passes']:
            raise NotAnEnergy(report)
        return model

    @classmethod
    def numeric_label(cls, ode, u_ref):
        return cls('numeric_label', u_ref=float(u_ref), ode=ode)

    def value(self, u, u1, settings=None):
        if self.kind == 'closed_form':
            return self.field.value(u, u1)
        return energy_label(self.ode, (0.0, u, u1), self.u_ref, settings)

    def jet(self, u, u1):
        if self.kind != 'closed_form':
            raise ValueError('numeric labels carry no derivatives')
        return self.field.jet(u, u1)


def as_energy(E, params=None):
    if isinstance(E, EnergyModel):
        return E
    return EnergyModel.closed_form(E, params)


def _sample_points(region):
    if isinstance(region, Region):
        pts = region.grid()
    else:
        pts = np.asarray(region, dtype=np.float64).reshape(-1, 2)
    if pts.size == 0:
        raise EmptyRegion('no sample points')
    return pts


def check_energy_candidate(ode, E, region, tol=None, settings=None):
    """
    Test a candidate energy against ``E_u + (phi/u1) E_u1 = 0``.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    E : :class:`EnergyModel`, field or expression text over ``u, u1``
    region : :class:`~jetflowlib.util.Region` or array-like, shape (n, 2)
        Sample ``(u, u1)`` points.
    tol : float (optional)
        Threshold on the scaled residual, ``settings.energy_tol`` by
        default.

    Returns
    -------
    report : dict
        ``residual`` = max ``|E_u + (phi/u1) E_u1|``,
        ``scaled_residual`` = max ``|u1 E_u + phi E_u1|``,
        ``min_abs_mu`` = min ``|E_u1|`` (the factor in ``dE = mu w3``),
        ``n_points``, ``tol`` and ``passes``.

    Raises
    ------
    EmptyRegion, SingularPoint, DomainError
    """
    settings = resolve(settings)
    if tol is None:
        tol = settings.energy_tol
    E = as_energy(E)
    pts = _sample_points(region)

    residual = scaled = 0.0
    min_mu = np.inf
    for u, u1 in pts:
        f = phi_jet(ode, (0.0, u, u1), settings)
        e = E.jet(u, u1)
        scaled_here = u1 * e.d_u + f.val * e.d_v
        scaled = max(scaled, abs(scaled_here))
        residual = max(residual, abs(scaled_here / u1))
        min_mu = min(min_mu, abs(e.d_v))

    passes = bool(scaled <= tol and min_mu > 0.0)
    if not passes:
        logger.warning(
            'energy candidate fails: scaled residual %.3g (tol %.3g), '
            'min |E_u1| %.3g', scaled, tol, min_mu)

    return {
        'residual': float(residual),
        'scaled_residual': float(scaled),
        'min_abs_mu': float(min_mu),
        'n_points': int(len(pts)),
        'tol': float(tol),
        'passes': passes,
    }


def energy_gradient(E, p):
    """Coordinate gradient ``(E_x, E_u, E_u1) = (0, E_u, E_u1)``."""
    p = as_point(p)
    e = as_energy(E).jet(p.u, p.u1)
    return np.array([0.0, e.d_u, e.d_v])


def foliation_defect(ode, E, p, settings=None):
    """
    Distance of ``dE`` from the line spanned by ``w3``.

    Returns the largest of ``|dE(e1)|`` and ``|dE(e2)|``; zero exactly
    when ``dE = mu w3`` with ``mu = E_u1``.
    """
    grad = energy_gradient(E, p)
    frame = frame_at(ode, p, settings)
    return float(max(abs(grad @ frame.e1), abs(grad @ frame.e2)))


@dataclasses.dataclass
class LeafTrace:
    """Samples ``(u, u1)`` of a leaf, parametrized by ``u``."""
    u: np.ndarray
    u1: np.ndarray

    @property
    def end(self):
        return (float(self.u[-1]), float(self.u1[-1]))

    def __len__(self):
        return self.u.size


def trace_leaf(ode, start, u_target, tol=None, settings=None, n_samples=None):
    """
    Follow the leaf through ``start`` to the section ``u = u_target``.

    Integrates ``du1/du = phi/u1``; ``u_target`` may lie on either side
    of the start.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    start : tuple of float
        ``(u, u1)``.
    u_target : float

    Returns
    -------
    trace : :class:`LeafTrace`

    Raises
    ------
    SingularCrossing
        The leaf folds back (``|u1|`` falls to ``eps_u1``) before the
        target section; ``x_stop`` holds the ``u`` value.
    SingularPoint, DomainError, StepFailure
    """
    settings = resolve(settings)
    u0, v0 = float(start[0]), float(start[1])
    phi_jet(ode, (0.0, u0, v0), settings)
    n = n_samples or settings.n_samples

    if u_target == u0:
        return LeafTrace(np.array([u0]), np.array([v0]))

    if tol is None:
        rtol, atol = settings.rtol, settings.atol
    else:
        rtol = atol = tol

    sign = 1.0 if v0 > 0 else -1.0

    def rhs(u, y):
        return [ode.value(u, y[0]) / y[0]]

    def fold(u, y):
        return sign * y[0] - settings.eps_u1

    fold.terminal = True
    fold.direction = -1

    sol = solve_ivp(
        rhs, (u0, u_target), [v0], rtol=rtol, atol=atol,
        dense_output=True, events=fold)
    # du1/du blows up at a fold, so the step size may underflow before
    # |u1| reaches eps_u1
    stalled = sol.status == -1 and \
        abs(sol.y[0, -1]) < _FOLD_FRACTION * abs(v0)
    if sol.status == -1 and not stalled:
        raise StepFailure(sol.message)
    if sol.status == 1 or stalled:
        u_stop = float(sol.t[-1])
        logger.info('leaf from (%r, %r) folds back at u = %r', u0, v0, u_stop)
        raise SingularCrossing(
            u_stop, 'leaf folds back at u = {!r}'.format(u_stop))

    us = np.linspace(u0, u_target, n)
    u1s = sol.sol(us)[0]
    # the dense output may differ from the final step by rounding
    u1s[-1] = sol.y[0, -1]
    return LeafTrace(us, u1s)


def trace_leaves(ode, starts, u_target, jobs=1, skip_folds=False, **kwargs):
    """
    Trace several leaves, results in input order.

    With ``skip_folds`` a leaf that folds back before ``u_target`` gives
    None instead of raising :class:`~jetflowlib.errors.SingularCrossing`.
    """
    def job(start):
        try:
            return trace_leaf(ode, start, u_target, **kwargs)
        except SingularCrossing:
            if not skip_folds:
                raise
            return None

    with WorkerMap(jobs) as map_function:
        return map_function(job, list(starts))


def energy_label(ode, p, u_ref, settings=None):
    """
    Value of ``u1`` where the leaf through ``p`` crosses ``u = u_ref``.

    Raises
    ------
    NotReachable
        The leaf folds back first.
    """
    p = as_point(p)
    try:
        trace = trace_leaf(ode, (p.u, p.u1), u_ref, settings=settings)
    except SingularCrossing as exc:
        raise NotReachable(exc.x_stop) from None
    return trace.end[1]


def leaf_invariant_error(E, trace):
    """Largest change of a closed-form energy along a traced leaf."""
    E = as_energy(E)
    values = np.array([E.value(a, b) for a, b in zip(trace.u, trace.u1)])
    return float(np.max(np.abs(values - values[0])))


def conservation_report(ode, E, trajectory, settings=None):
    """
    Drift of an energy along integrated solutions.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    E : :class:`EnergyModel` or closed-form energy
    trajectory : :class:`~jetflowlib.dynamics.Curve` or list of curves
        A list (e.g. the segments between crossings of ``u1 = 0``) is
        reported segment by segment.

    Returns
    -------
    report : dict
        ``e0`` (value at the first sample of the first curve), ``drift`` =
        max ``|E - e0| / max(1, |e0|)`` over all samples of all curves,
        ``segments`` (drift of each curve against its own first sample, a
        diagnostic only), ``n_samples`` and ``event`` (some curve stopped
        at ``u1 = 0``).
    """
    E = as_energy(E)
    curves = trajectory if isinstance(trajectory, (list, tuple)) else \
        [trajectory]
    if not curves:
        raise EmptyRegion('no trajectory samples')

    per_curve = []
    for curve in curves:
        per_curve.append(np.array([
            E.value(u, u1, settings) if E.kind == 'numeric_label'
            else E.value(u, u1)
            for u, u1 in curve.points[:, 1:]]))

    e0 = per_curve[0][0]
    scale = max(1.0, abs(e0))
    values = np.concatenate(per_curve)
    return {
        'e0': float(e0),
        'drift': float(np.max(np.abs(values - e0)) / scale),
        'segments': [
            float(np.max(np.abs(v - v[0])) / max(1.0, abs(v[0])))
            for v in per_curve],
        'n_samples': int(values.size),
        'event': any(curve.event for curve in curves),
    }


def leaf_rows(trace, E=None):
    """Rows matching :data:`LEAF_COLUMNS`; the energy column is empty
    without a closed form."""
    rows = []
    for u, u1 in zip(trace.u, trace.u1):
        value = '' if E is None else as_energy(E).value(u, u1)
        rows.append([u, u1, value])
    return rows


__all__ = """
    LEAF_COLUMNS
    EnergyModel
    as_energy
    check_energy_candidate
    energy_gradient
    foliation_defect
    LeafTrace
    trace_leaf
    trace_leaves
    energy_label
    leaf_invariant_error
    conservation_report
    leaf_rows
""".split()
