"""
Solutions, their prolongations and geodesics.

Solutions of ``u'' = phi(u, u')`` are integrated with the embedded
Runge-Kutta pairs of :func:`scipy.integrate.solve_ivp`. Approaches to
the excluded plane ``u1 = 0`` are located as integrator events: the
trajectory stops there and the curve is flagged.
"""

import dataclasses
import logging

import numpy as np
from scipy.integrate import solve_ivp

from jetflowlib.config import resolve
from jetflowlib.errors import SingularCrossing, StepFailure
from jetflowlib.geometry import as_point, connection_array, \
    frame_from_phi, metric_at, phi_jet
from jetflowlib.util import WorkerMap, as_triple


logger = logging.getLogger(__name__)


CURVE_COLUMNS = (
    't', 'x', 'u', 'u1', 'tangent_x', 'tangent_u', 'tangent_u1',
    'res_e1', 'res_e2', 'res_e3')

DEFAULT_METHOD = 'RK45'

_DERIVATIVE_STEP = 1.0e-3


@dataclasses.dataclass
class Curve:
    """
    Samples of a curve in the jet space.

    Attributes
    ----------
    t : ndarray, shape (n,)
        Curve parameter, strictly increasing. Equal to ``x`` for
        prolonged solutions.
    points : ndarray, shape (n, 3)
        Coordinates ``(x, u, u1)``.
    tangents : ndarray, shape (n, 3)
        Coordinate components of the velocity.
    residuals : ndarray, shape (n, 3)
        Frame components of the covariant acceleration.
    stats : dict
        ``n_steps``, ``nfev``, ``method``, ``event`` and ``t_stop``.
    kind : str
        ``'solution'`` or ``'geodesic'``.
    velocity : ndarray, shape (n, 3) or None
        Frame components of the velocity (geodesics only).
    dense : callable or None
        Dense output of the integrator over ``[t[0], t_stop]``.
    """
    t: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    residuals: np.ndarray
    stats: dict
    kind: str = 'solution'
    velocity: np.ndarray = None
    dense: object = None

    def __len__(self):
        return self.t.size

    @property
    def event(self):
        return bool(self.stats.get('event', False))

    @property
    def t_stop(self):
        return self.stats.get('t_stop', float(self.t[-1]))

    def max_residual(self):
        return float(np.max(np.abs(self.residuals)))


def _sign(u1):
    return 1.0 if u1 > 0 else -1.0


def _plane_event(sign, eps, index):

    def event(t, y):
        return sign * y[index] - eps

    event.terminal = True
    event.direction = -1
    return event


def _stencil(t, h, lo, hi):
    """Nodes and weights of a fourth-order first-derivative formula."""
    if t - 2.0 * h >= lo and t + 2.0 * h <= hi:
        offsets = np.array([-2.0, -1.0, 1.0, 2.0])
        weights = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
    elif t + 4.0 * h <= hi:
        offsets = np.arange(5.0)
        weights = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    else:
        offsets = -np.arange(5.0)
        weights = -np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0
    return t + h * offsets, weights / h


def _derivative(fun, t, h, lo, hi):
    nodes, weights = _stencil(t, h, lo, hi)
    return np.asarray(fun(nodes)) @ weights


def _derivative_step(lo, hi):
    if not hi > lo:
        raise ValueError('curve has an empty parameter interval')
    return min(_DERIVATIVE_STEP, (hi - lo) / 8.0)


def solution_evaluator(ode, dense, lo, hi, h=None):
    """
    Evaluator ``x -> (u, u', u'', u''')`` of an integrated solution.

    ``u`` and ``u'`` come from the dense output; ``u''`` and ``u'''``
    are fourth-order finite differences of ``u'`` and of ``phi`` along
    the dense output, so the evaluator carries the integration error
    into :func:`geodesic_residual`.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    dense : callable
        Dense output mapping an array of abscissae to ``(u, u1)`` rows.
    lo, hi : float
        Interval covered by the dense output.
    h : float (optional)
        Difference step.
    """
    if h is None:
        h = _derivative_step(lo, hi)

    def phi_along(xs):
        u, u1 = dense(xs)
        return np.array([ode.value(a, b) for a, b in zip(u, u1)])

    def evaluate(x):
        u, u1 = dense(x)
        u2 = _derivative(lambda xs: dense(xs)[1], x, h, lo, hi)
        u3 = _derivative(phi_along, x, h, lo, hi)
        return (float(u), float(u1), float(u2), float(u3))

    return evaluate


def prolongation(f, df, d2f, d3f):
    """Evaluator of an analytic function and its first three derivatives."""

    def evaluate(x):
        return (f(x), df(x), d2f(x), d3f(x))

    return evaluate


def geodesic_residual(ode, curve_eval, x, settings=None):
    """
    Covariant acceleration of the prolongation ``j1 f`` in the frame.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    curve_eval : callable
        ``x -> (f, f', f'', f''')``.
    x : float

    Returns
    -------
    res : ndarray, shape (3,)
        With ``c = f'' - phi``::

            res_1 = c^2 (phi - u1 phi_u1)/u1
            res_2 = c^2 (phi - u1 phi_u1)/u1^2
            res_3 = f''' - e1(phi) - (phi/u1) c

        All three vanish along solutions of the ODE.
    """
    u, u1, u2, u3 = curve_eval(x)
    f = phi_jet(ode, (x, u, u1), settings)
    c = u2 - f.val
    a = f.val - u1 * f.d_v
    e1phi = u1 * f.d_u + f.val * f.d_v
    return np.array([
        c * c * a / u1,
        c * c * a / (u1 * u1),
        u3 - e1phi - (f.val / u1) * c])


def _tolerances(tol, settings):
    if tol is None:
        return settings.rtol, settings.atol
    if not tol > 0:
        raise ValueError('"tol" must be positive')
    return tol, tol


def _finish(sol, kind, method, strict):
    if sol.status == -1:
        raise StepFailure(sol.message)

    event = sol.status == 1
    t_stop = float(sol.t[-1])
    if event:
        logger.warning(
            '%s stopped at t = %.17g where u1 reaches the excluded plane',
            kind, t_stop)
        if strict:
            raise SingularCrossing(t_stop)

    return {
        'n_steps': int(sol.t.size - 1),
        'nfev': int(sol.nfev),
        'method': method,
        'event': bool(event),
        't_stop': t_stop,
    }


def _sample_times(t0, t_stop, event, n):
    return np.linspace(t0, t_stop, n, endpoint=not event)


def integrate_solution(
        ode, init, x_end, tol=None, settings=None, method=DEFAULT_METHOD,
        strict=False, n_samples=None):
    """
    Integrate ``u'' = phi(u, u')`` and prolong the solution.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    init : :class:`~jetflowlib.geometry.JetPoint`
        Initial ``(x0, u(x0), u'(x0))``.
    x_end : float
        Final abscissa, ``x_end > x0``.
    tol : float (optional)
        Relative and absolute tolerance. Defaults to the settings.
    method : str
        Any explicit method of :func:`scipy.integrate.solve_ivp`.
    strict : bool
        Raise :class:`~jetflowlib.errors.SingularCrossing` instead of
        returning a flagged curve when ``|u1|`` falls to ``eps_u1``.
    n_samples : int (optional)
        Number of samples; defaults to ``settings.n_samples``.

    Returns
    -------
    curve : :class:`Curve`
        Samples ``(x, u, u')`` with tangents ``(1, u', phi)`` and the
        frame components of :func:`geodesic_residual`.

    Raises
    ------
    SingularPoint, DomainError, SingularCrossing, StepFailure
    """
    settings = resolve(settings)
    init = as_point(init)
    phi_jet(ode, init, settings)
    if not x_end > init.x:
        raise ValueError('"x_end" must be greater than the initial x')

    rtol, atol = _tolerances(tol, settings)

    def rhs(x, y):
        return [y[1], ode.value(y[0], y[1])]

    sol = solve_ivp(
        rhs, (init.x, x_end), [init.u, init.u1], method=method,
        rtol=rtol, atol=atol, dense_output=True,
        events=_plane_event(_sign(init.u1), settings.eps_u1, 1))

    stats = _finish(sol, 'solution', method, strict)
    return _solution_curve(
        ode, sol.sol, init.x, stats, settings, n_samples)


def _solution_curve(ode, dense, x0, stats, settings, n_samples=None):
    n = n_samples or settings.n_samples
    ts = _sample_times(x0, stats['t_stop'], stats['event'], n)
    u, u1 = dense(ts)
    phi = np.array([ode.value(a, b) for a, b in zip(u, u1)])

    evaluate = solution_evaluator(ode, dense, x0, stats['t_stop'])
    residuals = np.array([
        geodesic_residual(ode, evaluate, x, settings) for x in ts])

    return Curve(
        t=ts,
        points=np.column_stack([ts, u, u1]),
        tangents=np.column_stack([np.ones_like(ts), u1, phi]),
        residuals=residuals,
        stats=stats,
        kind='solution',
        dense=dense)


def integrate_segments(
        ode, init, x_end, tol=None, settings=None, method=DEFAULT_METHOD,
        n_samples=None):
    """
    Integrate through crossings of ``u1 = 0`` and split the solution.

    The planar system is smooth across ``u1 = 0``; only its prolongation
    leaves the manifold there. Each returned curve covers one interval
    between consecutive crossings, with samples at distance more than
    ``eps_u1`` from the plane.

    Returns
    -------
    segments : list of :class:`Curve`
    """
    settings = resolve(settings)
    init = as_point(init)
    phi_jet(ode, init, settings)
    if not x_end > init.x:
        raise ValueError('"x_end" must be greater than the initial x')

    rtol, atol = _tolerances(tol, settings)

    def rhs(x, y):
        return [y[1], ode.value(y[0], y[1])]

    def crossing(x, y):
        return y[1]

    sol = solve_ivp(
        rhs, (init.x, x_end), [init.u, init.u1], method=method,
        rtol=rtol, atol=atol, dense_output=True, events=crossing)
    if sol.status == -1:
        raise StepFailure(sol.message)

    edges = np.concatenate([[init.x], sol.t_events[0], [x_end]])
    logger.info('solution crosses u1 = 0 %d times', sol.t_events[0].size)

    n = n_samples or settings.n_samples
    segments = []
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        ts = np.linspace(a, b, n)
        u, u1 = sol.sol(ts)
        keep = np.abs(u1) > settings.eps_u1
        ts, u, u1 = ts[keep], u[keep], u1[keep]
        if ts.size < 2:
            continue

        phi = np.array([ode.value(p, q) for p, q in zip(u, u1)])
        evaluate = solution_evaluator(ode, sol.sol, a, b)
        residuals = np.array([
            geodesic_residual(ode, evaluate, x, settings) for x in ts])

        segments.append(Curve(
            t=ts,
            points=np.column_stack([ts, u, u1]),
            tangents=np.column_stack([np.ones_like(ts), u1, phi]),
            residuals=residuals,
            stats={
                'n_steps': int(sol.t.size - 1),
                'nfev': int(sol.nfev),
                'method': method,
                'event': bool(b < x_end),
                't_stop': float(b),
            },
            kind='solution',
            dense=sol.sol))

    return segments


def _geodesic_acceleration(theta, c):
    # dc^k/dt = -sum_ij (e_i _| Theta^k_j) c^i c^j
    return -np.einsum('kji,i,j->k', theta, c, c)


def integrate_geodesic(
        ode, init, init_tangent, t_end, tol=None, settings=None,
        method=DEFAULT_METHOD, strict=False, n_samples=None):
    """
    Integrate the geodesic equation from a point and a tangent vector.

    The state is the position together with the frame components ``c``
    of the velocity, so the Christoffel symbols are the connection
    coefficients of :func:`~jetflowlib.geometry.connection_forms_at`
    evaluated along the way.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    init : :class:`~jetflowlib.geometry.JetPoint`
    init_tangent : array-like, shape (3,)
        Initial velocity in coordinates ``(d_x, d_u, d_u1)``.
    t_end : float
        Final parameter value, the curve starts at ``t = 0``.

    Returns
    -------
    curve : :class:`Curve`
        Residuals are ``dc/dt + Gamma(c, c)`` with ``dc/dt`` taken by
        finite differences of the dense output.

    Raises
    ------
    ValueError
        Zero tangent vector.
    SingularPoint, DomainError, SingularCrossing, StepFailure
    """
    settings = resolve(settings)
    init = as_point(init)
    f0 = phi_jet(ode, init, settings)

    v = as_triple(init_tangent, 'init_tangent')
    if not np.any(v):
        raise ValueError('geodesic needs a nonzero initial tangent')
    if not t_end > 0:
        raise ValueError('"t_end" must be positive')

    c0 = frame_from_phi(init.u1, f0.val).to_frame(v)
    rtol, atol = _tolerances(tol, settings)

    def rhs(t, z):
        f = ode.jet(z[1], z[2])
        c = z[3:]
        frame = frame_from_phi(z[2], f.val)
        return np.concatenate([
            frame.to_coordinates(c),
            _geodesic_acceleration(connection_array(z[2], f), c)])

    sol = solve_ivp(
        rhs, (0.0, t_end), np.concatenate([init.as_array(), c0]),
        method=method, rtol=rtol, atol=atol, dense_output=True,
        events=_plane_event(_sign(init.u1), settings.eps_u1, 2))

    stats = _finish(sol, 'geodesic', method, strict)

    n = n_samples or settings.n_samples
    ts = _sample_times(0.0, stats['t_stop'], stats['event'], n)
    Z = sol.sol(ts)
    points, velocity = Z[:3].T, Z[3:].T

    h = _derivative_step(0.0, stats['t_stop'])
    tangents = []
    residuals = []
    for t, y, c in zip(ts, points, velocity):
        f = phi_jet(ode, y, settings)
        tangents.append(frame_from_phi(y[2], f.val).to_coordinates(c))
        dc = _derivative(
            lambda s: sol.sol(s)[3:], t, h, 0.0, stats['t_stop'])
        residuals.append(
            dc - _geodesic_acceleration(connection_array(y[2], f), c))

    return Curve(
        t=ts,
        points=points,
        tangents=np.array(tangents),
        residuals=np.array(residuals),
        stats=stats,
        kind='geodesic',
        velocity=velocity,
        dense=sol.sol)


def speed_profile(ode, curve, settings=None):
    """``g(tangent, tangent)`` at every sample of a curve."""
    return np.array([
        v @ metric_at(ode, p, settings) @ v
        for p, v in zip(curve.points, curve.tangents)])


def integrate_batch(ode, inits, x_end, jobs=1, **kwargs):
    """
    Integrate several initial conditions, in input order.

    ``kwargs`` are passed on to :func:`integrate_solution`.
    """
    def job(init):
        return integrate_solution(ode, init, x_end, **kwargs)

    with WorkerMap(jobs) as map_function:
        return map_function(job, list(inits))


def curve_to_rows(curve):
    """Rows matching :data:`CURVE_COLUMNS`."""
    return [
        [t] + list(p) + list(v) + list(r)
        for t, p, v, r in zip(
            curve.t, curve.points, curve.tangents, curve.residuals)]


__all__ = """
    CURVE_COLUMNS
    Curve
    solution_evaluator
    prolongation
    geodesic_residual
    integrate_solution
    integrate_segments
    integrate_geodesic
    speed_profile
    integrate_batch
    curve_to_rows
""".split()
