"""
Autonomous Lagrangians from energies.

Any ``L(u, u1)`` with energy function ``u1 L_u1 - L = E`` has an
Euler-Lagrange equation equivalent to the ODE whose foliation ``E``
defines. A particular solution is

    L(u, u1) = u1 * int_{u1_base}^{u1} E(u, s)/s^2 ds,

evaluated here by adaptive Gauss-Kronrod quadrature.
"""

import dataclasses
import functools
import logging
import math
import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from jetflowlib.config import resolve
from jetflowlib.errors import DegenerateLagrangian, QuadratureFailure, \
    SignCrossing
from jetflowlib.expr import PHI_VARS, U_VARS, CombinedField, \
    ExprField, as_field, parse, to_text
from jetflowlib.geometry import as_point, phi_jet
from jetflowlib.util import Region


logger = logging.getLogger(__name__)


LAGRANGIAN_COLUMNS = ('u', 'u1', 'L', 'L_u', 'L_u1', 'h', 'el_residual')

DEGENERACY_TOL = 1.0e-12


@dataclasses.dataclass(frozen=True)
class LagrangianJet:
    """Value and partials up to second order of ``L`` at a point."""
    L: float
    L_u: float
    L_u1: float
    L_uu: float
    L_uu1: float
    L_u1u1: float

    @classmethod
    def from_hyperdual(cls, a):
        return cls(*a.as_tuple())

    def __add__(self, other):
        return LagrangianJet(*(
            a + b for a, b in zip(
                dataclasses.astuple(self), dataclasses.astuple(other))))


def quadrature(fun, a, b, settings=None):
    """
    ``int_a^b fun(s) ds`` with warnings turned into errors.

    Raises
    ------
    QuadratureFailure
    """
    settings = resolve(settings)
    with warnings.catch_warnings():
        warnings.simplefilter('error', IntegrationWarning)
        try:
            value, _ = quad(
                fun, a, b, epsabs=settings.quad_tol, epsrel=1.0e-13,
                limit=200)
        except IntegrationWarning as exc:
            logger.warning('quadrature on [%r, %r] failed: %s', a, b, exc)
            raise QuadratureFailure(str(exc)) from None
    return value


class LagrangianModel:
    """
    A Lagrangian ``L(u, u1)``.

    Use :meth:`closed_form` or :func:`build_lagrangian` to create one.

    Attributes
    ----------
    kind : str
        ``'closed_form'`` or ``'quadrature'``.
    field : :class:`~jetflowlib.expr.ScalarField`
        The closed form, or the energy for the quadrature kind.
    u1_base : float or None
        Lower limit of the quadrature.
    gauge : :class:`~jetflowlib.expr.ScalarField` or None
        Null Lagrangian added to ``L``.
    """

    def __init__(self, kind, field, u1_base=None, gauge=None, settings=None):
        if kind not in ('closed_form', 'quadrature'):
            raise ValueError('unknown Lagrangian kind "{}"'.format(kind))
        self.kind = kind
        self.field = field
        self.u1_base = u1_base
        self.gauge = gauge
        self.settings = resolve(settings)
        self._quadrature_jet = functools.lru_cache(maxsize=4096)(
            self._integrate)

    @classmethod
    def closed_form(cls, L, params=None, settings=None):
        return cls('closed_form', as_field(L, params, PHI_VARS),
                   settings=settings)

    def _integrate(self, u, u1):
        b = self.u1_base
        if u1 == 0.0 or u1 * b <= 0.0:
            raise SignCrossing(
                'quadrature interval [{!r}, {!r}] contains u1 = 0'.format(
                    b, u1))

        E = self.field

        def slot(k):
            return lambda s: E.jet(u, s).as_tuple()[k] / (s * s)

        # I = int E/s^2, J = int E_u/s^2, K = int E_uu/s^2
        I = quadrature(slot(0), b, u1, self.settings)
        J = quadrature(slot(1), b, u1, self.settings)
        K = quadrature(slot(3), b, u1, self.settings)
        e = E.jet(u, u1)

        return LagrangianJet(
            L=u1 * I,
            L_u=u1 * J,
            L_u1=I + e.val / u1,
            L_uu=u1 * K,
            L_uu1=J + e.d_u / u1,
            L_u1u1=e.d_v / u1)

    def jet(self, u, u1):
        """
        Value and partials of ``L``.

        Closed forms are differentiated automatically; for the quadrature
        kind the partials are quadratures of the partials of ``E``.
        """
        u, u1 = float(u), float(u1)
        if self.kind == 'closed_form':
            jet = LagrangianJet.from_hyperdual(self.field.jet(u, u1))
        else:
            jet = self._quadrature_jet(u, u1)
        if self.gauge is not None:
            jet = jet + LagrangianJet.from_hyperdual(self.gauge.jet(u, u1))
        return jet

    def value(self, u, u1):
        if self.kind == 'closed_form' and self.gauge is None:
            return self.field.value(u, u1)
        return self.jet(u, u1).L

    __call__ = value

    def __repr__(self):
        if self.kind == 'closed_form':
            return 'LagrangianModel({!r})'.format(self.field)
        return 'LagrangianModel(quadrature of {!r} from {!r})'.format(
            self.field, self.u1_base)


def build_lagrangian(E, u1_base, params=None, settings=None):
    """
    Lagrangian whose energy function is ``E``.

    Parameters
    ----------
    E : :class:`~jetflowlib.energy.EnergyModel`, field or text
        Closed-form energy over ``u, u1``.
    u1_base : float
        Nonzero lower limit of the quadrature, with the sign of the
        working ``u1`` values.

    Returns
    -------
    L : :class:`LagrangianModel`
        ``L = u1 * int_{u1_base}^{u1} E(u, s)/s^2 ds``; values are
        memoized per ``(u, u1)``.

    Raises
    ------
    SignCrossing
        ``u1_base == 0``.
    """
    if u1_base == 0:
        raise SignCrossing('u1_base must be nonzero')
    if getattr(E, 'kind', None) == 'numeric_label':
        raise ValueError('a Lagrangian needs a closed-form energy')
    field = E.field if hasattr(E, 'kind') else as_field(E, params, PHI_VARS)
    return LagrangianModel(
        'quadrature', field, u1_base=float(u1_base), settings=settings)


def add_null_lagrangian(L, c, g_text, params=None):
    """
    Add the null Lagrangian ``c*u1 + u1*g(u)``.

    The Euler-Lagrange equation does not change.
    """
    g = parse(g_text, U_VARS)
    gauge = ExprField(
        '{!r}*u1 + u1*{}'.format(float(c), to_text(g)), params)
    if L.gauge is not None:
        gauge = CombinedField(
            lambda u, u1, a, b: a + b, L.gauge, gauge, name='gauge')
    return LagrangianModel(
        L.kind, L.field, u1_base=L.u1_base, gauge=gauge,
        settings=L.settings)


def _fd_jet(L, u, u1, h):
    f = {
        (i, j): L.value(u + i * h, u1 + j * h)
        for i in (-1, 0, 1) for j in (-1, 0, 1)}
    return LagrangianJet(
        L=f[0, 0],
        L_u=(f[1, 0] - f[-1, 0]) / (2.0 * h),
        L_u1=(f[0, 1] - f[0, -1]) / (2.0 * h),
        L_uu=(f[1, 0] - 2.0 * f[0, 0] + f[-1, 0]) / (h * h),
        L_uu1=(f[1, 1] - f[1, -1] - f[-1, 1] + f[-1, -1]) / (4.0 * h * h),
        L_u1u1=(f[0, 1] - 2.0 * f[0, 0] + f[0, -1]) / (h * h))


def lagrangian_jet(L, u, u1, method='ad', h=1.0e-4):
    """
    Partials of ``L`` by automatic differentiation (``'ad'``) or by
    central differences of its values (``'fd'``).
    """
    if method == 'ad':
        return L.jet(u, u1)
    if method == 'fd':
        return _fd_jet(L, u, u1, h)
    raise ValueError('method must be "ad" or "fd" (got "{}")'.format(method))


def el_residual_at(ode, L, u, u1, method='ad', settings=None):
    """``u1 L_uu1 + phi L_u1u1 - L_u`` at one point."""
    f = phi_jet(ode, (0.0, u, u1), settings)
    j = lagrangian_jet(L, u, u1, method)
    return u1 * j.L_uu1 + f.val * j.L_u1u1 - j.L_u


def _samples(trajectory):
    if isinstance(trajectory, (list, tuple)):
        return np.vstack([c.points for c in trajectory])
    if hasattr(trajectory, 'points'):
        return trajectory.points
    return np.asarray(trajectory, dtype=np.float64).reshape(-1, 3)


def el_residual(ode, L, trajectory, method='ad', settings=None):
    """
    Largest Euler-Lagrange residual along a trajectory.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
        Supplies ``u2 = phi(u, u1)`` at every sample.
    L : :class:`LagrangianModel`
    trajectory : :class:`~jetflowlib.dynamics.Curve`, list of curves or
        array-like of ``(x, u, u1)`` rows
    method : {'ad', 'fd'}

    Returns
    -------
    residual : float
        max ``|u1 L_uu1 + phi L_u1u1 - L_u|``.
    """
    return float(max(
        abs(el_residual_at(ode, L, u, u1, method, settings))
        for _, u, u1 in _samples(trajectory)))


def energy_function(L, p):
    """Energy function ``h = u1 L_u1 - L`` at a point."""
    p = as_point(p)
    j = L.jet(p.u, p.u1)
    return p.u1 * j.L_u1 - j.L


def energy_function_check(ode, L, region, method='ad', tol=None, settings=None):
    """
    Check that the energy function of ``L`` defines the foliation of
    the ODE, ``dh = u1 L_u1u1 w3``.

    Parameters
    ----------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    L : :class:`LagrangianModel`
    region : :class:`~jetflowlib.util.Region` or array-like, shape (n, 2)
    method : {'ad', 'fd'}
        With ``'fd'`` the gradient of ``h`` and ``L_u1u1`` are central
        differences.
    tol : float (optional)
        1e-8 for ``'ad'``, 1e-6 for ``'fd'`` by default.

    Returns
    -------
    report : dict
        ``max_defect`` over the ``du`` and ``du1`` components,
        ``min_abs_mu`` = min ``|u1 L_u1u1|``, ``n_points``, ``tol`` and
        ``passes``.

    Raises
    ------
    DegenerateLagrangian
        ``|u1 L_u1u1| <= 1e-12`` at some sample.
    """
    settings = resolve(settings)
    if tol is None:
        tol = 1.0e-8 if method == 'ad' else 1.0e-6
    pts = region.grid() if isinstance(region, Region) else \
        np.asarray(region, dtype=np.float64).reshape(-1, 2)

    h_step = 1.0e-5
    defect = 0.0
    min_mu = np.inf
    for u, u1 in pts:
        f = phi_jet(ode, (0.0, u, u1), settings)
        j = lagrangian_jet(L, u, u1, method)
        mu = u1 * j.L_u1u1
        if method == 'ad':
            h_u = u1 * j.L_uu1 - j.L_u
            h_u1 = mu
        else:
            def h(a, b):
                return energy_function(L, (0.0, a, b))
            h_u = (h(u + h_step, u1) - h(u - h_step, u1)) / (2.0 * h_step)
            h_u1 = (h(u, u1 + h_step) - h(u, u1 - h_step)) / (2.0 * h_step)

        # mu w3 = mu du1 - mu (phi/u1) du
        defect = max(
            defect, abs(h_u + mu * f.val / u1), abs(h_u1 - mu))
        min_mu = min(min_mu, abs(mu))

    if min_mu <= DEGENERACY_TOL:
        raise DegenerateLagrangian(
            'u1 L_u1u1 vanishes in the region (min {:g})'.format(min_mu))

    return {
        'max_defect': float(defect),
        'min_abs_mu': float(min_mu),
        'n_points': int(len(pts)),
        'tol': float(tol),
        'passes': bool(defect <= tol),
    }


def classical_damped_energy(alpha, lam, x, u, u1):
    """
    Time-dependent energy ``e^(alpha x) (u1^2 + lam u^2)/2`` of the
    standard damped-oscillator Lagrangian; not conserved for
    ``alpha != 0``.
    """
    return 0.5 * math.exp(alpha * x) * (u1 * u1 + lam * u * u)


def lagrangian_rows(ode, L, points, settings=None):
    """Rows matching :data:`LAGRANGIAN_COLUMNS` for ``(u, u1)`` points."""
    rows = []
    for u, u1 in np.asarray(points, dtype=np.float64).reshape(-1, 2):
        j = L.jet(u, u1)
        rows.append([
            u, u1, j.L, j.L_u, j.L_u1, u1 * j.L_u1 - j.L,
            el_residual_at(ode, L, u, u1, settings=settings)])
    return rows


__all__ = """
    LAGRANGIAN_COLUMNS
    LagrangianJet
    quadrature
    LagrangianModel
    build_lagrangian
    add_null_lagrangian
    lagrangian_jet
    el_residual_at
    el_residual
    energy_function
    energy_function_check
    classical_damped_energy
    lagrangian_rows
""".split()
