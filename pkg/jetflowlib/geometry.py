"""
Metric, orthonormal frame, connection and curvature of the Riemannian
3-manifold attached to an autonomous ODE ``u'' = phi(u, u')``.

The manifold is the part of the first jet space with coordinates
``(x, u, u1)`` where ``u1 != 0``. The coframe is

    w1 = dx,   w2 = du - u1 dx,   w3 = du1 - (phi/u1) du,

and the metric is ``g = w1^2 + w2^2 + w3^2``. Index arguments ``i``,
``j`` of the public functions are 1-based, as in the usual notation;
arrays are 0-based.
"""

import dataclasses
import logging

import numpy as np

from jetflowlib import forms
from jetflowlib.config import resolve
from jetflowlib.errors import DomainError, InvalidDomain, SingularPoint, \
    StepTooLarge
from jetflowlib.expr import PHI_VARS, ScalarField, as_field
from jetflowlib.util import WorkerMap


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class JetPoint:
    """A point ``(x, u, u1)`` of the jet space."""
    x: float
    u: float
    u1: float

    def as_array(self):
        return np.array([self.x, self.u, self.u1], dtype=np.float64)

    @classmethod
    def from_array(cls, y):
        return cls(float(y[0]), float(y[1]), float(y[2]))


def as_point(p):
    if isinstance(p, JetPoint):
        return p
    if len(p) != 3:
        raise ValueError('a jet point needs three coordinates (x, u, u1)')
    return JetPoint(float(p[0]), float(p[1]), float(p[2]))


class _ShiftedField(ScalarField):

    def __init__(self, field, shift):
        self.field = field
        self.shift = float(shift)

    def eval_hd(self, u, u1):
        return self.field.eval_hd(u, u1) + self.shift


class OdeRhs:
    """
    Right-hand side ``phi(u, u1)`` of an autonomous second-order ODE.

    Parameters
    ----------
    phi : :class:`~jetflowlib.expr.ScalarField`, AST or str
        The function ``phi``. Expression text may use ``u``, ``u1`` and
        parameters bound by ``params``.
    params : mapping (optional)
        Parameter values for expression text.
    domain : callable (optional)
        Predicate ``domain(u, u1) -> bool`` restricting the open set
        where ``phi`` is smooth.
    name : str (optional)
        Label used in reports.
    """

    def __init__(self, phi, params=None, domain=None, name=None):
        self.params = dict(params or {})
        self.field = as_field(phi, self.params, PHI_VARS)
        self.domain = domain
        self.name = name or repr(self.field)

    def jet(self, u, u1):
        """Value, first and second partials of ``phi`` in one call."""
        if not self.in_domain(u, u1):
            raise InvalidDomain(
                'point (u={!r}, u1={!r}) is outside the domain of '
                '{}'.format(u, u1, self.name))
        return self.field.jet(u, u1)

    def value(self, u, u1):
        return self.jet(u, u1).val

    __call__ = value

    def in_domain(self, u, u1):
        if self.domain is None:
            return True
        return bool(self.domain(u, u1))

    def shifted(self, delta):
        """Right-hand side ``phi + delta``."""
        return OdeRhs(
            _ShiftedField(self.field, delta), domain=self.domain,
            name='{} + {!r}'.format(self.name, delta))

    def __repr__(self):
        return 'OdeRhs({})'.format(self.name)


def phi_jet(ode, p, settings=None):
    """
    Validate a point and return the jet of ``phi`` there.

    Raises
    ------
    SingularPoint
        ``|u1| <= eps_u1``.
    DomainError
        ``phi`` is not smooth at the point.
    """
    settings = resolve(settings)
    p = as_point(p)
    if not abs(p.u1) > settings.eps_u1:
        raise SingularPoint(
            'u1 = {!r} is within {:g} of the excluded plane u1 = 0'.format(
                p.u1, settings.eps_u1))
    return ode.jet(p.u, p.u1)


def e1_phi(ode, p, settings=None):
    """Derivative of ``phi`` along ``e1``, ``u1*phi_u + phi*phi_u1``."""
    p = as_point(p)
    f = phi_jet(ode, p, settings)
    return p.u1 * f.d_u + f.val * f.d_v


@dataclasses.dataclass(frozen=True)
class FrameData:
    """
    Orthonormal frame and dual coframe at a point.

    ``e1``, ``e2``, ``e3`` hold components in the basis
    ``(d_x, d_u, d_u1)``; ``w1``, ``w2``, ``w3`` in ``(dx, du, du1)``.
    """
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray

    @property
    def frame(self):
        """Rows are ``e1``, ``e2``, ``e3``."""
        return np.vstack([self.e1, self.e2, self.e3])

    @property
    def coframe(self):
        """Rows are ``w1``, ``w2``, ``w3``."""
        return np.vstack([self.w1, self.w2, self.w3])

    def pairing(self):
        """Matrix ``w^i(e_j)``."""
        return self.coframe @ self.frame.T

    def to_frame(self, v):
        """Frame components of a coordinate vector."""
        return self.coframe @ np.asarray(v, dtype=np.float64)

    def to_coordinates(self, c):
        """Coordinate components of a vector given in the frame."""
        return self.frame.T @ np.asarray(c, dtype=np.float64)


def frame_from_phi(u1, phi):
    psi = phi / u1
    return FrameData(
        e1=np.array([1.0, u1, phi]),
        e2=np.array([0.0, 1.0, psi]),
        e3=np.array([0.0, 0.0, 1.0]),
        w1=np.array([1.0, 0.0, 0.0]),
        w2=np.array([-u1, 1.0, 0.0]),
        w3=np.array([0.0, -psi, 1.0]))


def frame_at(ode, p, settings=None):
    """
    Orthonormal frame and coframe.

    Parameters
    ----------
    ode : :class:`OdeRhs`
    p : :class:`JetPoint` or sequence of 3 floats

    Returns
    -------
    frame : :class:`FrameData`
        ``e1 = (1, u1, phi)``, ``e2 = (0, 1, phi/u1)``, ``e3 = (0, 0, 1)``
        and ``w1 = (1, 0, 0)``, ``w2 = (-u1, 1, 0)``,
        ``w3 = (0, -phi/u1, 1)``.
    """
    p = as_point(p)
    f = phi_jet(ode, p, settings)
    return frame_from_phi(p.u1, f.val)


def metric_at(ode, p, settings=None):
    """
    Metric tensor in the coordinate basis ``(dx, du, du1)``.

    Returns
    -------
    g : ndarray, shape (3, 3)
        ``W^T W`` where the rows of ``W`` are the coframe. ``W`` is unit
        lower triangular, so ``det(g) = 1``.

    Raises
    ------
    SingularPoint, DomainError
    """
    W = frame_at(ode, p, settings).coframe
    g = W.T @ W
    if not forms.is_positive_definite(g):
        raise DomainError('metric is not positive definite at {}'.format(p))
    return g


def metric_norm(ode, p, v, settings=None):
    """Length ``sqrt(g(v, v))`` of a coordinate vector."""
    c = frame_at(ode, p, settings).to_frame(v)
    return float(np.sqrt(np.dot(c, c)))


@dataclasses.dataclass(frozen=True)
class ConnForms:
    """
    Connection 1-forms in the coframe basis.

    ``theta[i, j, k]`` is the coefficient of ``w^(k+1)`` in the form
    ``Theta^(i+1)_(j+1)``; the array is antisymmetric in ``(i, j)``.
    """
    theta: np.ndarray

    def form(self, i, j):
        """Coefficients of ``Theta^i_j`` (1-based indices)."""
        return self.theta[_index(i), _index(j)].copy()

    def in_coordinates(self, coframe):
        """Array ``[i, j, :]`` of coordinate components of each form."""
        return self.theta @ coframe


def _index(i):
    if i not in (1, 2, 3):
        raise ValueError('frame indices run over 1, 2, 3 (got {!r})'.format(i))
    return i - 1


def connection_array(u1, f):
    psi = f.val / u1
    a = f.d_v - psi
    b = (u1 * f.d_v - f.val) / (u1 * u1)

    theta = np.zeros((3, 3, 3))
    theta[0, 1] = (0.0, -psi, -0.5)
    theta[0, 2] = (0.0, -0.5, -a)
    theta[1, 2] = (-0.5, 0.0, -b)
    theta[1, 0] = -theta[0, 1]
    theta[2, 0] = -theta[0, 2]
    theta[2, 1] = -theta[1, 2]
    return theta


def connection_forms_at(ode, p, settings=None):
    """
    Levi-Civita connection forms of the orthonormal coframe.

    Returns
    -------
    conn : :class:`ConnForms`
        With ``Theta^1_2 = -(phi/u1) w2 - w3/2``,
        ``Theta^1_3 = -w2/2 - (phi_u1 - phi/u1) w3`` and
        ``Theta^2_3 = -w1/2 - ((u1 phi_u1 - phi)/u1^2) w3``.
    """
    p = as_point(p)
    f = phi_jet(ode, p, settings)
    return ConnForms(connection_array(p.u1, f))


def covariant_derivative_frame(ode, p, i, j, settings=None):
    """
    Frame components of ``nabla_{e_i} e_j``.

    The k-th component is the interior product ``e_i _| Theta^k_j``,
    i.e. the ``w^i`` coefficient of ``Theta^k_j``.

    Parameters
    ----------
    i, j : int, {1, 2, 3}
    """
    ii, jj = _index(i), _index(j)
    theta = connection_forms_at(ode, p, settings).theta
    return theta[:, jj, ii].copy()


def bracket_e1_e2(ode, p, settings=None):
    """
    Frame components of ``[e1, e2] = nabla_{e1} e2 - nabla_{e2} e1``.

    Equals ``(0, -phi/u1, 0)`` for a torsion-free connection.
    """
    theta = connection_forms_at(ode, p, settings).theta
    return theta[:, 1, 0] - theta[:, 0, 1]


@dataclasses.dataclass(frozen=True)
class CurvTriple:
    r1212: float
    r1313: float
    r2323: float

    def as_tuple(self):
        return (self.r1212, self.r1313, self.r2323)


def sectional_curvatures(ode, p, settings=None):
    """
    Sectional curvatures of the planes spanned by frame pairs.

    Returns
    -------
    curv : :class:`CurvTriple`
        ``r1212`` for ``{e1, e2}``, ``r1313`` for ``{e1, e3}`` and
        ``r2323`` for ``{e2, e3}``.

    Notes
    -----
    With ``e1(phi) = u1 phi_u + phi phi_u1``::

        r1212 = 1/4 - e1(phi)/u1
        r1313 = -3/4 + phi_u - phi_u1^2 - phi phi_u1u1 - u1 phi_uu1
                + 3 phi phi_u1/u1 - 2 phi^2/u1^2
        r2323 = 1/4 - (phi phi_u1 + phi_uu1)/u1
                - (phi phi_u1u1 - phi^2 - phi_u + phi_u1^2)/u1^2
                + 4 phi phi_u1/u1^3 - 3 phi^2/u1^4
    """
    p = as_point(p)
    f = phi_jet(ode, p, settings)
    v = p.u1
    phi, phi_u, phi_v = f.val, f.d_u, f.d_v
    phi_uv, phi_vv = f.d_uv, f.d_vv

    e1phi = v * phi_u + phi * phi_v
    r1212 = 0.25 - e1phi / v
    r1313 = (
        -0.75 + phi_u - phi_v**2 - phi * phi_vv - phi_uv * v
        + 3.0 * phi * phi_v / v - 2.0 * phi**2 / v**2)
    r2323 = (
        0.25 - (phi * phi_v + phi_uv) / v
        - (phi * phi_vv - phi**2 - phi_u + phi_v**2) / v**2
        + 4.0 * phi * phi_v / v**3 - 3.0 * phi**2 / v**4)

    return CurvTriple(r1212, r1313, r2323)


@dataclasses.dataclass(frozen=True)
class LeafGeom:
    """
    Second fundamental form data of the leaf through a point.

    ``s`` is the shape operator in the basis ``(e1, e2)``; ``gauss_defect``
    is ``|k_int - (r1212 + k_ext)|``.
    """
    mean_curvature: float
    k_ext: float
    k_int: float
    s: np.ndarray
    gauss_defect: float


def leaf_geometry(ode, p, settings=None):
    """
    Mean, extrinsic and intrinsic curvature of the energy leaf through
    ``p``.

    The leaf is tangent to ``{e1, e2}`` with unit normal ``e3``; the
    shape operator entries are ``s_ij = e_j _| Theta^3_i``.

    Returns
    -------
    leaf : :class:`LeafGeom`
        ``k_int = -e1(phi)/u1`` and the Gauss-equation consistency.
    """
    p = as_point(p)
    f = phi_jet(ode, p, settings)
    theta = connection_array(p.u1, f)
    s = theta[2, :2, :2].copy()

    mean_curvature = 0.5 * (s[0, 0] + s[1, 1])
    k_ext = float(s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0])
    k_int = -(p.u1 * f.d_u + f.val * f.d_v) / p.u1
    r1212 = sectional_curvatures(ode, p, settings).r1212

    return LeafGeom(
        mean_curvature=float(mean_curvature),
        k_ext=k_ext,
        k_int=k_int,
        s=s,
        gauss_defect=abs(k_int - (r1212 + k_ext)))


def _stencil_fields(ode, settings):

    def checked_jet(y):
        try:
            return phi_jet(ode, (y[0], y[1], y[2]), settings)
        except (SingularPoint, DomainError) as exc:
            raise StepTooLarge(
                'difference stencil leaves the domain at {}: {}'.format(
                    tuple(y), exc)) from None

    def coframe(y):
        return frame_from_phi(y[2], checked_jet(y).val).coframe

    def theta_coords(y):
        f = checked_jet(y)
        W = frame_from_phi(y[2], f.val).coframe
        return connection_array(y[2], f) @ W

    return coframe, theta_coords


def _d_omega_expected(u1, f, W):
    psi = f.val / u1
    a = f.d_v - psi
    b = (u1 * f.d_v - f.val) / (u1 * u1)
    w1, w2, w3 = W
    return np.stack([
        np.zeros((3, 3)),
        psi * forms.wedge(w1, w2) + forms.wedge(w1, w3),
        a * forms.wedge(w1, w3) + b * forms.wedge(w2, w3)])


def cartan_residuals(ode, p, h=None, settings=None):
    """
    Finite-difference check of both structural equations at a point.

    Parameters
    ----------
    ode : :class:`OdeRhs`
    p : :class:`JetPoint`
    h : float (optional)
        Central-difference step. Defaults to ``settings.fd_step``.

    Returns
    -------
    report : dict
        ``d_omega``: max abs difference between the numerical ``dw^i``
        and their closed forms in the coframe;
        ``torsion``: max abs residual of ``dw^i - sum_k w^k ^ Theta^i_k``;
        ``curvature``: max abs difference between the frame values
        ``Omega^1_2(e1, e2)``, ``Omega^1_3(e1, e3)``, ``Omega^2_3(e2, e3)``
        of ``Omega = dTheta + Theta ^ Theta`` and
        :func:`sectional_curvatures`;
        ``numeric``: those three numerical values.

    Raises
    ------
    SingularPoint, DomainError
        At ``p`` itself.
    StepTooLarge
        A stencil point leaves the domain.
    """
    settings = resolve(settings)
    if h is None:
        h = settings.fd_step
    if not h > 0:
        raise ValueError('"h" must be positive')

    p = as_point(p)
    y = p.as_array()
    f = phi_jet(ode, p, settings)
    frame = frame_from_phi(p.u1, f.val)
    W = frame.coframe

    coframe, theta_coords = _stencil_fields(ode, settings)

    # dw[i] is the 2-form dw^i as an antisymmetric matrix
    dw = forms.exterior_derivative(coframe, y, h)
    d_omega = np.max(np.abs(dw - _d_omega_expected(p.u1, f, W)))

    Th = connection_array(p.u1, f) @ W
    torsion_free = np.stack([
        sum(forms.wedge(W[k], Th[i, k]) for k in range(3))
        for i in range(3)])
    torsion = np.max(np.abs(dw - torsion_free))

    dTh = forms.exterior_derivative(theta_coords, y, h)
    E = frame.frame

    def omega(i, j):
        return dTh[i, j] + sum(
            forms.wedge(Th[i, k], Th[k, j]) for k in range(3))

    numeric = CurvTriple(
        forms.evaluate2(omega(0, 1), E[0], E[1]),
        forms.evaluate2(omega(0, 2), E[0], E[2]),
        forms.evaluate2(omega(1, 2), E[1], E[2]))
    closed = sectional_curvatures(ode, p, settings)
    curvature = max(
        abs(a - b) for a, b in zip(numeric.as_tuple(), closed.as_tuple()))

    logger.debug(
        'cartan residuals at %s: d_omega=%.3g torsion=%.3g curvature=%.3g',
        p, d_omega, torsion, curvature)

    return {
        'd_omega': float(d_omega),
        'torsion': float(torsion),
        'curvature': float(curvature),
        'numeric': numeric,
    }


def phi_over_u1_slope(ode, u, u1):
    """``(phi/u1)_u1 = (u1 phi_u1 - phi)/u1^2``."""
    f = ode.jet(u, u1)
    return (u1 * f.d_v - f.val) / (u1 * u1)


def geodesic_hypothesis(ode, points, tol=1.0e-12, settings=None):
    """
    Test whether ``(phi/u1)_u1`` vanishes at sample points.

    Where it does not vanish, a prolongation ``j1 f`` that is a
    geodesic forces ``f`` to solve the ODE; where it vanishes, geodesic
    prolongations of non-solutions may exist.

    Parameters
    ----------
    ode : :class:`OdeRhs`
    points : array-like, shape (n, 2)
        Sample ``(u, u1)`` pairs.
    tol : float
        Values with absolute value at most ``tol`` count as zero.

    Returns
    -------
    report : dict
        ``status`` is ``'certified'`` (nonzero at every sample),
        ``'degenerate'`` (zero at every sample) or ``'mixed'``; also
        ``min_abs`` and ``max_abs`` of the slope.
    """
    settings = resolve(settings)
    values = []
    for u, u1 in np.asarray(points, dtype=np.float64).reshape(-1, 2):
        phi_jet(ode, (0.0, u, u1), settings)
        values.append(abs(phi_over_u1_slope(ode, u, u1)))

    if not values:
        raise ValueError('no sample points given')

    values = np.asarray(values)
    nonzero = values > tol
    if np.all(nonzero):
        status = 'certified'
    elif not np.any(nonzero):
        status = 'degenerate'
    else:
        status = 'mixed'

    return {
        'status': status,
        'min_abs': float(values.min()),
        'max_abs': float(values.max()),
    }


CURVATURE_COLUMNS = ('u', 'u1', 'r1212', 'r1313', 'r2323', 'k_int')


def curvature_grid(ode, region, settings=None, jobs=1):
    """
    Sectional and intrinsic leaf curvatures on the nodes of a region.

    Parameters
    ----------
    ode : :class:`OdeRhs`
    region : :class:`~jetflowlib.util.Region`
    jobs : int
        Worker threads; the result does not depend on it.

    Returns
    -------
    grid : dict
        Arrays of shape ``(n_u, n_u1)`` keyed by
        :data:`CURVATURE_COLUMNS`. Nodes on or near ``u1 = 0`` or outside
        the domain of ``phi`` hold NaN.
    """
    settings = resolve(settings)
    pts = region.grid()

    def values(p):
        q = (0.0, p[0], p[1])
        try:
            curv = sectional_curvatures(ode, q, settings)
        except (SingularPoint, DomainError):
            return (np.nan,) * 4
        k_int = leaf_geometry(ode, q, settings).k_int
        return curv.as_tuple() + (k_int,)

    with WorkerMap(jobs) as map_function:
        data = np.array(map_function(values, [tuple(p) for p in pts]))

    shape = (region.n_u, region.n_u1)
    grid = {'u': pts[:, 0].reshape(shape), 'u1': pts[:, 1].reshape(shape)}
    for k, name in enumerate(CURVATURE_COLUMNS[2:]):
        grid[name] = data[:, k].reshape(shape)
    return grid


def curvature_rows(grid):
    """Rows of the valid nodes of :func:`curvature_grid`, ``u`` slowest."""
    table = np.column_stack([grid[c].ravel() for c in CURVATURE_COLUMNS])
    return table[np.all(np.isfinite(table), axis=1)]


__all__ = """
    JetPoint
    as_point
    OdeRhs
    phi_jet
    e1_phi
    FrameData
    frame_at
    metric_at
    metric_norm
    ConnForms
    connection_forms_at
    covariant_derivative_frame
    bracket_e1_e2
    CurvTriple
    sectional_curvatures
    LeafGeom
    leaf_geometry
    cartan_residuals
    phi_over_u1_slope
    geodesic_hypothesis
    CURVATURE_COLUMNS
    curvature_grid
    curvature_rows
""".split()
