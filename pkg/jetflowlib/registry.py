"""
Built-in example equations with closed-form reference data.

==========  =====================================  ======================
name        right-hand side                        closed forms
==========  =====================================  ======================
kappa       ``sqrt(1 - kappa u1^2)``               E, L, curvatures
kzero       ``(4 u1^2 + u^2 + u)/(8 u + 4)``       E, L, curvatures
damped      ``-alpha u1 - lambda u``               E, log E, L, curvatures
gravity     ``-Phi_u(u)``, ``Phi_uu = 4 pi G rho``  E, L, curvatures
kfamily     ``K(u) u1``                            E, first integral
==========  =====================================  ======================

"gravity" works with a uniform density ``rho0`` or, when a density
expression ``rho(u)`` is given, with a potential obtained by
quadrature. "kfamily" takes the expression ``K(u)``.
"""

import dataclasses
import functools
import json
import math

import numpy as np

from jetflowlib.config import resolve
from jetflowlib.dynamics import prolongation
from jetflowlib.energy import EnergyModel
from jetflowlib.errors import ConstraintViolation, UnknownEntry, \
    UnknownParameter
from jetflowlib.expr import U_VARS, CombinedField, ExprField, ScalarField, \
    as_field
from jetflowlib.geometry import JetPoint, OdeRhs, as_point
from jetflowlib.lagrangian import LagrangianModel, quadrature
from jetflowlib.util import Region


CURVATURE_NAMES = ('r1212', 'r1313', 'r2323', 'k_int')


@dataclasses.dataclass(frozen=True)
class Parameter:
    name: str
    default: float
    doc: str = ''


@dataclasses.dataclass(frozen=True)
class FunctionSlot:
    """An expression argument over ``u`` (``K`` or ``rho``)."""
    name: str
    default: str = None
    doc: str = ''


@dataclasses.dataclass(frozen=True)
class BuiltinEntry:
    """
    An instantiated example equation.

    Attributes
    ----------
    name : str
    params : dict
        Parameter values, defaults filled in.
    functions : dict
        Expression arguments as text.
    phi : :class:`~jetflowlib.expr.ScalarField`
    domain : callable or None
        Predicate ``(u, u1) -> bool`` of the open set where ``phi`` is
        smooth.
    energy, log_energy, lagrangian : ScalarField or None
        Closed forms. ``log_energy`` is a second energy of the damped
        oscillator whose Lagrangian is ``lagrangian``.
    reference : dict
        Callables ``(u, u1) -> float`` for the names in
        :data:`CURVATURE_NAMES` that have a closed form.
    region, energy_region : :class:`~jetflowlib.util.Region`
        Documented sampling regions.
    derived : dict
        Derived constants, e.g. ``omega`` of the damped oscillator.
    x_span : float
        Integration length for solutions started at
        :meth:`initial_points`; they stay inside the domain and away
        from ``u1 = 0`` over it.
    notes : str
    """
    name: str
    params: dict
    functions: dict
    phi: ScalarField
    domain: object
    region: Region
    energy_region: Region
    energy: ScalarField = None
    log_energy: ScalarField = None
    lagrangian: ScalarField = None
    reference: dict = dataclasses.field(default_factory=dict)
    first_integral: object = None
    derived: dict = dataclasses.field(default_factory=dict)
    texts: dict = dataclasses.field(default_factory=dict)
    x_span: float = 0.25
    notes: str = ''

    def ode(self):
        return OdeRhs(self.phi, domain=self.domain, name=self.label())

    def label(self):
        bound = ['{}={:g}'.format(k, v) for k, v in sorted(self.params.items())]
        bound += ['{}={}'.format(k, v) for k, v in sorted(self.functions.items())]
        return '{}({})'.format(self.name, ', '.join(bound))

    def reference_curvatures(self, u, u1):
        """Closed-form curvature values at ``(u, u1)``."""
        return {name: float(fn(u, u1)) for name, fn in self.reference.items()}

    def energy_model(self):
        return None if self.energy is None else \
            EnergyModel('closed_form', field=self.energy)

    def lagrangian_model(self, settings=None):
        return None if self.lagrangian is None else \
            LagrangianModel('closed_form', self.lagrangian, settings=settings)

    def closed_forms(self):
        names = [
            name for name in ('energy', 'log_energy', 'lagrangian')
            if getattr(self, name) is not None]
        if self.first_integral is not None:
            names.append('first_integral')
        names.extend(
            name for name in CURVATURE_NAMES if name in self.reference)
        return names

    def initial_points(self, n=5):
        """
        ``n`` initial conditions at ``x = 0`` on the diagonal of the
        central half of :attr:`region`.
        """
        inner = self.region.shrink(0.5)
        us = np.linspace(inner.u[0], inner.u[1], n)
        u1s = np.linspace(inner.u1[0], inner.u1[1], n)
        return [JetPoint(0.0, float(a), float(b)) for a, b in zip(us, u1s)]


@dataclasses.dataclass(frozen=True)
class _Template:
    name: str
    description: str
    parameters: tuple
    functions: tuple
    constraints: tuple
    build: object


class PrimitiveField(ScalarField):
    """
    Iterated primitive ``F(u) = scale * int_0^u (u - s)^(n-1)/(n-1)! g(s) ds``
    of a function ``g`` of ``u``, for ``n`` = 1 or 2.

    Values come from adaptive quadrature and derivatives from ``g``;
    the field does not depend on ``u1``.
    """

    def __init__(self, g, scale=1.0, order=1, settings=None):
        if order not in (1, 2):
            raise ValueError('order must be 1 or 2')
        self.g = g
        self.scale = float(scale)
        self.order = order
        self.settings = resolve(settings)
        self._values = functools.lru_cache(maxsize=4096)(self._compute)

    def _compute(self, u):
        g, c = self.g, self.scale
        gj = g.jet(u, 0.0)
        first = c * quadrature(lambda s: g.value(s, 0.0), 0.0, u, self.settings)
        if self.order == 1:
            return (first, c * gj.val, c * gj.d_u)
        second = c * quadrature(
            lambda s: (u - s) * g.value(s, 0.0), 0.0, u, self.settings)
        return (second, first, c * gj.val)

    def eval_hd(self, u, u1):
        return u.chain(*self._values(float(u.val)))

    def __repr__(self):
        return 'PrimitiveField(order={}, scale={!r}, {!r})'.format(
            self.order, self.scale, self.g)


def gravity_potential(rho, G, u, settings=None):
    """
    Gravitational potential of a density along a line.

    Parameters
    ----------
    rho : expression text, AST or field over ``u``
    G : float
        Gravitational constant.
    u : float

    Returns
    -------
    Phi, Phi_u : float
        Solution of ``Phi_uu = 4 pi G rho`` normalized by
        ``Phi(0) = Phi_u(0) = 0``.
    """
    rho = as_field(rho, allowed_vars=U_VARS)
    scale = 4.0 * math.pi * G
    Phi_u = scale * quadrature(lambda s: rho.value(s, 0.0), 0.0, u, settings)
    Phi = scale * quadrature(
        lambda s: (u - s) * rho.value(s, 0.0), 0.0, u, settings)
    return Phi, Phi_u


def kfamily_first_integral(K, p, settings=None):
    """First integral ``u1 - int_0^u K(s) ds`` of ``u2 = K(u) u1``."""
    K = as_field(K, allowed_vars=U_VARS)
    p = as_point(p)
    return p.u1 - quadrature(lambda s: K.value(s, 0.0), 0.0, p.u, settings)


def _curvature_texts(f, f_u, f_v, f_uv, f_vv):
    """
    Sectional curvatures and intrinsic leaf curvature written in terms
    of hand-derived partials of ``phi``.
    """
    f, f_u, f_v, f_uv, f_vv = (
        '({})'.format(t) for t in (f, f_u, f_v, f_uv, f_vv))
    e1 = '(u1*{} + {}*{})'.format(f_u, f, f_v)
    return {
        'r1212': '1/4 - {}/u1'.format(e1),
        'r1313': (
            '-3/4 + {fu} - {fv}^2 - {f}*{fvv} - u1*{fuv} + 3*{f}*{fv}/u1 '
            '- 2*{f}^2/u1^2').format(f=f, fu=f_u, fv=f_v, fuv=f_uv, fvv=f_vv),
        'r2323': (
            '1/4 - ({f}*{fv} + {fuv})/u1 - ({f}*{fvv} - {f}^2 - {fu} '
            '+ {fv}^2)/u1^2 + 4*{f}*{fv}/u1^3 - 3*{f}^2/u1^4').format(
                f=f, fu=f_u, fv=f_v, fuv=f_uv, fvv=f_vv),
        'k_int': '-{}/u1'.format(e1),
    }


def _harmonic_span(omega2, region):
    """Span before solutions of u'' = -omega2*u started on the diagonal of
    the central half of ``region`` first reach u1 = 0."""
    if not omega2 > 0.0:
        return 0.5
    omega = math.sqrt(omega2)
    inner = region.shrink(0.5)
    t = math.atan2(inner.u1[1], omega * inner.u[1]) / omega
    return min(1.0, 0.6 * t)


def _fields(texts, params):
    return {k: ExprField(v, params) for k, v in texts.items()}


def _callables(texts, params):
    return {k: f.value for k, f in _fields(texts, params).items()}


def _build_kappa(params, functions, settings):
    kappa = params['kappa']
    phi = 'sqrt(1 - kappa*u1^2)'
    energy = 'u + sqrt(1 - kappa*u1^2)/kappa'
    if kappa > 0:
        lagrangian = (
            '-u - (sqrt(1 - kappa*u1^2) + sqrt(kappa)*u1*'
            'arcsin(sqrt(kappa)*u1))/kappa')
        u1_max = 0.9 / math.sqrt(kappa)
        x_span = 0.4 / math.sqrt(kappa)
    else:
        lagrangian = (
            '-u - sqrt(1 - kappa*u1^2)/kappa + sqrt(-kappa)*u1*'
            'arcsinh(sqrt(-kappa)*u1)/kappa')
        u1_max = 2.0
        x_span = 0.5
    region = Region((-1.0, 1.0), (0.1, u1_max))
    references = {
        'r1212': '1/4 + kappa',
        'r1313': '-3/4 - 2/u1^2',
        'r2323': '1/4 + 1/u1^2 - 3/u1^4',
        'k_int': 'kappa',
    }
    return BuiltinEntry(
        name='kappa', params=params, functions=functions,
        phi=ExprField(phi, params),
        domain=lambda u, u1: 1.0 - kappa * u1 * u1 > 0.0,
        region=region, energy_region=region,
        energy=ExprField(energy, params),
        lagrangian=ExprField(lagrangian, params),
        reference=_callables(references, params),
        texts=dict(phi=phi, energy=energy, lagrangian=lagrangian,
                   **references),
        x_span=x_span,
        notes='smooth where kappa*u1^2 < 1; constant intrinsic leaf '
              'curvature kappa')


_KZERO_PHI = '(4*u1^2 + u^2 + u)/(8*u + 4)'


def _build_kzero(params, functions, settings):
    phi = _KZERO_PHI
    energy = 'u1^2/(2*u + 1) - (4*u^2 + 2*u + 1)/(32*u + 16)'
    lagrangian = 'u1^2/(2*u + 1) + (4*u^2 + 2*u + 1)/(32*u + 16)'
    references = _curvature_texts(
        phi,
        '-2*u1^2/(2*u + 1)^2 + (2*u^2 + 2*u + 1)/(4*(2*u + 1)^2)',
        '2*u1/(2*u + 1)',
        '-4*u1/(2*u + 1)^2',
        '2/(2*u + 1)')
    region = Region((0.0, 1.0), (0.5, 2.0))
    return BuiltinEntry(
        name='kzero', params=params, functions=functions,
        phi=ExprField(phi, params),
        domain=lambda u, u1: 2.0 * u + 1.0 != 0.0,
        region=region, energy_region=region,
        energy=ExprField(energy, params),
        lagrangian=ExprField(lagrangian, params),
        reference=_callables(references, params),
        texts=dict(phi=phi, energy=energy, lagrangian=lagrangian,
                   **references),
        x_span=0.5,
        notes='flat energy leaves (r1212 = 0); singular on u = -1/2')


def _build_damped(params, functions, settings):
    alpha, lam = params['alpha'], params['lambda']
    omega = 0.5 * math.sqrt(4.0 * lam - alpha * alpha)
    bound = dict(params, omega=omega)
    phi = '-alpha*u1 - lambda*u'
    angle = 'arctan((alpha*u1 + 2*lambda*u)/(2*omega*u1))'
    quadratic = '(alpha*u*u1 + u1^2 + lambda*u^2)'
    energy = 'exp(alpha/omega*{})/2*{}'.format(angle, quadratic)
    log_energy = 'alpha/omega*{} + ln{}'.format(angle, quadratic)
    lagrangian = (
        '2*u1/(omega*u)*arctan((alpha*u + 2*u1)/(2*u*omega)) '
        '- alpha/omega*{} - ln{}'.format(angle, quadratic))
    references = _curvature_texts(phi, '-lambda', '-alpha', '0', '0')
    references['k_int'] = 'lambda - alpha^2 - alpha*lambda*u/u1'
    return BuiltinEntry(
        name='damped', params=params, functions=functions,
        phi=ExprField(phi, params), domain=None,
        region=Region((0.2, 1.0), (0.2, 1.0)),
        energy_region=Region((0.1, 1.0), (0.1, 1.0)),
        energy=ExprField(energy, bound),
        log_energy=ExprField(log_energy, bound),
        lagrangian=ExprField(lagrangian, bound),
        reference=_callables(references, bound),
        derived={'omega': omega},
        x_span=0.6 * math.atan2(omega, 0.5 * alpha + lam) / omega,
        texts=dict(phi=phi, energy=energy, log_energy=log_energy,
                   lagrangian=lagrangian, **references),
        notes='underdamped branch only (alpha^2 < 4*lambda); the '
              'Lagrangian is singular on u = 0')


def _build_gravity(params, functions, settings):
    G, m = params['G'], params['m']
    rho_text = functions.get('rho')
    region = Region((-1.0, 1.0), (0.2, 1.5))

    if rho_text is None:
        phi = '-4*pi*G*rho0*u'
        energy = 'm*u1^2/2 + 2*pi*m*G*rho0*u^2'
        lagrangian = 'm*u1^2/2 - 2*pi*m*G*rho0*u^2'
        references = _curvature_texts(phi, '-4*pi*G*rho0', '0', '0', '0')
        references['k_int'] = '4*pi*G*rho0'
        return BuiltinEntry(
            name='gravity', params=params, functions=functions,
            phi=ExprField(phi, params), domain=None,
            region=region, energy_region=region,
            energy=ExprField(energy, params),
            lagrangian=ExprField(lagrangian, params),
            reference=_callables(references, params),
            texts=dict(phi=phi, energy=energy, lagrangian=lagrangian,
                       **references),
            x_span=_harmonic_span(
                4.0 * math.pi * G * params['rho0'], region),
            notes='uniform density rho0; h = m u1^2/2 + m Phi')

    rho = ExprField(rho_text, params, U_VARS)
    scale = 4.0 * math.pi * G
    potential = PrimitiveField(rho, scale, 2, settings)
    force = PrimitiveField(rho, scale, 1, settings)

    def k_int(u, u1):
        return scale * rho.value(u, 0.0)

    def r1313(u, u1):
        f = -force.value(u, u1)
        return -0.75 - k_int(u, u1) - 2.0 * f * f / (u1 * u1)

    def r2323(u, u1):
        f = -force.value(u, u1)
        return (0.25 + (f * f - k_int(u, u1)) / (u1 * u1)
                - 3.0 * f * f / u1**4)

    return BuiltinEntry(
        name='gravity', params=params, functions=functions,
        phi=CombinedField(lambda u, u1, F: -F, force, name='-Phi_u'),
        domain=None, region=region, energy_region=region,
        energy=CombinedField(
            lambda u, u1, P: m * (0.5 * u1 * u1 + P), potential,
            name='m*(u1^2/2 + Phi)'),
        lagrangian=CombinedField(
            lambda u, u1, P: m * (0.5 * u1 * u1 - P), potential,
            name='m*(u1^2/2 - Phi)'),
        reference={
            'r1212': lambda u, u1: 0.25 + k_int(u, u1),
            'r1313': r1313,
            'r2323': r2323,
            'k_int': k_int,
        },
        texts={'rho': rho_text, 'k_int': '4*pi*G*({})'.format(rho_text)},
        x_span=0.5,
        notes='density expression; Phi and Phi_u by quadrature from u = 0')


def _build_kfamily(params, functions, settings):
    K_text = functions.get('K', '1')
    K = ExprField(K_text, params, U_VARS)
    primitive = PrimitiveField(K, 1.0, 1, settings)

    def r1212(u, u1):
        k = K.jet(u, 0.0)
        return 0.25 - u1 * k.d_u - k.val * k.val

    def first_integral(p):
        return kfamily_first_integral(K, p, settings)

    region = Region((0.0, 1.0), (0.2, 1.5))
    return BuiltinEntry(
        name='kfamily', params=params, functions=functions,
        phi=CombinedField(lambda u, u1, k: k * u1, K, name='K(u)*u1'),
        domain=None, region=region, energy_region=region,
        energy=CombinedField(
            lambda u, u1, F: u1 - F, primitive, name='u1 - int K'),
        reference={
            'r1212': r1212,
            'r1313': lambda u, u1: -0.75,
            'r2323': lambda u, u1: 0.25,
            'k_int': lambda u, u1: r1212(u, u1) - 0.25,
        },
        first_integral=first_integral,
        texts={'K': K_text},
        x_span=0.6,
        notes='(phi/u1)_u1 = 0: prolongations of non-solutions can be '
              'geodesics')


def _underdamped(p):
    return p['alpha']**2 < 4.0 * p['lambda']


_TEMPLATES = {
    template.name: template for template in (
        _Template(
            'kappa', 'u2 = sqrt(1 - kappa*u1^2)',
            (Parameter('kappa', 1.0, 'nonzero'),),
            (),
            (('kappa != 0', lambda p: p['kappa'] != 0.0),),
            _build_kappa),
        _Template(
            'kzero', 'u2 = (4*u1^2 + u^2 + u)/(8*u + 4)',
            (), (), (),
            _build_kzero),
        _Template(
            'damped', 'u2 = -alpha*u1 - lambda*u',
            (Parameter('alpha', 0.2, 'damping coefficient'),
             Parameter('lambda', 1.0, 'stiffness')),
            (),
            (('alpha^2 < 4*lambda', _underdamped),),
            _build_damped),
        _Template(
            'gravity', 'u2 = -Phi_u(u), Phi_uu = 4*pi*G*rho(u)',
            (Parameter('G', 1.0, 'gravitational constant'),
             Parameter('rho0', 1.0 / (4.0 * math.pi),
                       'uniform density, unless rho is given'),
             Parameter('m', 1.0, 'mass')),
            (FunctionSlot('rho', None, 'density expression over u'),),
            (('G > 0', lambda p: p['G'] > 0.0),
             ('m > 0', lambda p: p['m'] > 0.0)),
            _build_gravity),
        _Template(
            'kfamily', 'u2 = K(u)*u1',
            (),
            (FunctionSlot('K', '1', 'expression over u'),),
            (),
            _build_kfamily),
    )
}


def names():
    return sorted(_TEMPLATES)


def instantiate(name, params=None, functions=None, settings=None):
    """
    Build the right-hand side and reference data of a built-in entry.

    Parameters
    ----------
    name : str
        One of :func:`names`.
    params : mapping (optional)
        Parameter values; missing ones take their defaults.
    functions : mapping (optional)
        Expression arguments over ``u`` (``rho`` for "gravity", ``K``
        for "kfamily").

    Returns
    -------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    entry : :class:`BuiltinEntry`

    Raises
    ------
    UnknownEntry, UnknownParameter, ConstraintViolation
    """
    try:
        template = _TEMPLATES[name]
    except KeyError:
        raise UnknownEntry(name) from None

    values = {p.name: float(p.default) for p in template.parameters}
    for key, value in (params or {}).items():
        if key not in values:
            raise UnknownParameter(key, name)
        values[key] = float(value)

    slots = {f.name: f.default for f in template.functions}
    texts = {}
    for key, text in (functions or {}).items():
        if key not in slots:
            raise UnknownParameter(key, name)
        texts[key] = text
    for key, default in slots.items():
        if key not in texts and default is not None:
            texts[key] = default

    for which, holds in template.constraints:
        if not holds(values):
            raise ConstraintViolation(which)

    entry = template.build(values, texts, resolve(settings))
    return entry.ode(), entry


def describe(name):
    """Listing record of an entry, reference data at the defaults."""
    _, entry = instantiate(name)
    template = _TEMPLATES[name]
    return {
        'name': template.name,
        'equation': template.description,
        'parameters': [
            {'name': p.name, 'default': p.default, 'doc': p.doc}
            for p in template.parameters],
        'functions': [
            {'name': f.name, 'default': f.default, 'doc': f.doc}
            for f in template.functions],
        'constraints': [which for which, _ in template.constraints],
        'closed_forms': entry.closed_forms(),
        'region': entry.region.as_dict(),
        'energy_region': entry.energy_region.as_dict(),
        'notes': entry.notes,
    }


def listing_json():
    """All entries as a JSON document with stable key order."""
    return json.dumps(
        {'entries': [describe(name) for name in names()]},
        indent=2, sort_keys=True)


def counterexample():
    """
    ``u2 = u1`` with ``f(x) = x + e^x``: the prolongation of ``f`` is a
    geodesic although ``f'' - phi = -1``.

    Returns
    -------
    ode : :class:`~jetflowlib.geometry.OdeRhs`
    curve_eval : callable
        ``x -> (f, f', f'', f''')``.
    """
    ode = OdeRhs('u1', name='u2 = u1')
    curve_eval = prolongation(
        lambda x: x + np.exp(x),
        lambda x: 1.0 + np.exp(x),
        np.exp,
        np.exp)
    return ode, curve_eval


__all__ = """
    CURVATURE_NAMES
    Parameter
    FunctionSlot
    BuiltinEntry
    PrimitiveField
    gravity_potential
    kfamily_first_integral
    names
    instantiate
    describe
    listing_json
    counterexample
""".split()
