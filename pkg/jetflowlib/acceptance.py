"""
Acceptance checks of a built-in entry.

Each check reduces to one number compared with a tolerance. The
integrations use the 8th-order Dormand-Prince pair so that the
finite-difference residuals along solutions stay well inside their
tolerances.
"""

import dataclasses
import logging

import numpy as np

from jetflowlib import dynamics, energy, forms, geometry, lagrangian, \
    registry
from jetflowlib.config import resolve
from jetflowlib.errors import SingularCrossing
from jetflowlib.util import Region, WorkerMap


logger = logging.getLogger(__name__)


METHOD = 'DOP853'
N_SOLUTIONS = 10


@dataclasses.dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(self.value <= self.tol)

    def as_dict(self):
        value = float(self.value)
        return {
            'check': self.name,
            'value': value if np.isfinite(value) else None,
            'tol': float(self.tol), 'passed': self.passed}


@dataclasses.dataclass
class AcceptanceReport:
    entry: str
    params: dict
    functions: dict
    checks: list

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c for c in self.checks if not c.passed]

    def as_dict(self):
        return {
            'entry': self.entry,
            'params': dict(sorted(self.params.items())),
            'functions': dict(sorted(self.functions.items())),
            'passed': self.passed,
            'checks': [c.as_dict() for c in self.checks],
        }


def _relative(a, b):
    return abs(a - b) / max(1.0, abs(b))


class _Context:

    def __init__(self, ode, entry, settings, n_points, seed, jobs):
        self.ode = ode
        self.entry = entry
        self.settings = settings
        self.jobs = jobs
        self.seed = seed
        self.random = entry.region.random(n_points, seed)
        self.inner = entry.region.shrink(0.5).random(n_points, seed)
        self.grid = Region(entry.region.u, entry.region.u1, 20, 20).grid()
        self._curves = None

    @property
    def curves(self):
        if self._curves is None:
            self._curves = dynamics.integrate_batch(
                self.ode, self.entry.initial_points(N_SOLUTIONS),
                self.entry.x_span,
                jobs=self.jobs, settings=self.settings, method=METHOD)
        return self._curves

    def points_map(self, fun, points):
        with WorkerMap(self.jobs) as map_function:
            return map_function(fun, [tuple(p) for p in points])


def _metric(ctx):
    def defect(p):
        q = (0.0, p[0], p[1])
        g = geometry.metric_at(ctx.ode, q, ctx.settings)
        F = geometry.frame_at(ctx.ode, q, ctx.settings).frame
        scale = max(1.0, np.max(np.abs(g)))**2
        return max(
            abs(np.linalg.det(g) - 1.0),
            np.max(np.abs(forms.gram(F, g) - np.eye(3)))) / scale

    pts = ctx.entry.region.random(20 * len(ctx.random), ctx.seed)
    yield CheckResult('metric_orthonormal', max(ctx.points_map(defect, pts)),
                      1.0e-12)


def _solutions(ctx):
    yield CheckResult(
        'solution_geodesic_residual',
        max(c.max_residual() for c in ctx.curves), 1.0e-7)


def _curvatures(ctx):
    entry = ctx.entry
    if not entry.reference:
        return

    def error(p):
        q = (0.0, p[0], p[1])
        curv = geometry.sectional_curvatures(ctx.ode, q, ctx.settings)
        k_int = geometry.leaf_geometry(ctx.ode, q, ctx.settings).k_int
        values = dict(zip(('r1212', 'r1313', 'r2323'), curv.as_tuple()))
        values['k_int'] = k_int
        ref = entry.reference_curvatures(p[0], p[1])
        return max(_relative(values[k], ref[k]) for k in ref)

    yield CheckResult(
        'reference_curvatures', max(ctx.points_map(error, ctx.grid)),
        1.0e-10)

    if entry.name == 'kzero':
        r1212 = [
            abs(geometry.sectional_curvatures(
                ctx.ode, (0.0, u, u1), ctx.settings).r1212)
            for u, u1 in ctx.grid]
        yield CheckResult('flat_leaves', max(r1212), 1.0e-10)


def _structure(ctx):
    def residuals(p):
        rep = geometry.cartan_residuals(
            ctx.ode, (0.0, p[0], p[1]), settings=ctx.settings)
        return (max(rep['d_omega'], rep['torsion']), rep['curvature'])

    res = np.array(ctx.points_map(residuals, ctx.inner))
    yield CheckResult('cartan_first', float(res[:, 0].max()), 1.0e-6)
    yield CheckResult('cartan_second', float(res[:, 1].max()), 1.0e-5)


def _leaves(ctx):
    def defects(p):
        q = (0.0, p[0], p[1])
        leaf = geometry.leaf_geometry(ctx.ode, q, ctx.settings)
        return (
            abs(leaf.mean_curvature),
            abs(leaf.k_ext + 0.25),
            leaf.gauss_defect / max(1.0, abs(leaf.k_int)))

    res = np.array(ctx.points_map(defects, ctx.random))
    yield CheckResult('leaf_mean_curvature', float(res[:, 0].max()), 0.0)
    yield CheckResult('leaf_k_ext', float(res[:, 1].max()), 0.0)
    yield CheckResult('gauss_equation', float(res[:, 2].max()), 1.0e-12)


def _energies(ctx):
    entry = ctx.entry
    for label in ('energy', 'log_energy'):
        field = getattr(entry, label)
        if field is None:
            continue
        rep = energy.check_energy_candidate(
            ctx.ode, field, entry.energy_region, settings=ctx.settings)
        value = rep['scaled_residual'] if rep['min_abs_mu'] > 0 else np.inf
        yield CheckResult(label + '_pde', value, ctx.settings.energy_tol)


def _leaf_tracing(ctx):
    entry = ctx.entry
    if entry.energy is None:
        return
    region = entry.region
    u_mid = 0.5 * (region.u[0] + region.u[1])
    delta = 0.01 * (region.u[1] - region.u[0])
    inner = region.shrink(0.5)
    starts = [(u_mid, b) for b in np.linspace(inner.u1[0], inner.u1[1], 3)]

    E = entry.energy
    errors = []
    for start in starts:
        for target in (u_mid - delta, u_mid + delta):
            try:
                trace = energy.trace_leaf(
                    ctx.ode, start, target, settings=ctx.settings)
            except SingularCrossing as exc:
                logger.warning('leaf from %s folds: %s', start, exc)
                errors.append(np.inf)
                continue
            e0 = E.value(*start)
            errors.append(_relative(E.value(*trace.end), e0))
    yield CheckResult('leaf_tracing', max(errors), 1.0e-8)


def _conservation(ctx):
    entry = ctx.entry
    for label in ('energy', 'log_energy'):
        field = getattr(entry, label)
        if field is None:
            continue
        drift = max(
            energy.conservation_report(
                ctx.ode, field, curve, ctx.settings)['drift']
            for curve in ctx.curves)
        yield CheckResult(label + '_conservation', drift, 1.0e-8)

    if entry.first_integral is not None:
        drift = 0.0
        for curve in ctx.curves:
            values = np.array([entry.first_integral(p) for p in curve.points])
            drift = max(drift, float(np.max(np.abs(values - values[0]))))
        yield CheckResult('first_integral_conservation', drift, 1.0e-9)


def _lagrangians(ctx):
    entry = ctx.entry
    L = entry.lagrangian_model(ctx.settings)
    if L is not None:
        yield CheckResult(
            'lagrangian_el_residual',
            lagrangian.el_residual(ctx.ode, L, ctx.curves,
                                   settings=ctx.settings),
            1.0e-7)
        region = Region(entry.region.u, entry.region.u1, 11, 11)
        rep = lagrangian.energy_function_check(
            ctx.ode, L, region, settings=ctx.settings)
        yield CheckResult('energy_function_foliation', rep['max_defect'],
                          1.0e-6)

    if entry.energy is None:
        return
    u1_base = 0.5 * (entry.region.u1[0] + entry.region.u1[1])
    Lq = lagrangian.build_lagrangian(
        entry.energy, u1_base, settings=ctx.settings)
    identity = max(
        abs(lagrangian.energy_function(Lq, (0.0, u, u1))
            - entry.energy.value(u, u1))
        for u, u1 in ctx.random[:20])
    yield CheckResult('quadrature_lagrangian_identity', identity, 1.0e-10)

    samples = np.vstack([c.points[::20] for c in ctx.curves])
    yield CheckResult(
        'quadrature_lagrangian_el_residual',
        lagrangian.el_residual(ctx.ode, Lq, samples, settings=ctx.settings),
        1.0e-6)


def _hypothesis(ctx):
    if ctx.entry.name != 'kfamily':
        return
    rep = geometry.geodesic_hypothesis(ctx.ode, ctx.grid, settings=ctx.settings)
    yield CheckResult('degenerate_slope', rep['max_abs'], 1.0e-12)

    ode, curve_eval = registry.counterexample()
    xs = np.linspace(0.0, 1.0, 20)
    residual = max(
        np.max(np.abs(dynamics.geodesic_residual(
            ode, curve_eval, x, ctx.settings)))
        for x in xs)
    yield CheckResult('counterexample_geodesic', float(residual), 1.0e-12)

    def defect(x):
        f, df, d2f, _ = curve_eval(x)
        return abs(d2f - ode.value(f, df) + 1.0)

    yield CheckResult(
        'counterexample_not_solution', max(defect(x) for x in xs), 1.0e-12)


CHECKS = (
    _metric, _solutions, _curvatures, _structure, _leaves, _energies,
    _leaf_tracing, _conservation, _lagrangians, _hypothesis)


def run_acceptance(
        entry_name, params=None, functions=None, settings=None,
        n_points=50, seed=None, jobs=1):
    """
    Run every acceptance check that applies to a registry entry.

    Parameters
    ----------
    entry_name : str
    params, functions : mapping (optional)
        Passed to :func:`~jetflowlib.registry.instantiate`.
    n_points : int
        Number of random sample points per sampled check.
    seed : int (optional)
        Seed of the random points, ``settings.seed`` by default.
    jobs : int
        Worker threads for point-wise checks; results do not depend on
        it.

    Returns
    -------
    report : :class:`AcceptanceReport`
        Checks in a fixed order.
    """
    settings = resolve(settings)
    if seed is None:
        seed = settings.seed
    ode, entry = registry.instantiate(entry_name, params, functions, settings)
    ctx = _Context(ode, entry, settings, n_points, seed, jobs)

    checks = []
    for check in CHECKS:
        for result in check(ctx):
            level = logging.INFO if result.passed else logging.WARNING
            logger.log(level, '%s %s: %.3g (tol %.3g)',
                       entry_name, result.name, result.value, result.tol)
            checks.append(result)

    return AcceptanceReport(entry_name, entry.params, entry.functions, checks)


__all__ = """
    METHOD
    N_SOLUTIONS
    CheckResult
    AcceptanceReport
    CHECKS
    run_acceptance
""".split()
