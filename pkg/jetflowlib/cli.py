"""
Command-line front end.

    jetflow [-v] [-q] [-j N] [-o FILE] COMMAND [options]

Commands: ``analyze``, ``geodesic``, ``energy``, ``lagrangian``,
``curvature-map``, ``verify`` and ``list``. Exit status is 0 on
success, 1 when ``verify`` finds a failing check, 2 on usage errors and
3 on runtime errors, which are reported on stderr in one line.
"""

import argparse
import csv
import dataclasses
import io
import json
import logging
import math
import sys

import numpy as np

from jetflowlib import acceptance, dynamics, energy, geometry, lagrangian, \
    registry
from jetflowlib.config import load_settings
from jetflowlib.errors import JetflowError, UnknownEntry, UnknownParameter
from jetflowlib.expr import PHI_VARS, free_params, parse
from jetflowlib.geometry import JetPoint, OdeRhs
from jetflowlib.util import Region, fmt, keep_valid


logger = logging.getLogger('jetflow')

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _finite(obj):
    """Non-finite floats become None; JSON has no NaN or Infinity."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


class NumpyEncoder(json.JSONEncoder):
    """JSON encoder for numpy scalars and arrays and dataclasses."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        elif isinstance(obj, np.floating):
            return _finite(float(obj))
        elif isinstance(obj, np.bool_):
            return bool(obj)
        elif isinstance(obj, np.ndarray):
            return _finite(obj.tolist())
        elif dataclasses.is_dataclass(obj):
            return _finite(dataclasses.asdict(obj))
        return json.JSONEncoder.default(self, obj)


def write_json(stream, obj):
    stream.write(json.dumps(
        _finite(obj), cls=NumpyEncoder, indent=2, allow_nan=False))
    stream.write('\n')


def write_csv(stream, columns, rows):
    writer = csv.writer(stream, delimiter=',', lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(x) for x in row])


# Argument types ----------------------------------------------------------

def _key_value(text):
    key, sep, value = text.partition('=')
    if not sep or not key:
        raise argparse.ArgumentTypeError(
            'expected KEY=VALUE, got "{}"'.format(text))
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            'value of "{}" is not a number'.format(key)) from None


def _floats(n):
    def convert(text):
        try:
            values = tuple(float(v) for v in text.split(','))
        except ValueError:
            raise argparse.ArgumentTypeError(
                'expected {} comma-separated numbers'.format(n)) from None
        if len(values) != n:
            raise argparse.ArgumentTypeError(
                'expected {} comma-separated numbers, got {}'.format(
                    n, len(values)))
        return values
    return convert


def _counts(text):
    values = _floats(2)(text)
    if any(v < 1 or not float(v).is_integer() for v in values):
        raise argparse.ArgumentTypeError('grid sizes must be positive integers')
    return tuple(int(v) for v in values)


# Parser ------------------------------------------------------------------

def _add_ode_options(p):
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument(
        '--builtin', metavar='NAME',
        help='built-in equation ({})'.format(', '.join(registry.names())))
    source.add_argument(
        '--phi', metavar='EXPR', help='right-hand side phi(u, u1)')
    p.add_argument(
        '--param', type=_key_value, action='append', default=[],
        metavar='KEY=VALUE', help='parameter value (repeatable)')
    p.add_argument('--K', metavar='EXPR', help='K(u) of the kfamily entry')
    p.add_argument('--rho', metavar='EXPR',
                   help='density rho(u) of the gravity entry')


def _add_region_options(p):
    p.add_argument(
        '--region', type=_floats(4), metavar='UMIN,UMAX,U1MIN,U1MAX',
        help='sampling rectangle (default: the entry region)')
    p.add_argument(
        '--grid', type=_counts, default=(21, 21), metavar='NU,NU1',
        help='grid nodes along u and u1 (default: %(default)s)')


def _add_format_option(p, default='csv'):
    p.add_argument(
        '--format', choices=('csv', 'json'), default=default,
        help='output format (default: %(default)s)')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='jetflow',
        description='Riemannian geometry of autonomous second-order ODEs '
                    'u\'\' = phi(u, u\').')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='more log output on stderr (repeatable)')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='log errors only')
    parser.add_argument(
        '-j', '--jobs', type=int, default=1,
        help='worker threads for grid evaluations (default = %(default)d)')
    parser.add_argument('-o', '--output', metavar='FILE',
                        help='write to FILE instead of stdout')
    parser.add_argument('--eps-u1', type=float, metavar='EPS',
                        help='distance to the excluded plane u1 = 0')
    parser.add_argument('--rtol', type=float, help='integrator rtol')
    parser.add_argument('--atol', type=float, help='integrator atol')

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('analyze', help='geometry at one point (JSON)')
    _add_ode_options(p)
    p.add_argument('--point', type=_floats(3), required=True,
                   metavar='X,U,U1')

    p = sub.add_parser('geodesic', help='integrate a solution or geodesic')
    _add_ode_options(p)
    p.add_argument('--traj-init', type=_floats(3), required=True,
                   metavar='X,U,U1')
    p.add_argument('--x-end', type=float, metavar='X',
                   help='end of the solution interval')
    p.add_argument('--tangent', type=_floats(3), metavar='VX,VU,VU1',
                   help='integrate the geodesic with this initial velocity')
    p.add_argument('--t-end', type=float, metavar='T',
                   help='end of the geodesic parameter interval')
    p.add_argument('--method', default=dynamics.DEFAULT_METHOD,
                   choices=('RK45', 'DOP853', 'RK23'))
    p.add_argument('--n-samples', type=int)
    p.add_argument('--strict', action='store_true',
                   help='fail when u1 reaches 0 instead of stopping')
    _add_format_option(p)

    p = sub.add_parser('energy', help='energy foliation reports')
    _add_ode_options(p)
    p.add_argument('--energy-expr', metavar='EXPR',
                   help='candidate energy E(u, u1)')
    _add_region_options(p)
    p.add_argument('--leaf-target', type=float, metavar='U',
                   help='trace leaves from the grid nodes to u = U')
    p.add_argument('--traj-init', type=_floats(3), metavar='X,U,U1')
    p.add_argument('--x-end', type=float, metavar='X')
    p.add_argument('--point', type=_floats(3), metavar='X,U,U1',
                   help='point to label with --u-ref')
    p.add_argument('--u-ref', type=float, metavar='U',
                   help='section u = U labelling the leaves')
    _add_format_option(p, default='json')

    p = sub.add_parser('lagrangian', help='Lagrangian grids and checks')
    _add_ode_options(p)
    p.add_argument('--lagrangian-expr', metavar='EXPR',
                   help='closed-form L(u, u1)')
    p.add_argument('--energy-expr', metavar='EXPR',
                   help='build L from this energy by quadrature')
    p.add_argument('--quadrature', action='store_true',
                   help='build L from the entry energy by quadrature')
    p.add_argument('--u1-base', type=float, metavar='V',
                   help='lower limit of the quadrature')
    p.add_argument('--null', metavar='C:G',
                   help='add the null Lagrangian C*u1 + u1*G(u)')
    _add_region_options(p)
    p.add_argument('--traj-init', type=_floats(3), metavar='X,U,U1')
    p.add_argument('--x-end', type=float, metavar='X')
    _add_format_option(p)

    p = sub.add_parser('curvature-map', help='curvature grid')
    _add_ode_options(p)
    _add_region_options(p)
    _add_format_option(p)

    p = sub.add_parser('verify', help='acceptance checks of a built-in')
    p.add_argument('--builtin', metavar='NAME', required=True)
    p.add_argument('--param', type=_key_value, action='append', default=[],
                   metavar='KEY=VALUE')
    p.add_argument('--K', metavar='EXPR')
    p.add_argument('--rho', metavar='EXPR')
    p.add_argument('--n-points', type=int, default=50)
    p.add_argument('--seed', type=int)

    sub.add_parser('list', help='built-in entries (JSON)')

    return parser


# Helpers -----------------------------------------------------------------

class _UsageError(Exception):
    pass


def _params(args):
    params = {}
    for key, value in args.param:
        if key in params:
            raise _UsageError('parameter "{}" given twice'.format(key))
        params[key] = value
    return params


def _functions(args):
    return {
        k: v for k, v in (('K', args.K), ('rho', args.rho))
        if v is not None}


def _resolve_ode(args, settings):
    params = _params(args)
    if args.builtin is not None:
        try:
            return registry.instantiate(
                args.builtin, params, _functions(args), settings)
        except (UnknownEntry, UnknownParameter) as exc:
            raise _UsageError(str(exc)) from None

    if _functions(args):
        raise _UsageError('--K and --rho need --builtin')
    expr = parse(args.phi, PHI_VARS)
    used = set(free_params(expr))
    for key in ('energy_expr', 'lagrangian_expr'):
        text = getattr(args, key, None)
        if text is not None:
            used |= set(free_params(parse(text, PHI_VARS)))
    unknown = sorted(set(params) - used)
    if unknown:
        raise _UsageError(
            'parameter "{}" appears in no expression'.format(unknown[0]))
    return OdeRhs(expr, params, name=args.phi), None


def _bound_params(args, entry):
    if entry is None:
        return _params(args)
    return dict(entry.params, **entry.derived)


def _region(args, entry, n=None):
    n_u, n_u1 = n or args.grid
    if args.region is not None:
        r = args.region
        return Region((r[0], r[1]), (r[2], r[3]), n_u, n_u1)
    if entry is None:
        raise _UsageError('--region is required with --phi')
    return Region(entry.region.u, entry.region.u1, n_u, n_u1)


def _valid_points(ode, region, settings):
    def valid(u, u1):
        return abs(u1) > settings.eps_u1 and ode.in_domain(u, u1)
    return keep_valid(region.grid(), valid)


def _table(columns, rows):
    return {'columns': list(columns), 'rows': [list(r) for r in rows]}


# Commands ----------------------------------------------------------------

def cmd_analyze(args, settings, out):
    ode, entry = _resolve_ode(args, settings)
    p = JetPoint(*args.point)
    frame = geometry.frame_at(ode, p, settings)
    curv = geometry.sectional_curvatures(ode, p, settings)
    leaf = geometry.leaf_geometry(ode, p, settings)
    slope = geometry.phi_over_u1_slope(ode, p.u, p.u1)

    report = {
        'ode': ode.name,
        'point': [p.x, p.u, p.u1],
        'metric': geometry.metric_at(ode, p, settings),
        'frame': {
            'e1': frame.e1, 'e2': frame.e2, 'e3': frame.e3,
            'w1': frame.w1, 'w2': frame.w2, 'w3': frame.w3},
        'connection': geometry.connection_forms_at(ode, p, settings).theta,
        'bracket_e1_e2': geometry.bracket_e1_e2(ode, p, settings),
        'r1212': curv.r1212,
        'r1313': curv.r1313,
        'r2323': curv.r2323,
        'H': leaf.mean_curvature,
        'k_ext': leaf.k_ext,
        'k_int': leaf.k_int,
        'shape_operator': leaf.s,
        'gauss_defect': leaf.gauss_defect,
        'geodesic_hypothesis': {
            'slope': slope,
            'status': 'certified' if abs(slope) > 1e-12 else 'degenerate'},
    }
    if entry is not None:
        report['reference'] = entry.reference_curvatures(p.u, p.u1)
    write_json(out, report)
    return EXIT_OK


def cmd_geodesic(args, settings, out):
    ode, _ = _resolve_ode(args, settings)
    init = JetPoint(*args.traj_init)
    kw = dict(settings=settings, method=args.method, strict=args.strict,
              n_samples=args.n_samples)

    if args.tangent is not None:
        if args.t_end is None:
            raise _UsageError('--tangent needs --t-end')
        curve = dynamics.integrate_geodesic(
            ode, init, args.tangent, args.t_end, **kw)
    else:
        if args.x_end is None:
            raise _UsageError('--x-end is required')
        curve = dynamics.integrate_solution(ode, init, args.x_end, **kw)

    rows = dynamics.curve_to_rows(curve)
    if args.format == 'csv':
        write_csv(out, dynamics.CURVE_COLUMNS, rows)
    else:
        write_json(out, {
            'kind': curve.kind,
            'stats': curve.stats,
            'max_residual': curve.max_residual(),
            'curve': _table(dynamics.CURVE_COLUMNS, rows)})
    return EXIT_OK


def _energy_of(args, entry):
    if args.energy_expr is not None:
        return energy.EnergyModel.closed_form(
            args.energy_expr, _bound_params(args, entry))
    if entry is not None and entry.energy is not None:
        return entry.energy_model()
    return None


def cmd_energy(args, settings, out):
    ode, entry = _resolve_ode(args, settings)
    E = _energy_of(args, entry)
    report = {'ode': ode.name}

    if E is not None:
        region = _region(args, entry) if (
            args.region is not None or entry is not None) else None
        if region is not None:
            report['candidate'] = energy.check_energy_candidate(
                ode, E, _valid_points(ode, region, settings),
                settings=settings)
        else:
            logger.warning(
                'energy candidate not checked; give --region to check it')

    if args.format == 'csv' and args.leaf_target is None:
        raise _UsageError('CSV output lists leaves; give --leaf-target')

    traces = []
    if args.leaf_target is not None:
        starts = _valid_points(ode, _region(args, entry), settings)
        traced = energy.trace_leaves(
            ode, starts, args.leaf_target, jobs=args.jobs, skip_folds=True,
            settings=settings)
        traces = [(k, t) for k, t in enumerate(traced) if t is not None]
        report['folded_leaves'] = len(traced) - len(traces)
        if E is not None and traces:
            report['leaf_invariant_error'] = max(
                energy.leaf_invariant_error(E, t) for _, t in traces)

    if args.traj_init is not None:
        if args.x_end is None:
            raise _UsageError('--traj-init needs --x-end')
        if E is None:
            raise _UsageError('conservation needs an energy')
        segments = dynamics.integrate_segments(
            ode, JetPoint(*args.traj_init), args.x_end, settings=settings)
        report['conservation'] = energy.conservation_report(
            ode, E, segments, settings)

    if args.u_ref is not None:
        if args.point is None:
            raise _UsageError('--u-ref needs --point')
        report['label'] = energy.energy_label(
            ode, args.point, args.u_ref, settings)

    if args.format == 'csv':
        rows = []
        for k, trace in traces:
            rows.extend([k] + r for r in energy.leaf_rows(trace, E))
        write_csv(out, ('leaf',) + energy.LEAF_COLUMNS, rows)
    else:
        if traces:
            report['leaves'] = [
                {'leaf': k, 'u': t.u, 'u1': t.u1} for k, t in traces]
        write_json(out, report)
    return EXIT_OK


def _lagrangian_of(args, entry, settings):
    params = _bound_params(args, entry)
    if args.lagrangian_expr is not None:
        L = lagrangian.LagrangianModel.closed_form(
            args.lagrangian_expr, params, settings)
    elif args.energy_expr is not None or args.quadrature:
        E = _energy_of(args, entry)
        if E is None:
            raise _UsageError('no energy to build the Lagrangian from')
        base = args.u1_base
        if base is None:
            region = _region(args, entry)
            base = 0.5 * (region.u1[0] + region.u1[1])
        L = lagrangian.build_lagrangian(E, base, settings=settings)
    elif entry is not None and entry.lagrangian is not None:
        L = entry.lagrangian_model(settings)
    else:
        raise _UsageError(
            'give --lagrangian-expr, --energy-expr or --quadrature')

    if args.null is not None:
        c, sep, g = args.null.partition(':')
        if not sep:
            raise _UsageError('--null expects C:G')
        try:
            c = float(c)
        except ValueError:
            raise _UsageError('--null expects a number before ":"') from None
        L = lagrangian.add_null_lagrangian(L, c, g, params)
    return L


def cmd_lagrangian(args, settings, out):
    ode, entry = _resolve_ode(args, settings)
    L = _lagrangian_of(args, entry, settings)
    region = _region(args, entry)
    points = _valid_points(ode, region, settings)
    rows = lagrangian.lagrangian_rows(ode, L, points, settings)

    if args.format == 'csv':
        write_csv(out, lagrangian.LAGRANGIAN_COLUMNS, rows)
        return EXIT_OK

    report = {
        'ode': ode.name,
        'lagrangian': repr(L),
        'energy_function_foliation': lagrangian.energy_function_check(
            ode, L, points, settings=settings),
        'grid': _table(lagrangian.LAGRANGIAN_COLUMNS, rows),
    }
    if args.traj_init is not None:
        if args.x_end is None:
            raise _UsageError('--traj-init needs --x-end')
        curve = dynamics.integrate_solution(
            ode, JetPoint(*args.traj_init), args.x_end, settings=settings)
        report['el_residual'] = lagrangian.el_residual(
            ode, L, curve, settings=settings)
    write_json(out, report)
    return EXIT_OK


def cmd_curvature_map(args, settings, out):
    ode, entry = _resolve_ode(args, settings)
    grid = geometry.curvature_grid(
        ode, _region(args, entry), settings, jobs=args.jobs)
    rows = geometry.curvature_rows(grid)
    if args.format == 'csv':
        write_csv(out, geometry.CURVATURE_COLUMNS, rows)
    else:
        write_json(out, _table(geometry.CURVATURE_COLUMNS, rows))
    return EXIT_OK


def cmd_verify(args, settings, out):
    try:
        report = acceptance.run_acceptance(
            args.builtin, _params(args), _functions(args), settings,
            n_points=args.n_points, seed=args.seed, jobs=args.jobs)
    except (UnknownEntry, UnknownParameter) as exc:
        raise _UsageError(str(exc)) from None
    write_json(out, report.as_dict())
    for check in report.failures():
        logger.error('%s: %s = %s exceeds %s', args.builtin, check.name,
                     fmt(check.value), fmt(check.tol))
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_list(args, settings, out):
    out.write(registry.listing_json())
    out.write('\n')
    return EXIT_OK


COMMANDS = {
    'analyze': cmd_analyze,
    'geodesic': cmd_geodesic,
    'energy': cmd_energy,
    'lagrangian': cmd_lagrangian,
    'curvature-map': cmd_curvature_map,
    'verify': cmd_verify,
    'list': cmd_list,
}


def _setup_logging(args):
    if args.quiet:
        level = logging.ERROR
    else:
        level = max(logging.DEBUG, logging.WARNING - 10 * args.verbose)
    logging.basicConfig(
        stream=sys.stderr, level=level,
        format='%(name)s: %(levelname)s: %(message)s')


def run(argv=None):
    """
    Run one command.

    Returns
    -------
    status : int
        Exit status.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    _setup_logging(args)
    if args.jobs < 1:
        parser.print_usage(sys.stderr)
        sys.stderr.write('jetflow: error: --jobs must be positive\n')
        return EXIT_USAGE

    try:
        settings = load_settings(
            eps_u1=args.eps_u1, rtol=args.rtol, atol=args.atol)
        # -o is written only after the command succeeds
        out = sys.stdout if args.output is None else io.StringIO()
        status = COMMANDS[args.command](args, settings, out)
        if args.output is not None:
            with open(args.output, 'w', newline='') as stream:
                stream.write(out.getvalue())
        return status
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write('jetflow: error: {}\n'.format(exc))
        return EXIT_USAGE
    except (JetflowError, ValueError, OSError) as exc:
        sys.stderr.write('jetflow: {}: {}\n'.format(
            type(exc).__name__, exc))
        return EXIT_RUNTIME


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()


__all__ = """
    NumpyEncoder
    write_json
    write_csv
    build_parser
    COMMANDS
    run
    main
""".split()
