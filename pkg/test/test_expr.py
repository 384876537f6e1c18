import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from jetflowlib import expr as ex
from jetflowlib import scalar_ad as ad
from jetflowlib.errors import ArityError, DivisionByZero, ExprSyntaxError, \
    InvalidDomain, MissingParam, UnknownIdentifier, UnsupportedFunction


def jet(text, u, u1, params=None):
    return ex.eval_hd(ex.parse(text), *ad.lift_point(u, u1), params=params)


def test_parse_kappa_rhs():
    e = ex.parse('sqrt(1 - kappa*u1^2)')
    assert isinstance(e, ex.Unary)
    assert e.fn is ad.UnaryFn.SQRT
    assert ex.free_params(e) == {'kappa'}
    assert ex.variables(e) == {'u1'}


def test_parse_rational_rhs():
    e = ex.parse('(4*u1^2 + u^2 + u)/(2*u + 1)')
    assert isinstance(e, ex.Binary)
    assert e.op is ad.ArithOp.DIV
    assert ex.free_params(e) == frozenset()
    assert ex.variables(e) == {'u', 'u1'}


def test_precedence():
    assert ex.eval_real(ex.parse('-u^2'), 3.0) == -9.0
    assert ex.eval_real(ex.parse('2^3^2'), 0.0) == 512.0
    assert ex.eval_real(ex.parse('2**-1'), 0.0) == 0.5
    assert ex.eval_real(ex.parse('1 - 2 - 3'), 0.0) == -4.0
    assert ex.eval_real(ex.parse('8/4/2'), 0.0) == 1.0
    assert ex.eval_real(ex.parse('+u * 2'), 1.5) == 3.0


def test_constants():
    assert_allclose(ex.eval_real(ex.parse('2*pi'), 0.0), 2 * math.pi)
    assert_allclose(ex.eval_real(ex.parse('ln(e)'), 0.0), 1.0)
    assert_allclose(ex.eval_real(ex.parse('1.5e-3 + .5'), 0.0), 0.5015)


def test_damped_rhs_jet():
    j = jet('-alpha*u1 - lambda*u', 1.0, 2.0, {'alpha': 0.2, 'lambda': 1.0})
    assert_allclose(j.as_tuple(), (-1.4, -1.0, -0.2, 0.0, 0.0, 0.0),
                    rtol=0, atol=1e-15)


def test_kzero_rhs_jet():
    # phi = (4 u1^2 + u^2 + u)/(8 u + 4), D = 2 u + 1
    u, u1 = 0.3, 1.1
    D = 2 * u + 1
    j = jet('(4*u1^2 + u^2 + u)/(8*u + 4)', u, u1)
    assert_allclose(j.val, (4 * u1**2 + u * u + u) / (4 * D), rtol=1e-14)
    assert_allclose(j.d_u, -2 * u1**2 / D**2 + (2 * u * u + 2 * u + 1)
                    / (4 * D**2), rtol=1e-13)
    assert_allclose(j.d_v, 2 * u1 / D, rtol=1e-14)
    assert_allclose(j.d_uv, -4 * u1 / D**2, rtol=1e-13)
    assert_allclose(j.d_vv, 2 / D, rtol=1e-14)


def test_round_trip_through_printer():
    for text in ('sqrt(1 - kappa*u1^2)', '-u^2 + arctan(u/u1)',
                 '2^3^2 - ln(1 + u1*u1)/(u + 3)', 'arcsinh(-u) * exp(-u1)'):
        e = ex.parse(text)
        assert ex.parse(ex.to_text(e)) == e


def test_eval_real_matches_eval_hd():
    text = 'exp(-u1)*sin(u) + arcsin(u*u1/4) - tan(u)/u1'
    e = ex.parse(text)
    assert_allclose(ex.eval_real(e, 0.7, 1.3), jet(text, 0.7, 1.3).val,
                    rtol=1e-15)


def test_syntax_errors_carry_position():
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse('u + * u1')
    assert info.value.position == 4

    with pytest.raises(ExprSyntaxError) as info:
        ex.parse('(u + 1')
    assert info.value.position == 6

    with pytest.raises(ExprSyntaxError):
        ex.parse('u $ 1')

    with pytest.raises(ExprSyntaxError):
        ex.parse('   ')

    with pytest.raises(SyntaxError):
        ex.parse('u u1')


def test_unknown_identifiers():
    with pytest.raises(UnknownIdentifier) as info:
        ex.parse('u2 + u')
    assert info.value.name == 'u2'

    with pytest.raises(UnknownIdentifier):
        ex.parse('u1 + u', allowed_vars=ex.U_VARS)

    with pytest.raises(UnknownIdentifier):
        ex.parse('foo(u)')

    with pytest.raises(UnknownIdentifier):
        ex.parse('a*u + b', params={'a'})


def test_arity_and_unsupported():
    with pytest.raises(ArityError):
        ex.parse('sqrt()')
    with pytest.raises(ArityError):
        ex.parse('sqrt(u, u1)')
    with pytest.raises(UnsupportedFunction) as info:
        ex.parse('abs(u)')
    assert info.value.name == 'abs'
    with pytest.raises(ExprSyntaxError):
        ex.parse('sqrt + u')


def test_domain_errors_point_at_the_node():
    with pytest.raises(DivisionByZero) as info:
        ex.eval_real(ex.parse('1/(u - 1)'), 1.0)
    assert info.value.position == 1

    with pytest.raises(InvalidDomain) as info:
        ex.eval_real(ex.parse('u + sqrt(u1 - 2)'), 0.0, 1.0)
    assert info.value.position == 4

    with pytest.raises(InvalidDomain) as info:
        jet('1 + ln(u*u1)', 0.0, 1.0)
    assert info.value.position == 4


def test_missing_param():
    e = ex.parse('kappa*u1')
    with pytest.raises(MissingParam) as info:
        ex.eval_real(e, 0.0, 1.0)
    assert info.value.name == 'kappa'
    with pytest.raises(MissingParam):
        ex.ExprField('kappa*u1')


def test_expr_field():
    f = ex.ExprField('kappa*u1^2 + u', {'kappa': 2.0})
    assert f.value(1.0, 3.0) == 19.0
    assert f(1.0, 3.0) == 19.0
    j = f.jet(1.0, 3.0)
    assert j.as_tuple() == (19.0, 1.0, 12.0, 0.0, 0.0, 4.0)
    assert 'kappa' in repr(f)


def test_u_only_field():
    f = ex.ExprField('1 + u^2', allowed_vars=ex.U_VARS)
    assert f.value(2.0, 0.0) == 5.0
    assert f.jet(2.0, 7.0).d_v == 0.0


def test_combined_field():
    a = ex.ExprField('u*u1')
    b = ex.ExprField('u1')
    c = ex.CombinedField(lambda u, u1, x, y: x + 2.0 * y, a, b, name='sum')
    assert c.value(2.0, 3.0) == 12.0
    assert c.jet(2.0, 3.0).d_v == 4.0
    assert repr(c) == 'CombinedField(sum)'


def test_as_field():
    f = ex.ExprField('u')
    assert ex.as_field(f) is f
    g = ex.as_field('a*u1', {'a': 3.0})
    assert g.value(0.0, 2.0) == 6.0


_FORMS = (
    '({} + {})', '({} - {})', '({} * {})', '({}) / (2 + ({})^2)',
    '-({})', '({})^2', '({})^3', 'sin({})', 'cos({})', 'arctan({})',
    'arcsinh({})', 'exp(arctan({}))', 'sqrt(1 + ({})^2)', 'ln(2 + sin({}))',
)


def random_text(rng, depth=3):
    """Random expression in u, u1 and beta, smooth on the whole plane."""
    if depth == 0 or rng.random() < 0.25:
        leaf = rng.integers(4)
        if leaf == 3:
            return '{:.3f}'.format(rng.uniform(0.5, 2.0))
        return ('u', 'u1', 'beta')[leaf]
    form = _FORMS[rng.integers(len(_FORMS))]
    args = [random_text(rng, depth - 1) for _ in range(form.count('{}'))]
    return form.format(*args)


def fd_jet(e, u, u1, params):
    def f(p, q):
        return ex.eval_real(e, p, q, params)

    h1, h2 = 1e-5, 1e-4
    return (
        f(u, u1),
        (f(u + h1, u1) - f(u - h1, u1)) / (2 * h1),
        (f(u, u1 + h1) - f(u, u1 - h1)) / (2 * h1),
        (f(u + h2, u1) - 2 * f(u, u1) + f(u - h2, u1)) / h2**2,
        (f(u + h2, u1 + h2) - f(u + h2, u1 - h2)
         - f(u - h2, u1 + h2) + f(u - h2, u1 - h2)) / (4 * h2 * h2),
        (f(u, u1 + h2) - 2 * f(u, u1) + f(u, u1 - h2)) / h2**2,
    )


def test_random_expressions_against_differences():
    rng = np.random.default_rng(2024)
    params = {'beta': 0.7}
    for _ in range(100):
        text = random_text(rng)
        e = ex.parse(text)
        u, u1 = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 1.5)
        got = np.array(jet(text, u, u1, params).as_tuple())
        want = np.array(fd_jet(e, u, u1, params))
        scale = max(1.0, np.max(np.abs(got)))
        assert np.max(np.abs(got - want)) <= 1e-5 * scale, text


def test_overflow_points_at_the_node():
    with pytest.raises(InvalidDomain) as info:
        jet('1 + exp(u1)', 0.0, 800.0)
    assert info.value.position == 4
    with pytest.raises(InvalidDomain):
        ex.eval_real(ex.parse('u1^400'), 0.0, 800.0)
