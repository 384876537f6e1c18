import math

import numpy as np
from numpy.testing import assert_allclose
import pytest

from jetflowlib import scalar_ad as ad
from jetflowlib.errors import DivisionByZero, InvalidDomain, \
    UnsupportedFunction


def seeds(u, u1):
    return ad.lift_point(u, u1)


def fd_partials(fun, u, u1, h=1e-4):
    """Value and partials of a plain function by central differences."""
    f = fun
    d_u = (f(u + h, u1) - f(u - h, u1)) / (2 * h)
    d_v = (f(u, u1 + h) - f(u, u1 - h)) / (2 * h)
    d_uu = (f(u + h, u1) - 2 * f(u, u1) + f(u - h, u1)) / h**2
    d_vv = (f(u, u1 + h) - 2 * f(u, u1) + f(u, u1 - h)) / h**2
    d_uv = (f(u + h, u1 + h) - f(u + h, u1 - h)
            - f(u - h, u1 + h) + f(u - h, u1 - h)) / (4 * h * h)
    return (f(u, u1), d_u, d_v, d_uu, d_uv, d_vv)


def test_lift_variable():
    a = ad.lift_variable(2.0, ad.Variable.U)
    b = ad.lift_variable(3.0, 'u1')
    assert a.as_tuple() == (2.0, 1.0, 0.0, 0.0, 0.0, 0.0)
    assert b.as_tuple() == (3.0, 0.0, 1.0, 0.0, 0.0, 0.0)


def test_product_of_seeds():
    u, u1 = seeds(2.0, 3.0)
    assert (u * u1).as_tuple() == (6.0, 3.0, 2.0, 0.0, 1.0, 0.0)


def test_quotient():
    u, u1 = seeds(1.0, 2.0)
    q = u / u1
    assert_allclose(q.as_tuple(), (0.5, 0.5, -0.25, 0.0, -0.25, 0.25),
                    rtol=0, atol=1e-15)


def test_linear_rhs_partials():
    u, u1 = seeds(1.0, 2.0)
    phi = -0.2 * u1 - 1.0 * u
    assert_allclose(phi.as_tuple(), (-1.4, -1.0, -0.2, 0.0, 0.0, 0.0),
                    rtol=0, atol=1e-15)


def test_sqrt_of_kappa_rhs():
    u, u1 = seeds(0.0, 0.5)
    phi = ad.sqrt(1.0 - u1 * u1)
    s = math.sqrt(0.75)
    assert_allclose(phi.val, s, rtol=1e-15)
    assert phi.d_u == 0.0
    assert_allclose(phi.d_v, -0.5 / s, rtol=1e-14)
    assert_allclose(phi.d_vv, -1.0 / s**3, rtol=1e-13)


@pytest.mark.parametrize('name, fun, u, u1', [
    ('sqrt', lambda a, b: ad.sqrt(1 + a * a + b), 0.3, 0.7),
    ('exp', lambda a, b: ad.exp(a * b), 0.3, -0.7),
    ('ln', lambda a, b: ad.ln(2 + a * b), 0.4, 0.9),
    ('sin', lambda a, b: ad.sin(a - 2 * b), 0.3, 0.2),
    ('cos', lambda a, b: ad.cos(a * b), 1.1, 0.4),
    ('tan', lambda a, b: ad.tan(a + b), 0.2, 0.3),
    ('arctan', lambda a, b: ad.arctan(a / b), 0.5, 1.5),
    ('arcsin', lambda a, b: ad.arcsin(0.5 * a * b), 0.6, 0.8),
    ('arcsinh', lambda a, b: ad.arcsinh(a - b * b), 0.9, 0.4),
    ('pow', lambda a, b: (1 + a * a)**1.5 / b, 0.7, 1.3),
])
def test_chain_rule_against_differences(name, fun, u, u1):
    a = fun(*seeds(u, u1))

    def plain(x, y):
        return fun(ad.HyperDual2(x), ad.HyperDual2(y)).val

    assert_allclose(a.as_tuple(), fd_partials(plain, u, u1),
                    rtol=1e-6, atol=1e-6)


def test_mixed_partials_symmetric_by_construction():
    u, u1 = seeds(0.4, 1.2)
    a = ad.exp(u * u1 * u1) * ad.sin(u)
    b = ad.sin(u) * ad.exp(u1 * u1 * u)
    assert_allclose(a.as_tuple(), b.as_tuple(), rtol=1e-14)


def test_integer_power():
    u, _ = seeds(-2.0, 1.0)
    p = u**3
    assert p.as_tuple() == (-8.0, 12.0, 0.0, -12.0, 0.0, 0.0)
    assert (u**0).as_tuple() == (1.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_variable_exponent():
    u, u1 = seeds(2.0, 3.0)
    p = u**u1
    assert_allclose(p.val, 8.0)
    assert_allclose(p.d_u, 3.0 * 4.0)
    assert_allclose(p.d_v, 8.0 * math.log(2.0))


def test_reverse_operators():
    u, _ = seeds(2.0, 1.0)
    assert (1.0 - u).as_tuple() == (-1.0, -1.0, 0.0, 0.0, 0.0, 0.0)
    assert_allclose((1.0 / u).as_tuple()[:3], (0.5, -0.25, 0.0))
    assert (3 + u).val == 5.0
    assert (3 * u).d_u == 3.0


def test_hd_arith_and_hd_unary_dispatch():
    u, u1 = seeds(1.0, 2.0)
    assert ad.hd_arith(u, u1, ad.ArithOp.ADD).val == 3.0
    assert ad.hd_arith(u, u1, '/').val == 0.5
    assert ad.hd_arith(u1, 2, '^').val == 4.0
    assert ad.hd_unary(u, ad.UnaryFn.NEG).val == -1.0
    assert_allclose(ad.hd_unary(u, 'exp').val, math.e)


@pytest.mark.parametrize('fun', [
    lambda a: ad.sqrt(a - 1.0),
    lambda a: ad.sqrt(-a),
    lambda a: ad.ln(a - 1.0),
    lambda a: ad.arcsin(a),
    lambda a: (a - 2.0)**0.5,
])
def test_domain_errors(fun):
    u, _ = seeds(1.0, 1.0)
    with pytest.raises(InvalidDomain):
        fun(u)


def test_division_by_zero():
    u, u1 = seeds(0.0, 1.0)
    with pytest.raises(DivisionByZero):
        u1 / u
    with pytest.raises(DivisionByZero):
        u**-1
    with pytest.raises(ZeroDivisionError):
        ad.hd_arith(u1, u, ad.ArithOp.DIV)


def test_abs_is_unsupported():
    u, _ = seeds(1.0, 1.0)
    with pytest.raises(UnsupportedFunction):
        ad.hd_unary(u, ad.UnaryFn.ABS)


def test_numpy_scalars_coerce():
    u, _ = seeds(1.0, 1.0)
    assert (u + np.float64(2.0)).val == 3.0


@pytest.mark.parametrize('fn, lo, hi', [
    (ad.UnaryFn.NEG, -3.0, 3.0),
    (ad.UnaryFn.SQRT, 0.5, 3.0),
    (ad.UnaryFn.EXP, -2.0, 2.0),
    (ad.UnaryFn.LN, 0.5, 3.0),
    (ad.UnaryFn.SIN, -3.0, 3.0),
    (ad.UnaryFn.COS, -3.0, 3.0),
    (ad.UnaryFn.TAN, -1.0, 1.0),
    (ad.UnaryFn.ARCTAN, -3.0, 3.0),
    (ad.UnaryFn.ARCSIN, -0.8, 0.8),
    (ad.UnaryFn.ARCSINH, -3.0, 3.0),
])
def test_unary_slots_at_random_points(fn, lo, hi):
    # argument u + u1/2 makes all six slots nonzero
    def plain(p, q):
        return ad.hd_unary(ad.HyperDual2(p + 0.5 * q), fn).val

    rng = np.random.default_rng(11)
    for x in rng.uniform(lo, hi, 10):
        u1 = rng.uniform(0.5, 1.5)
        u = x - 0.5 * u1
        su, su1 = seeds(u, u1)
        got = ad.hd_unary(su + 0.5 * su1, fn).as_tuple()
        first = fd_partials(plain, u, u1, h=1e-5)
        second = fd_partials(plain, u, u1, h=1e-4)
        assert_allclose(got[0], plain(u, u1), rtol=1e-15)
        assert_allclose(got[1:3], first[1:3], rtol=1e-7, atol=1e-7)
        assert_allclose(got[3:], second[3:], rtol=1e-5, atol=1e-5)


def test_overflow_is_a_domain_error():
    u, u1 = seeds(800.0, 2.0)
    with pytest.raises(InvalidDomain):
        ad.exp(u)
    with pytest.raises(InvalidDomain):
        u**400
    with pytest.raises(InvalidDomain):
        ad.hd_arith(u1, u, ad.ArithOp.POW)
