"""
Second-order forward-mode automatic differentiation in two variables.

A :class:`HyperDual2` carries the value of a scalar expression in the
jet coordinates ``(u, u1)`` together with its exact first and second
partial derivatives. All elementary operations propagate the
second-order Taylor coefficients through the product, quotient and
chain rules, so a composed expression returns its analytic partials up
to floating-point rounding.
"""

import enum
import math

from jetflowlib.errors import DivisionByZero, InvalidDomain, \
    UnsupportedFunction


class Variable(enum.Enum):
    U = 'u'
    U1 = 'u1'


class ArithOp(enum.Enum):
    ADD = '+'
    SUB = '-'
    MUL = '*'
    DIV = '/'
    POW = '^'


class UnaryFn(enum.Enum):
    NEG = 'neg'
    SQRT = 'sqrt'
    EXP = 'exp'
    LN = 'ln'
    SIN = 'sin'
    COS = 'cos'
    TAN = 'tan'
    ARCTAN = 'arctan'
    ARCSIN = 'arcsin'
    ARCSINH = 'arcsinh'
    ABS = 'abs'


class HyperDual2:
    """
    Value and partial derivatives up to second order in ``(u, u1)``.

    Parameters
    ----------
    val : float
        Value.
    d_u, d_v : float
        First partials with respect to ``u`` and ``u1``.
    d_uu, d_uv, d_vv : float
        Second partials. The mixed partial is stored once, so symmetry
        holds by construction.
    """

    __slots__ = ('val', 'd_u', 'd_v', 'd_uu', 'd_uv', 'd_vv')

    def __init__(self, val, d_u=0.0, d_v=0.0, d_uu=0.0, d_uv=0.0, d_vv=0.0):
        self.val = float(val)
        self.d_u = float(d_u)
        self.d_v = float(d_v)
        self.d_uu = float(d_uu)
        self.d_uv = float(d_uv)
        self.d_vv = float(d_vv)

    @classmethod
    def constant(cls, value):
        return cls(value)

    def as_tuple(self):
        return (self.val, self.d_u, self.d_v, self.d_uu, self.d_uv, self.d_vv)

    def is_constant(self):
        return not any(self.as_tuple()[1:])

    def __repr__(self):
        return (
            'HyperDual2(val={!r}, d_u={!r}, d_v={!r}, d_uu={!r}, d_uv={!r}, '
            'd_vv={!r})'.format(*self.as_tuple()))

    def __eq__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self.as_tuple() == other.as_tuple()

    __hash__ = None

    def chain(self, f0, f1, f2):
        """
        Compose with a scalar function given its value ``f0`` and first
        and second derivatives ``f1``, ``f2`` at ``self.val``.
        """
        return HyperDual2(
            f0,
            f1 * self.d_u,
            f1 * self.d_v,
            f2 * self.d_u * self.d_u + f1 * self.d_uu,
            f2 * self.d_u * self.d_v + f1 * self.d_uv,
            f2 * self.d_v * self.d_v + f1 * self.d_vv)

    def __neg__(self):
        return HyperDual2(*(-x for x in self.as_tuple()))

    def __pos__(self):
        return self

    def __add__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return HyperDual2(*(a + b for a, b in zip(
            self.as_tuple(), other.as_tuple())))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return HyperDual2(*(a - b for a, b in zip(
            self.as_tuple(), other.as_tuple())))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        b = _coerce(other)
        if b is None:
            return NotImplemented
        a = self
        return HyperDual2(
            a.val * b.val,
            a.d_u * b.val + a.val * b.d_u,
            a.d_v * b.val + a.val * b.d_v,
            a.d_uu * b.val + 2.0 * a.d_u * b.d_u + a.val * b.d_uu,
            a.d_uv * b.val + a.d_u * b.d_v + a.d_v * b.d_u + a.val * b.d_uv,
            a.d_vv * b.val + 2.0 * a.d_v * b.d_v + a.val * b.d_vv)

    __rmul__ = __mul__

    def reciprocal(self):
        if self.val == 0.0:
            raise DivisionByZero('division by zero')
        r = 1.0 / self.val
        return self.chain(r, -r * r, 2.0 * r * r * r)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return other * self.reciprocal()

    def __pow__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _power(self, other)

    def __rpow__(self, other):
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return _power(other, self)


def _coerce(x):
    if isinstance(x, HyperDual2):
        return x
    if isinstance(x, (int, float)):
        return HyperDual2(x)
    return None


def _power(a, b):
    try:
        return _power_unchecked(a, b)
    except OverflowError:
        raise InvalidDomain('power overflows the float range') from None


def _power_unchecked(a, b):
    if not b.is_constant():
        if not a.val > 0:
            raise InvalidDomain(
                'power with variable exponent needs a positive base')
        return exp(b * ln(a))

    n = b.val
    if float(n).is_integer():
        n = int(n)
        if n == 0:
            return HyperDual2(1.0)
        if a.val == 0.0 and n < 0:
            raise DivisionByZero('zero raised to a negative power')
        f0 = a.val**n
        f1 = n * a.val**(n - 1) if n != 1 else 1.0
        f2 = n * (n - 1) * a.val**(n - 2) if n not in (0, 1) else 0.0
        return a.chain(f0, f1, f2)

    if not a.val > 0:
        raise InvalidDomain('fractional power of a non-positive base')
    return a.chain(a.val**n, n * a.val**(n - 1), n * (n - 1) * a.val**(n - 2))


def lift_variable(value, which):
    """
    Seed an independent variable.

    Parameters
    ----------
    value : float
        Coordinate value.
    which : :class:`Variable`
        ``Variable.U`` or ``Variable.U1``.

    Returns
    -------
    seed : :class:`HyperDual2`
        ``val = value`` with unit first partial in the matching slot.
    """
    which = Variable(which)
    if which is Variable.U:
        return HyperDual2(value, d_u=1.0)
    return HyperDual2(value, d_v=1.0)


def lift_point(u, u1):
    return (lift_variable(u, Variable.U), lift_variable(u1, Variable.U1))


def sqrt(a):
    if not a.val > 0:
        raise InvalidDomain('sqrt of a non-positive number')
    s = math.sqrt(a.val)
    return a.chain(s, 0.5 / s, -0.25 / (s * a.val))


def exp(a):
    try:
        e = math.exp(a.val)
    except OverflowError:
        raise InvalidDomain('exp overflows the float range') from None
    return a.chain(e, e, e)


def ln(a):
    if not a.val > 0:
        raise InvalidDomain('ln of a non-positive number')
    r = 1.0 / a.val
    return a.chain(math.log(a.val), r, -r * r)


def sin(a):
    s, c = math.sin(a.val), math.cos(a.val)
    return a.chain(s, c, -s)


def cos(a):
    s, c = math.sin(a.val), math.cos(a.val)
    return a.chain(c, -s, -c)


def tan(a):
    c = math.cos(a.val)
    if c == 0.0:
        raise InvalidDomain('tan at a pole')
    t = math.tan(a.val)
    sec2 = 1.0 + t * t
    return a.chain(t, sec2, 2.0 * sec2 * t)


def arctan(a):
    q = 1.0 / (1.0 + a.val * a.val)
    return a.chain(math.atan(a.val), q, -2.0 * a.val * q * q)


def arcsin(a):
    if not abs(a.val) < 1.0:
        raise InvalidDomain('arcsin outside (-1, 1)')
    w = 1.0 - a.val * a.val
    r = 1.0 / math.sqrt(w)
    return a.chain(math.asin(a.val), r, a.val * r / w)


def arcsinh(a):
    w = 1.0 + a.val * a.val
    r = 1.0 / math.sqrt(w)
    return a.chain(math.asinh(a.val), r, -a.val * r / w)


_UNARY = {
    UnaryFn.NEG: HyperDual2.__neg__,
    UnaryFn.SQRT: sqrt,
    UnaryFn.EXP: exp,
    UnaryFn.LN: ln,
    UnaryFn.SIN: sin,
    UnaryFn.COS: cos,
    UnaryFn.TAN: tan,
    UnaryFn.ARCTAN: arctan,
    UnaryFn.ARCSIN: arcsin,
    UnaryFn.ARCSINH: arcsinh,
}


def hd_unary(a, fn):
    """
    Apply an elementary function with exact second-order propagation.

    Raises
    ------
    InvalidDomain
        Argument outside the open set where ``fn`` is smooth.
    UnsupportedFunction
        For ``UnaryFn.ABS``.
    """
    fn = UnaryFn(fn)
    if fn is UnaryFn.ABS:
        raise UnsupportedFunction(fn.value)
    return _UNARY[fn](_coerce(a))


def hd_arith(a, b, op):
    """
    Binary arithmetic on hyper-dual numbers.

    Raises
    ------
    DivisionByZero
        ``DIV`` with ``b.val == 0``.
    InvalidDomain
        ``POW`` of a non-positive base with a fractional or variable
        exponent.
    """
    op = ArithOp(op)
    a, b = _coerce(a), _coerce(b)
    if op is ArithOp.ADD:
        return a + b
    if op is ArithOp.SUB:
        return a - b
    if op is ArithOp.MUL:
        return a * b
    if op is ArithOp.DIV:
        return a / b
    return _power(a, b)


__all__ = """
    Variable
    ArithOp
    UnaryFn
    HyperDual2
    lift_variable
    lift_point
    hd_arith
    hd_unary
    sqrt
    exp
    ln
    sin
    cos
    tan
    arctan
    arcsin
    arcsinh
""".split()
