"""
Expressions for right-hand sides, energies and auxiliary functions.

Text such as ``"-alpha*u1 - lambda*u"`` is parsed by a recursive-descent
parser into an immutable AST, which is evaluated either over plain
floats or over :class:`~jetflowlib.scalar_ad.HyperDual2` numbers. The
grammar is documented in ``docs/grammar.md``.

Identifiers of the form ``x`` or ``u``, ``u1``, ``u2``, ... name jet
variables and must belong to the variables declared for the
expression. ``pi`` and ``e`` are constants. Every other identifier is a
parameter bound at evaluation time.
"""

import dataclasses
import math
import re

from jetflowlib import scalar_ad as ad
from jetflowlib.errors import ArityError, DivisionByZero, DomainError, \
    ExprSyntaxError, InvalidDomain, MissingParam, UnknownIdentifier, \
    UnsupportedFunction


PHI_VARS = frozenset(('u', 'u1'))
U_VARS = frozenset(('u',))

CONSTANTS = {'pi': math.pi, 'e': math.e}

FUNCTIONS = {
    'sqrt': ad.UnaryFn.SQRT,
    'exp': ad.UnaryFn.EXP,
    'ln': ad.UnaryFn.LN,
    'sin': ad.UnaryFn.SIN,
    'cos': ad.UnaryFn.COS,
    'tan': ad.UnaryFn.TAN,
    'arctan': ad.UnaryFn.ARCTAN,
    'arcsin': ad.UnaryFn.ARCSIN,
    'arcsinh': ad.UnaryFn.ARCSINH,
}

UNSUPPORTED = frozenset(('abs', 'sign', 'sgn', 'min', 'max'))

_JET_VARIABLE = re.compile(r'^(x|u\d*)$')


# AST nodes ---------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Number:
    value: float


@dataclasses.dataclass(frozen=True)
class Var:
    name: str


@dataclasses.dataclass(frozen=True)
class Param:
    name: str


@dataclasses.dataclass(frozen=True)
class Unary:
    fn: ad.UnaryFn
    child: object
    pos: int = dataclasses.field(default=-1, compare=False)


@dataclasses.dataclass(frozen=True)
class Binary:
    op: ad.ArithOp
    left: object
    right: object
    pos: int = dataclasses.field(default=-1, compare=False)


# Tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    \s*(?:
      (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>\*\*|[-+*/^(),])
    | (?P<bad>\S)
    )""", re.VERBOSE)


@dataclasses.dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastgroup
        if kind is None:
            break
        start = m.start(kind)
        if kind == 'bad':
            raise ExprSyntaxError(
                start, 'unexpected character "{}"'.format(m.group(kind)))
        tok = m.group(kind)
        if tok == '**':
            tok = '^'
        tokens.append(_Token(kind, tok, start))
        pos = m.end()

    tokens.append(_Token('end', '', len(text)))
    return tokens


# Parser ------------------------------------------------------------------

class _Parser:

    def __init__(self, text, allowed_vars, params):
        self.tokens = _tokenize(text)
        self.i = 0
        self.allowed_vars = frozenset(allowed_vars)
        self.params = None if params is None else frozenset(params)

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        if self.tok.text != text or self.tok.kind == 'end':
            raise ExprSyntaxError(
                self.tok.pos, 'expected "{}"'.format(text))
        return self.advance()

    def parse(self):
        node = self.expression()
        if self.tok.kind != 'end':
            raise ExprSyntaxError(
                self.tok.pos, 'unexpected "{}"'.format(self.tok.text))
        return node

    def expression(self):
        node = self.term()
        while self.tok.kind == 'op' and self.tok.text in '+-':
            tok = self.advance()
            op = ad.ArithOp.ADD if tok.text == '+' else ad.ArithOp.SUB
            node = Binary(op, node, self.term(), tok.pos)
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == 'op' and self.tok.text in '*/':
            tok = self.advance()
            op = ad.ArithOp.MUL if tok.text == '*' else ad.ArithOp.DIV
            node = Binary(op, node, self.unary(), tok.pos)
        return node

    def unary(self):
        if self.tok.kind == 'op' and self.tok.text == '-':
            tok = self.advance()
            return Unary(ad.UnaryFn.NEG, self.unary(), tok.pos)
        if self.tok.kind == 'op' and self.tok.text == '+':
            self.advance()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.tok.kind == 'op' and self.tok.text == '^':
            tok = self.advance()
            # right-associative: a^b^c == a^(b^c)
            return Binary(ad.ArithOp.POW, base, self.unary(), tok.pos)
        return base

    def atom(self):
        tok = self.tok
        if tok.kind == 'number':
            self.advance()
            return Number(float(tok.text))

        if tok.kind == 'name':
            self.advance()
            if self.tok.kind == 'op' and self.tok.text == '(':
                return self.call(tok)
            return self.identifier(tok)

        if tok.kind == 'op' and tok.text == '(':
            self.advance()
            node = self.expression()
            self.expect(')')
            return node

        if tok.kind == 'end':
            raise ExprSyntaxError(tok.pos, 'unexpected end of expression')
        raise ExprSyntaxError(tok.pos, 'unexpected "{}"'.format(tok.text))

    def call(self, name_tok):
        name = name_tok.text
        if name in UNSUPPORTED:
            raise UnsupportedFunction(name)
        if name not in FUNCTIONS:
            raise UnknownIdentifier(name, name_tok.pos)

        self.expect('(')
        if self.tok.kind == 'op' and self.tok.text == ')':
            raise ArityError(name, name_tok.pos)
        arg = self.expression()
        if self.tok.kind == 'op' and self.tok.text == ',':
            raise ArityError(name, name_tok.pos)
        self.expect(')')
        return Unary(FUNCTIONS[name], arg, name_tok.pos)

    def identifier(self, tok):
        name = tok.text
        if name in CONSTANTS:
            return Number(CONSTANTS[name])
        if name in FUNCTIONS or name in UNSUPPORTED:
            raise ExprSyntaxError(
                self.tok.pos, 'function "{}" needs an argument'.format(name))
        if _JET_VARIABLE.match(name):
            if name not in self.allowed_vars:
                raise UnknownIdentifier(name, tok.pos)
            return Var(name)
        if self.params is not None and name not in self.params:
            raise UnknownIdentifier(name, tok.pos)
        return Param(name)


def parse(text, allowed_vars=PHI_VARS, params=None):
    """
    Parse an expression.

    Parameters
    ----------
    text : str
        Expression text, e.g. ``"sqrt(1 - kappa*u1^2)"``.
    allowed_vars : set of str
        Jet variables the expression may use, ``{"u", "u1"}`` for
        right-hand sides and energies, ``{"u"}`` for K and rho.
    params : set of str (optional)
        If given, the only parameter names accepted.

    Returns
    -------
    expr : AST node

    Raises
    ------
    ExprSyntaxError, UnknownIdentifier, ArityError, UnsupportedFunction
    """
    if not text or not text.strip():
        raise ExprSyntaxError(0, 'empty expression')
    return _Parser(text, allowed_vars, params).parse()


# Inspection --------------------------------------------------------------

def _walk(node):
    yield node
    if isinstance(node, Unary):
        yield from _walk(node.child)
    elif isinstance(node, Binary):
        yield from _walk(node.left)
        yield from _walk(node.right)


def free_params(expr):
    return frozenset(n.name for n in _walk(expr) if isinstance(n, Param))


def variables(expr):
    return frozenset(n.name for n in _walk(expr) if isinstance(n, Var))


_FN_NAMES = {fn: name for name, fn in FUNCTIONS.items()}


def to_text(expr):
    """Print an AST in a fully parenthesized form that parses back."""
    if isinstance(expr, Number):
        return repr(expr.value)
    if isinstance(expr, (Var, Param)):
        return expr.name
    if isinstance(expr, Unary):
        if expr.fn is ad.UnaryFn.NEG:
            return '(-{})'.format(to_text(expr.child))
        return '{}({})'.format(_FN_NAMES[expr.fn], to_text(expr.child))
    return '({} {} {})'.format(
        to_text(expr.left), expr.op.value, to_text(expr.right))


# Evaluation --------------------------------------------------------------

def _real_pow(a, b):
    if float(b).is_integer():
        if a == 0.0 and b < 0:
            raise DivisionByZero('zero raised to a negative power')
        n = int(b)
    elif not a > 0:
        raise InvalidDomain('fractional power of a non-positive base')
    else:
        n = b
    try:
        return a**n
    except OverflowError:
        raise InvalidDomain('power overflows the float range') from None


def _real_div(a, b):
    if b == 0.0:
        raise DivisionByZero('division by zero')
    return a / b


def _real_unary(fn, a):
    return ad.hd_unary(ad.HyperDual2(a), fn).val


_REAL_ARITH = {
    ad.ArithOp.ADD: lambda a, b: a + b,
    ad.ArithOp.SUB: lambda a, b: a - b,
    ad.ArithOp.MUL: lambda a, b: a * b,
    ad.ArithOp.DIV: _real_div,
    ad.ArithOp.POW: _real_pow,
}


def _evaluate(node, env, params, hyper):
    if isinstance(node, Number):
        return ad.HyperDual2(node.value) if hyper else node.value

    if isinstance(node, Var):
        return env[node.name]

    if isinstance(node, Param):
        try:
            value = params[node.name]
        except KeyError:
            raise MissingParam(node.name) from None
        return ad.HyperDual2(value) if hyper else float(value)

    if isinstance(node, Unary):
        child = _evaluate(node.child, env, params, hyper)
        try:
            if hyper:
                return ad.hd_unary(child, node.fn)
            if node.fn is ad.UnaryFn.NEG:
                return -child
            return _real_unary(node.fn, child)
        except DomainError as exc:
            if exc.position is not None:
                raise
            raise type(exc)(str(exc), node.pos) from None

    left = _evaluate(node.left, env, params, hyper)
    right = _evaluate(node.right, env, params, hyper)
    try:
        if hyper:
            return ad.hd_arith(left, right, node.op)
        return _REAL_ARITH[node.op](left, right)
    except DomainError as exc:
        if exc.position is not None:
            raise
        raise type(exc)(str(exc), node.pos) from None


def eval_hd(expr, u, u1=None, params=None):
    """
    Evaluate over hyper-dual numbers.

    Parameters
    ----------
    expr : AST node
    u, u1 : :class:`~jetflowlib.scalar_ad.HyperDual2`
        Seeded jet variables (see :func:`~jetflowlib.scalar_ad.lift_point`).
        ``u1`` may be None for expressions in ``u`` only.
    params : mapping (optional)
        Parameter values.

    Returns
    -------
    result : :class:`~jetflowlib.scalar_ad.HyperDual2`
        Value with first and second partials at ``(u.val, u1.val)``.

    Raises
    ------
    MissingParam
        A parameter has no bound value.
    InvalidDomain, DivisionByZero
        With the column of the offending node.
    """
    env = {'u': u}
    if u1 is not None:
        env['u1'] = u1
    return _evaluate(expr, env, params or {}, True)


def eval_real(expr, u, u1=0.0, params=None):
    """Evaluate over plain floats."""
    return _evaluate(
        expr, {'u': float(u), 'u1': float(u1)}, params or {}, False)


# Scalar fields -----------------------------------------------------------

class ScalarField:
    """
    A smooth function of ``(u, u1)``.

    Subclasses implement :meth:`eval_hd`; :meth:`jet` and :meth:`value`
    evaluate at a plain point.
    """

    def eval_hd(self, u, u1):
        raise NotImplementedError

    def jet(self, u, u1):
        return self.eval_hd(*ad.lift_point(u, u1))

    def value(self, u, u1):
        return self.jet(u, u1).val

    def __call__(self, u, u1):
        return self.value(u, u1)


class ExprField(ScalarField):
    """
    An expression bound to parameter values.

    Parameters
    ----------
    expr : AST node or str
        Parsed expression, or text parsed with ``allowed_vars``.
    params : mapping (optional)
        Values of the free parameters.
    allowed_vars : set of str
        Used only when ``expr`` is text.
    """

    def __init__(self, expr, params=None, allowed_vars=PHI_VARS):
        if isinstance(expr, str):
            expr = parse(expr, allowed_vars)
        self.expr = expr
        self.params = dict(params or {})
        for name in free_params(expr):
            if name not in self.params:
                raise MissingParam(name)

    def eval_hd(self, u, u1):
        return eval_hd(self.expr, u, u1, self.params)

    def value(self, u, u1):
        return eval_real(self.expr, u, u1, self.params)

    def __repr__(self):
        return 'ExprField({!r})'.format(to_text(self.expr))


class CombinedField(ScalarField):
    """
    Pointwise combination ``fn(u, u1, *values)`` of other fields, where
    ``values`` are their hyper-dual evaluations.
    """

    def __init__(self, fn, *fields, name=None):
        self.fn = fn
        self.fields = fields
        self.name = name or 'combined'

    def eval_hd(self, u, u1):
        return self.fn(u, u1, *(f.eval_hd(u, u1) for f in self.fields))

    def __repr__(self):
        return 'CombinedField({})'.format(self.name)


def as_field(obj, params=None, allowed_vars=PHI_VARS):
    """Accept a field, an AST or expression text."""
    if isinstance(obj, ScalarField):
        return obj
    return ExprField(obj, params, allowed_vars)


__all__ = """
    PHI_VARS
    U_VARS
    Number
    Var
    Param
    Unary
    Binary
    parse
    free_params
    variables
    to_text
    eval_hd
    eval_real
    ScalarField
    ExprField
    CombinedField
    as_field
""".split()
