"""
Exceptions raised by jetflowlib.
"""


class JetflowError(Exception):
    pass


class ConfigError(JetflowError):
    pass


class DomainError(JetflowError):
    """A function was evaluated outside the set where it is smooth."""

    def __init__(self, message, position=None):
        self.position = position
        if position is not None:
            message = '{} (at column {:d})'.format(message, position + 1)
        super().__init__(message)


class InvalidDomain(DomainError):
    pass


class DivisionByZero(DomainError, ZeroDivisionError):
    pass


class UnsupportedFunction(JetflowError):

    def __init__(self, name):
        self.name = name
        super().__init__(
            'function "{}" is not twice differentiable and is not '
            'supported'.format(name))


class ExprSyntaxError(JetflowError, SyntaxError):

    def __init__(self, position, message):
        self.position = position
        super().__init__('{} (at column {:d})'.format(message, position + 1))

    def __str__(self):
        return self.args[0]


class UnknownIdentifier(JetflowError):

    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__('unknown identifier "{}"'.format(name))


class ArityError(JetflowError):

    def __init__(self, name, position=None):
        self.name = name
        self.position = position
        super().__init__(
            'function "{}" takes exactly one argument'.format(name))


class MissingParam(JetflowError):

    def __init__(self, name):
        self.name = name
        super().__init__('no value bound for parameter "{}"'.format(name))


class SingularPoint(JetflowError):
    """The point is on (or too close to) the excluded plane u1 = 0."""
    pass


class SingularCrossing(SingularPoint):

    def __init__(self, x_stop, message=None):
        self.x_stop = x_stop
        super().__init__(
            message or 'trajectory reaches u1 = 0 at {!r}'.format(x_stop))


class NotReachable(SingularPoint):

    def __init__(self, u_stop):
        self.u_stop = u_stop
        super().__init__(
            'leaf folds back at u = {!r} before reaching the reference '
            'section'.format(u_stop))


class StepTooLarge(JetflowError):
    pass


class StepFailure(JetflowError):
    pass


class EmptyRegion(JetflowError):
    pass


class QuadratureFailure(JetflowError):
    pass


class SignCrossing(JetflowError):
    pass


class DegenerateLagrangian(JetflowError):
    pass


class NotAnEnergy(JetflowError):
    """A closed form failed the first-integral check."""

    def __init__(self, report):
        self.report = report
        super().__init__(
            'not an energy: scaled residual {:.3g} (tol {:.3g}), '
            'min |E_u1| {:.3g}'.format(
                report['scaled_residual'], report['tol'],
                report['min_abs_mu']))


class UnknownEntry(JetflowError):

    def __init__(self, name):
        self.name = name
        super().__init__('no built-in entry named "{}"'.format(name))


class UnknownParameter(JetflowError):

    def __init__(self, name, entry):
        self.name = name
        super().__init__(
            'entry "{}" has no parameter "{}"'.format(entry, name))


class ConstraintViolation(JetflowError):

    def __init__(self, which):
        self.which = which
        super().__init__('constraint violated: {}'.format(which))


__all__ = """
    JetflowError
    ConfigError
    DomainError
    InvalidDomain
    DivisionByZero
    UnsupportedFunction
    ExprSyntaxError
    UnknownIdentifier
    ArityError
    MissingParam
    SingularPoint
    SingularCrossing
    NotReachable
    StepTooLarge
    StepFailure
    EmptyRegion
    QuadratureFailure
    SignCrossing
    DegenerateLagrangian
    NotAnEnergy
    UnknownEntry
    UnknownParameter
    ConstraintViolation
""".split()
