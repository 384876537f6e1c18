"""
Numerical settings shared by all operations.

Values come from the built-in defaults, then from ``JETFLOW_*``
environment variables, then from explicit keyword overrides.
"""

import dataclasses
import functools
import os

from jetflowlib.errors import ConfigError


@dataclasses.dataclass(frozen=True)
class Settings:
    """
    Tolerances and steps.

    Attributes
    ----------
    eps_u1 : float
        Points with ``|u1| <= eps_u1`` are treated as lying on the
        excluded plane ``u1 = 0``.
    fd_step : float
        Step of the central differences applied to form coefficients.
    rtol, atol : float
        Relative and absolute tolerances of the Runge-Kutta integrator.
    quad_tol : float
        Absolute tolerance of the adaptive quadrature.
    energy_tol : float
        Threshold on the scaled residual ``u1*E_u + phi*E_u1``.
    n_samples : int
        Number of dense samples stored per integrated curve.
    seed : int
        Seed of the random points used by sampled checks.
    """
    eps_u1: float = 1.0e-9
    fd_step: float = 1.0e-5
    rtol: float = 1.0e-10
    atol: float = 1.0e-10
    quad_tol: float = 1.0e-11
    energy_tol: float = 1.0e-9
    n_samples: int = 201
    seed: int = 12345

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


_ENV_KEYS = {
    'JETFLOW_EPS_U1': 'eps_u1',
    'JETFLOW_FD_STEP': 'fd_step',
    'JETFLOW_RTOL': 'rtol',
    'JETFLOW_ATOL': 'atol',
    'JETFLOW_QUAD_TOL': 'quad_tol',
}


def _positive_float(key, text):
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(
            '{} must be a number, got "{}"'.format(key, text)) from None

    if not value > 0:
        raise ConfigError('{} must be positive, got {!r}'.format(key, value))

    return value


def load_settings(environ=None, **overrides):
    """
    Build a :class:`Settings` instance.

    Parameters
    ----------
    environ : mapping (optional)
        Environment to read ``JETFLOW_*`` variables from. Defaults to
        ``os.environ``.
    **overrides
        Field values that take precedence over the environment.

    Returns
    -------
    settings : :class:`Settings`
    """
    if environ is None:
        environ = os.environ

    values = {}
    for key, field in _ENV_KEYS.items():
        if key in environ:
            values[field] = _positive_float(key, environ[key])

    for field, value in overrides.items():
        if value is None:
            continue
        if field not in Settings.__dataclass_fields__:
            raise ConfigError('unknown setting "{}"'.format(field))
        if field in _ENV_KEYS.values():
            value = _positive_float(field, value)
        values[field] = value

    return Settings(**values)


@functools.lru_cache(maxsize=1)
def get_settings():
    """Process-wide settings, read once from the environment."""
    return load_settings()


def resolve(settings):
    return get_settings() if settings is None else settings


__all__ = """
    Settings
    load_settings
    get_settings
    resolve
""".split()
