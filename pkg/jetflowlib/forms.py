"""
Exterior algebra on coordinate components.

A 1-form on the 3-dimensional manifold is stored as its three
components in the basis ``(dx, du, du1)``; a 2-form as the
antisymmetric 3-by-3 matrix ``F[a, b] = F(d_a, d_b)``. With this
convention ``(alpha ^ beta)(X, Y) = alpha(X) beta(Y) - alpha(Y) beta(X)``
and ``d alpha (d_a, d_b) = d_a alpha_b - d_b alpha_a``.
"""

import numpy as np
from scipy import linalg as sla


def wedge(alpha, beta):
    """Wedge product of two 1-forms as an antisymmetric matrix."""
    alpha = np.asarray(alpha, dtype=np.float64)
    beta = np.asarray(beta, dtype=np.float64)
    return np.outer(alpha, beta) - np.outer(beta, alpha)


def evaluate2(F, X, Y):
    """Value ``F(X, Y)`` of a 2-form on two vectors."""
    return float(np.dot(X, np.dot(F, Y)))


def exterior_derivative(field, y, h):
    """
    Exterior derivative of a 1-form field by central differences.

    Parameters
    ----------
    field : callable
        Maps a coordinate point ``y`` (length 3) to an array whose last
        axis holds 1-form components. Leading axes (e.g. a whole matrix
        of forms) are differentiated independently.
    y : array-like
        Base point ``(x, u, u1)``.
    h : float
        Step of the central differences.

    Returns
    -------
    d : ndarray
        Array of shape ``field(y).shape + (3,)``; ``d[..., a, b]`` is
        ``d_a alpha_b - d_b alpha_a``.
    """
    y = np.asarray(y, dtype=np.float64)
    grads = []
    for a in range(3):
        step = np.zeros(3)
        step[a] = h
        grads.append(
            (np.asarray(field(y + step)) - np.asarray(field(y - step)))
            / (2.0 * h))

    # jac[..., a, b] = d_a alpha_b
    jac = np.stack(grads, axis=-2)
    return jac - np.swapaxes(jac, -1, -2)


def is_positive_definite(G):
    """Cholesky-based test of positive definiteness."""
    try:
        sla.cholesky(G, lower=True)
    except sla.LinAlgError:
        return False
    return True


def gram(vectors, G):
    """Matrix of inner products ``G(v_i, v_j)``."""
    V = np.asarray(vectors, dtype=np.float64)
    return V @ G @ V.T


__all__ = """
    wedge
    evaluate2
    exterior_derivative
    is_positive_definite
    gram
""".split()
