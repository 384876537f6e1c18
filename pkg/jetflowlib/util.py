"""
Grids, sampling regions and number formatting.
"""

import dataclasses
from multiprocessing.pool import ThreadPool

import numpy as np

from jetflowlib.errors import EmptyRegion


@dataclasses.dataclass(frozen=True)
class Region:
    """
    Rectangle in the ``(u, u1)`` plane sampled on a regular grid.

    Parameters
    ----------
    u : tuple of float
        ``(u_min, u_max)``.
    u1 : tuple of float
        ``(u1_min, u1_max)``.
    n_u, n_u1 : int
        Number of grid nodes along each axis.
    """
    u: tuple
    u1: tuple
    n_u: int = 21
    n_u1: int = 21

    def grid(self):
        """Grid nodes as an ``(n, 2)`` array, ``u`` varying slowest."""
        if self.n_u < 1 or self.n_u1 < 1:
            raise EmptyRegion('region has no grid nodes')
        us = np.linspace(self.u[0], self.u[1], self.n_u)
        u1s = np.linspace(self.u1[0], self.u1[1], self.n_u1)
        U, U1 = np.meshgrid(us, u1s, indexing='ij')
        return np.column_stack([U.ravel(), U1.ravel()])

    def random(self, n, seed):
        """``n`` uniformly distributed points from a seeded generator."""
        if n < 1:
            raise EmptyRegion('no random points requested')
        rng = np.random.default_rng(seed)
        us = rng.uniform(self.u[0], self.u[1], n)
        u1s = rng.uniform(self.u1[0], self.u1[1], n)
        return np.column_stack([us, u1s])

    def shrink(self, fraction):
        """Same centre, sides scaled by ``fraction``."""
        def scale(lo, hi):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * fraction
            return (mid - half, mid + half)
        return dataclasses.replace(
            self, u=scale(*self.u), u1=scale(*self.u1))

    def as_dict(self):
        return {
            'u': list(self.u), 'u1': list(self.u1),
            'n_u': self.n_u, 'n_u1': self.n_u1}


def keep_valid(points, predicate):
    """Rows of ``points`` for which ``predicate(u, u1)`` holds."""
    kept = [p for p in np.asarray(points) if predicate(p[0], p[1])]
    if not kept:
        raise EmptyRegion('no valid sample points in region')
    return np.asarray(kept)


class WorkerMap(object):
    """
    Ordered map over a pool of worker threads, or plain ``map`` when
    ``jobs <= 1``.

    Results come back in input order whatever the number of workers.
    """

    def __init__(self, jobs):
        self.jobs = jobs
        if jobs <= 1:
            self.pool = None
            self.map_function = lambda f, x: list(map(f, x))
        else:
            self.pool = ThreadPool(processes=jobs)
            self.map_function = self.pool.map

    def __enter__(self):
        return self.map_function

    def __exit__(self, type, value, traceback):
        if self.pool is not None:
            self.pool.terminate()


def fmt(x):
    """Round-trip safe text of a number with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return 'true' if x else 'false'
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), '.17g')
    return str(x)


def isvector(x):
    x = np.asarray(x)
    if (x.ndim > 2) or (x.ndim == 2 and x.shape[1] != 1):
        return False
    return True


def as_triple(v, name='vector'):
    v = np.asarray(v, dtype=np.float64)
    if not isvector(v) or v.size != 3:
        raise ValueError('"{}" must have exactly three components'.format(name))
    return v.reshape(3)


__all__ = """
    Region
    keep_valid
    WorkerMap
    fmt
    isvector
    as_triple
""".split()
