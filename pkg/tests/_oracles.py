"""Independent oracles shared by the test modules.

Everything here is deliberately written without touching the series or
calibration code paths it is used to check.
"""

import math

import numpy as np

from polygreen.geometry import unit_sphere_area


def images_green(x, y, n):
    """Laplace (k=1) unit-ball Green function by the reflection construction."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    cn = 1.0 / ((n - 2) * unit_sphere_area(n))
    direct = np.linalg.norm(x - y) ** (2 - n)
    bracket = math.sqrt(float(np.dot(x, x) * np.dot(y, y) - 2.0 * np.dot(x, y) + 1.0))
    return cn * (direct - bracket ** (2 - n))


def fundamental_constant(n):
    """Upper constant 1/((n-2) n e_n) of the second-order two-sided bound."""
    return 1.0 / ((n - 2) * unit_sphere_area(n))


def random_ball_pairs(rng, n, count, radius=0.95, min_sep=1e-3):
    pairs = []
    while len(pairs) < count:
        x = rng.uniform(-1.0, 1.0, size=n)
        y = rng.uniform(-1.0, 1.0, size=n)
        if np.linalg.norm(x) >= radius or np.linalg.norm(y) >= radius:
            continue
        if np.linalg.norm(x - y) < min_sep:
            continue
        pairs.append((x, y))
    return pairs


def random_annulus_point(rng, n, a, b):
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    u = rng.uniform()
    r = (a**n + u * (b**n - a**n)) ** (1.0 / n)
    return r * v


def axis_point(n, value, axis=0):
    p = np.zeros(n)
    p[axis] = value
    return p


def fd_laplacian(f, y, h):
    """Plain second-order central Laplacian, independent of the package FD code."""
    y = np.asarray(y, dtype=float)
    total = 0.0
    for i in range(y.size):
        e = np.zeros_like(y)
        e[i] = h
        total += (f(y + e) - 2.0 * f(y) + f(y - e)) / h**2
    return total


def _fd_polyharmonic_raw(f, y, k, h):
    if k == 0:
        return f(y)
    return -fd_laplacian(lambda z: _fd_polyharmonic_raw(f, z, k - 1, h), y, h)


def fd_polyharmonic(f, y, k, h):
    """(-Delta)^k by nested central Laplacians, Richardson-extrapolated once."""
    coarse = _fd_polyharmonic_raw(f, y, k, h)
    fine = _fd_polyharmonic_raw(f, y, k, h / 2.0)
    return (4.0 * fine - coarse) / 3.0
