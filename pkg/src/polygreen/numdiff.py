"""Central finite differences with one Richardson extrapolation level.

Used for derivative checks on kernels that are analytic off the diagonal;
plain second-order central stencils extrapolated once are accurate far
beyond the tolerances asserted anywhere in this package.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement, permutations

import numpy as np

from .errors import PreconditionError


def axis_stencil(order: int):
    """Offsets (in units of h) and coefficients of the central stencil for d^m/dx^m."""
    m = int(order)
    if m < 0:
        raise PreconditionError("derivative order must be nonnegative")
    if m == 0:
        return [0.0], [1.0]
    offsets = [m / 2.0 - i for i in range(m + 1)]
    coefs = [((-1.0) ** i) * math.comb(m, i) for i in range(m + 1)]
    return offsets, coefs


def partial_stencil(alpha):
    """Tensor-product stencil for the mixed partial d^alpha, offsets in units of h."""
    offsets = [np.zeros(len(alpha))]
    coefs = [1.0]
    for axis, m in enumerate(alpha):
        if m == 0:
            continue
        off_m, co_m = axis_stencil(m)
        new_off, new_co = [], []
        for base, c in zip(offsets, coefs):
            for o, cm in zip(off_m, co_m):
                shifted = base.copy()
                shifted[axis] += o
                new_off.append(shifted)
                new_co.append(c * cm)
        offsets, coefs = new_off, new_co
    return np.asarray(offsets), np.asarray(coefs)


def _apply(f, y, offsets, coefs, h, order):
    total = 0.0
    for off, c in zip(offsets, coefs):
        total += c * f(y + h * off)
    return total / h**order


def partial_derivative(f, y, alpha, h, richardson: bool = True) -> float:
    """Mixed partial d^alpha f(y) by nested central differences."""
    y = np.asarray(y, dtype=float)
    alpha = tuple(int(a) for a in alpha)
    order = sum(alpha)
    if order == 0:
        return float(f(y))
    offsets, coefs = partial_stencil(alpha)
    d_h = _apply(f, y, offsets, coefs, h, order)
    if not richardson:
        return float(d_h)
    d_h2 = _apply(f, y, offsets, coefs, h / 2.0, order)
    return float((4.0 * d_h2 - d_h) / 3.0)


def gradient(f, y, h, richardson: bool = True) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    out = np.zeros(n)
    for i in range(n):
        alpha = [0] * n
        alpha[i] = 1
        out[i] = partial_derivative(f, y, alpha, h, richardson)
    return out


def derivative_tensor(f, y, order: int, h, richardson: bool = True) -> np.ndarray:
    """All order-r partials of f at y as a symmetric tensor of shape (n,)*r."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if order < 1:
        raise PreconditionError("derivative_tensor needs order >= 1")
    out = np.zeros((n,) * order)
    for combo in combinations_with_replacement(range(n), order):
        alpha = [0] * n
        for axis in combo:
            alpha[axis] += 1
        val = partial_derivative(f, y, alpha, h, richardson)
        for perm in set(permutations(combo)):
            out[perm] = val
    return out


def max_abs_derivative(f, y, order: int, h, richardson: bool = True) -> float:
    """Sup norm over all order-r partials (the tensor max-abs entry)."""
    if order == 0:
        return abs(float(f(np.asarray(y, dtype=float))))
    return float(np.abs(derivative_tensor(f, y, order, h, richardson)).max())


def stencil_radius(order: int, h: float) -> float:
    """Largest offset magnitude any order-r stencil reaches from the base point."""
    return 0.5 * order * h


def radial_derivative(profile, r, h, order=1, richardson: bool = True) -> float:
    """d^m/dr^m of a scalar radial profile by the same central machinery."""
    offsets, coefs = axis_stencil(order)

    def apply(step):
        return sum(c * profile(r + step * o) for o, c in zip(offsets, coefs)) / step**order

    d_h = apply(h)
    if not richardson:
        return float(d_h)
    return float((4.0 * apply(h / 2.0) - d_h) / 3.0)


def radial_polyharmonic(profile, r, k: int, n: int, h) -> float:
    """(-Delta)^k of a radial profile, iterating -(g'' + (n-1) g'/s) numerically.

    Each Laplacian level is taken by central differences with Richardson;
    accuracy degrades with k but stays far below the 1e-3 relative checks
    this is used for.
    """

    def lap(g):
        def out(s):
            g2 = radial_derivative(g, s, h, order=2)
            g1 = radial_derivative(g, s, h, order=1)
            return -(g2 + (n - 1) * g1 / s)

        return out

    g = profile
    for _ in range(k):
        g = lap(g)
    return float(g(r))
