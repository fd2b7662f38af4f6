"""Panelled Gauss-Legendre rules for the axisymmetric verification integrals.

Every representation check in this package integrates G(x, y) f(|y|) with
x on the first coordinate axis and f radial, so the n-dimensional integral
collapses to the (s = |y|, theta = angle(y, e1)) half-plane with weight
s^(n-1) sin^(n-2)(theta).  The integrable corner singularity at
(s, theta) = (|x|, 0) is handled by geometric panel refinement toward it;
each panel then sees an analytic integrand and plain Gauss-Legendre
converges fast.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .geometry import unit_sphere_area


@lru_cache(maxsize=None)
def _leggauss(m: int):
    return np.polynomial.legendre.leggauss(m)


def panel_rule(edges, m: int):
    """Concatenated m-point Gauss-Legendre nodes/weights over consecutive panels."""
    edges = np.asarray(edges, dtype=float)
    t, w = _leggauss(m)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (t + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def refined_edges(lo: float, hi: float, center: float, width: float, levels: int = 4, ratio: float = 4.0):
    """Panel edges on [lo, hi] geometrically refined toward an interior point."""
    edges = {lo, hi}
    if lo < center < hi:
        d = width
        for _ in range(levels):
            for e in (center - d, center + d):
                if lo < e < hi:
                    edges.add(e)
            d /= ratio
        edges.add(center)
    return sorted(edges)


def geometric_edges(lo: float, hi: float, first: float, levels: int = 4, ratio: float = 4.0):
    """Edges on [lo, hi] clustering toward lo, starting with panel size `first`."""
    edges = {lo, hi}
    e = lo + first
    for _ in range(levels):
        if lo < e < hi:
            edges.add(e)
        e = lo + (e - lo) / ratio
    return sorted(edges)


def axisymmetric_integral(fn, n: int, s_edges, theta_edges, m: int) -> float:
    """Integral over R^n of an axisymmetric integrand F(|y|, angle(y, e1)).

    ``fn(S, T)`` must return the integrand on the meshgrid of radii S and
    polar angles T as an array of shape (len(S), len(T)); the surface
    measure of the remaining S^{n-2} factor and the s^(n-1) sin^(n-2)
    Jacobian are applied here.
    """
    s, ws = panel_rule(s_edges, m)
    th, wt = panel_rule(theta_edges, m)
    vals = fn(s, th)
    jac = np.outer(s ** (n - 1) * ws, np.sin(th) ** (n - 2) * wt)
    return float(unit_sphere_area(n - 1) * np.sum(vals * jac))
