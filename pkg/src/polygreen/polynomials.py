"""Exact multivariate polynomial arithmetic and iterated Laplacians.

This is the oracle that manufactures right-hand sides: pick a polynomial
solution u, apply ``polyharmonic`` to get the exact f = (-Delta)^k u, and
check the reproducing integral against it.  Coefficients are doubles; the
manufactured solutions used in this package have small integer structure,
so all arithmetic below stays exact.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PreconditionError


class Polynomial:
    """Polynomial in n variables stored as {multi-index: coefficient}."""

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs=None):
        self.nvars = int(nvars)
        data = {}
        if coeffs:
            for mono, c in coeffs.items():
                key = tuple(int(e) for e in mono)
                if len(key) != self.nvars:
                    raise PreconditionError(
                        f"multi-index {key} does not match nvars={self.nvars}"
                    )
                if any(e < 0 for e in key):
                    raise PreconditionError(f"negative exponent in {key}")
                c = float(c)
                if c != 0.0:
                    data[key] = data.get(key, 0.0) + c
        self.coeffs = {m: c for m, c in data.items() if c != 0.0}

    @classmethod
    def constant(cls, nvars: int, value) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def coordinate(cls, nvars: int, i: int) -> "Polynomial":
        mono = [0] * nvars
        mono[i] = 1
        return cls(nvars, {tuple(mono): 1.0})

    @classmethod
    def radius_squared(cls, nvars: int) -> "Polynomial":
        coeffs = {}
        for i in range(nvars):
            mono = [0] * nvars
            mono[i] = 2
            coeffs[tuple(mono)] = 1.0
        return cls(nvars, coeffs)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * self._coerce(other)

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(
                self.nvars, {m: c * float(other) for m, c in self.coeffs.items()}
            )
        other = self._coerce(other)
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                key = tuple(a + b for a, b in zip(m1, m2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise PreconditionError("negative polynomial powers are not defined")
        out = Polynomial.constant(self.nvars, 1.0)
        for _ in range(int(exponent)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __repr__(self):
        return f"Polynomial(nvars={self.nvars}, terms={len(self.coeffs)})"

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise PreconditionError("mixed numbers of variables")
            return other
        if np.isscalar(other):
            return Polynomial.constant(self.nvars, other)
        raise PreconditionError(f"cannot combine Polynomial with {type(other)!r}")

    def derivative(self, i: int) -> "Polynomial":
        out = {}
        for m, c in self.coeffs.items():
            if m[i] == 0:
                continue
            key = list(m)
            key[i] -= 1
            out[tuple(key)] = out.get(tuple(key), 0.0) + c * m[i]
        return Polynomial(self.nvars, out)

    def laplacian(self) -> "Polynomial":
        out = Polynomial(self.nvars)
        for i in range(self.nvars):
            out = out + self.derivative(i).derivative(i)
        return out

    def total_degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(m) for m in self.coeffs)

    def is_constant(self) -> bool:
        return all(sum(m) == 0 for m in self.coeffs)

    def constant_value(self) -> float:
        if not self.is_constant():
            raise PreconditionError("polynomial is not constant")
        return self.coeffs.get((0,) * self.nvars, 0.0)

    def __call__(self, y):
        pts = np.asarray(y, dtype=float)
        squeeze = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if pts.shape[1] != self.nvars:
            raise PreconditionError(
                f"points have {pts.shape[1]} coordinates, expected {self.nvars}"
            )
        vals = np.zeros(pts.shape[0])
        for m, c in self.coeffs.items():
            term = np.full(pts.shape[0], c)
            for i, e in enumerate(m):
                if e:
                    term = term * pts[:, i] ** e
            vals += term
        return float(vals[0]) if squeeze else vals


def laplacian(p: Polynomial) -> Polynomial:
    return p.laplacian()


def polyharmonic(p: Polynomial, k: int) -> Polynomial:
    """Exact image (-Delta)^k p."""
    if k < 1:
        raise PreconditionError(f"order k must be >= 1, got {k}")
    out = p
    for _ in range(k):
        out = out.laplacian()
    return ((-1.0) ** k) * out


def ball_bubble(n: int, k: int) -> Polynomial:
    """(1 - |y|^2)^k, the canonical solution vanishing to order k on the unit sphere."""
    one = Polynomial.constant(n, 1.0)
    return (one - Polynomial.radius_squared(n)) ** k


def annulus_bubble(n: int, k: int, a: float, b: float) -> Polynomial:
    """((|y|^2 - a^2)(b^2 - |y|^2))^k, vanishing to order k on both spheres."""
    r2 = Polynomial.radius_squared(n)
    inner = r2 - Polynomial.constant(n, a * a)
    outer = Polynomial.constant(n, b * b) - r2
    return (inner * outer) ** k


class RadialPolynomial:
    """Power profile sum_m c_m r^m of a radial function, m any integer.

    Closed under the radial Laplacian via Delta r^m = m (m + n - 2) r^(m-2),
    which is what makes piecewise-polynomial radial test functions exactly
    differentiable away from the origin.  Negative powers appear after
    differentiating odd powers and are fine as long as evaluation stays off
    r = 0.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=None):
        data = {}
        if coeffs:
            for m, c in coeffs.items():
                c = float(c)
                if c != 0.0:
                    data[int(m)] = data.get(int(m), 0.0) + c
        self.coeffs = {m: c for m, c in data.items() if c != 0.0}

    @classmethod
    def from_power(cls, m: int, c: float = 1.0) -> "RadialPolynomial":
        return cls({m: c})

    def __add__(self, other):
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return RadialPolynomial(out)

    def __mul__(self, other):
        if np.isscalar(other):
            return RadialPolynomial({m: c * float(other) for m, c in self.coeffs.items()})
        out = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                out[m1 + m2] = out.get(m1 + m2, 0.0) + c1 * c2
        return RadialPolynomial(out)

    __rmul__ = __mul__

    def shift_compose(self, scale: float, offset: float) -> "RadialPolynomial":
        """Profile of t -> self(scale * t + offset); powers must be nonnegative."""
        out = RadialPolynomial()
        for m, c in self.coeffs.items():
            if m < 0:
                raise PreconditionError("cannot compose negative powers affinely")
            term = {}
            for j in range(m + 1):
                term[j] = c * math.comb(m, j) * scale**j * offset ** (m - j)
            out = out + RadialPolynomial(term)
        return out

    def radial_laplacian(self, n: int) -> "RadialPolynomial":
        return RadialPolynomial(
            {m - 2: c * m * (m + n - 2) for m, c in self.coeffs.items()}
        )

    def radial_polyharmonic(self, k: int, n: int) -> "RadialPolynomial":
        out = self
        for _ in range(k):
            out = out.radial_laplacian(n)
        return (-1.0) ** k * out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        for m, c in self.coeffs.items():
            out = out + c * r ** float(m)
        return float(out) if out.ndim == 0 else out
