"""Points, spherical domains, and the Moebius inversion x -> x/|x|^2.

Points are plain NumPy vectors; ``as_point`` validates shape and, when a
``ProblemSpec`` is supplied, the space dimension.  All operations here are
pure and the domain objects are immutable, so values can be shared freely
between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

# Inputs closer to the inversion pole than this are rejected outright,
# since every downstream formula divides by |x|.
POLE_TOLERANCE = 1e-14

# Points are bare float vectors; the alias documents intent in signatures.
Point = np.ndarray


@dataclass(frozen=True)
class ProblemSpec:
    """Space dimension n and operator half-order k, with n > 2k >= 2."""

    n: int
    k: int

    def __post_init__(self):
        if not isinstance(self.n, int) or not isinstance(self.k, int):
            raise PreconditionError("dimension n and order k must be integers")
        if not self.n > 2 * self.k >= 2:
            raise PreconditionError(
                f"require n > 2k >= 2, got n={self.n}, k={self.k}"
            )

    @property
    def decay_exponent(self) -> int:
        """Exponent 2k - n of the fundamental-solution power law."""
        return 2 * self.k - self.n


def as_point(x, spec: ProblemSpec | None = None) -> np.ndarray:
    """Validate an array-like as a point and return it as a float vector."""
    p = np.asarray(x, dtype=float)
    if p.ndim != 1:
        raise PreconditionError(f"point must be a 1-d vector, got shape {p.shape}")
    if spec is not None and p.shape[0] != spec.n:
        raise PreconditionError(
            f"point has length {p.shape[0]}, spec requires n={spec.n}"
        )
    if not np.all(np.isfinite(p)):
        raise PreconditionError("point has non-finite coordinates")
    return p


@dataclass(frozen=True)
class BallDomain:
    """Ball of given radius; the center is stored as a plain tuple."""

    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise PreconditionError(f"ball radius must be positive, got {self.radius}")

    @classmethod
    def unit(cls, n: int) -> "BallDomain":
        return cls(center=(0.0,) * n, radius=1.0)

    @property
    def dimension(self) -> int:
        return len(self.center)

    def center_array(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True)
class AnnulusDomain:
    """Concentric annulus inner < |y| < outer centered at the origin."""

    inner: float
    outer: float

    def __post_init__(self):
        object.__setattr__(self, "inner", float(self.inner))
        object.__setattr__(self, "outer", float(self.outer))
        if not 0 < self.inner < self.outer:
            raise PreconditionError(
                f"require 0 < inner < outer, got {self.inner}, {self.outer}"
            )

    def contains_radius(self, r: float, margin: float = 0.0) -> bool:
        return self.inner + margin < r < self.outer - margin


def unit_ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball in R^n."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1}, equal to n times the ball volume."""
    return n * unit_ball_volume(n)


def invert(x) -> np.ndarray:
    """Inversion x -> x/|x|^2 across the unit sphere."""
    p = as_point(x)
    r2 = float(np.dot(p, p))
    if r2 < POLE_TOLERANCE**2:
        raise DomainError("inversion pole: |x| is (numerically) zero")
    return p / r2


def conformal_factor(x, spec: ProblemSpec) -> float:
    """Weight |x|^(2k-n) attached to the inversion map."""
    p = as_point(x, spec)
    r = float(np.linalg.norm(p))
    if r < POLE_TOLERANCE:
        raise DomainError("conformal factor undefined at the origin")
    return r ** spec.decay_exponent


def mobius_distance_check(x, y) -> tuple:
    """Both sides of |inv(x)-inv(y)| = |x-y|/(|x| |y|); caller asserts equality."""
    px, py = as_point(x), as_point(y)
    lhs = float(np.linalg.norm(invert(px) - invert(py)))
    rhs = float(np.linalg.norm(px - py) / (np.linalg.norm(px) * np.linalg.norm(py)))
    return lhs, rhs
