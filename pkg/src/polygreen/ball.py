"""Closed-form Green function of (-Delta)^k on balls.

On the unit ball the kernel is

    G(x, y) = K * |x-y|^(2k-n) * F(A(x, y)),

where A >= 1 is the auxiliary distance ratio returned by
``boggio_auxiliary`` and F is the profile integral evaluated in closed
form by ``boggio_profile`` (a finite power sum: n > 2k rules out
logarithmic antiderivatives).  The constant K is never transcribed from
the literature: ``boggio_kernel`` pins it at construction time by the
center representation identity, which reduces to a one-dimensional
polynomial integral and therefore holds to machine precision.  General
balls are handled by translation and the exact scaling law
G_{B_R}(Rx, Ry) = R^(2k-n) G_{B_1}(x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError, SingularityError
from .geometry import BallDomain, ProblemSpec, as_point, unit_sphere_area
from .polynomials import ball_bubble, polyharmonic

_BOUNDARY_TOL = 1e-12
_DIAGONAL_TOL = 1e-14


@dataclass(frozen=True)
class BoggioKernel:
    """Green kernel of (-Delta)^k on a ball, with its calibrated constant."""

    spec: ProblemSpec
    ball: BallDomain
    normalization: float

    def __post_init__(self):
        if not self.normalization > 0:
            raise PreconditionError(
                f"normalization must be positive, got {self.normalization}"
            )
        if self.ball.dimension != self.spec.n:
            raise PreconditionError("ball dimension does not match spec")


def boggio_auxiliary(x, y) -> float:
    """Auxiliary ratio A(x, y) = sqrt(|x|^2 |y|^2 - 2 x.y + 1) / |x - y| on the unit ball.

    Always >= 1, with equality exactly when one argument lies on the unit
    sphere.
    """
    px, py = as_point(x), as_point(y)
    rx2 = float(np.dot(px, px))
    ry2 = float(np.dot(py, py))
    if rx2 > (1.0 + _BOUNDARY_TOL) ** 2 or ry2 > (1.0 + _BOUNDARY_TOL) ** 2:
        raise DomainError("boggio_auxiliary arguments must lie in the closed unit ball")
    sep = float(np.linalg.norm(px - py))
    if sep < _DIAGONAL_TOL:
        raise SingularityError("boggio_auxiliary is singular on the diagonal x = y")
    bracket = math.sqrt(max(rx2 * ry2 - 2.0 * float(np.dot(px, py)) + 1.0, 0.0))
    return max(bracket / sep, 1.0)


def boggio_profile(z, spec: ProblemSpec) -> float:
    """Profile integral of (v^2-1)^(k-1) v^(1-n) from 1 to z, in closed form.

    Binomial expansion gives pure powers only: every antiderivative
    exponent 2j + 2 - n is strictly negative because n > 2k.
    """
    z = float(z)
    if z < 1.0 - 1e-12:
        raise DomainError(f"profile argument must be >= 1, got {z}")
    z = max(z, 1.0)
    n, k = spec.n, spec.k
    total = 0.0
    for j in range(k):
        e = 2 * j + 2 - n
        total += math.comb(k - 1, j) * ((-1.0) ** (k - 1 - j)) * (z**e - 1.0) / e
    return total


def _profile_batch(z: np.ndarray, spec: ProblemSpec) -> np.ndarray:
    z = np.maximum(np.asarray(z, dtype=float), 1.0)
    n, k = spec.n, spec.k
    total = np.zeros_like(z)
    for j in range(k):
        e = 2 * j + 2 - n
        total += math.comb(k - 1, j) * ((-1.0) ** (k - 1 - j)) * (z**e - 1.0) / e
    return total


def _center_calibration_integral(spec: ProblemSpec, nodes: int = 96) -> float:
    """Integral of s^(2k-1) F(1/s) over (0, 1); the integrand is a polynomial in s."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (t + 1.0)
    weights = 0.5 * w
    vals = s ** (2 * spec.k - 1) * _profile_batch(1.0 / s, spec)
    return float(np.dot(weights, vals))


def boggio_kernel(spec: ProblemSpec, ball: BallDomain | None = None) -> BoggioKernel:
    """Build the kernel, calibrating the constant from the center identity.

    With u = (1 - |y|^2)^k the image f = (-Delta)^k u is a constant
    (produced exactly by the polynomial oracle), and the reproducing
    property at the center forces

        1 = f * K * area(S^{n-1}) * integral_0^1 s^(2k-1) F(1/s) ds,

    which fixes K against a checkable identity instead of a transcription.
    """
    if ball is None:
        ball = BallDomain.unit(spec.n)
    f = polyharmonic(ball_bubble(spec.n, spec.k), spec.k)
    f_const = f.constant_value()
    j = _center_calibration_integral(spec)
    normalization = 1.0 / (f_const * unit_sphere_area(spec.n) * j)
    return BoggioKernel(spec=spec, ball=ball, normalization=normalization)


def _to_unit(x: np.ndarray, kernel: BoggioKernel) -> np.ndarray:
    c = kernel.ball.center_array()
    return (x - c) / kernel.ball.radius


def ball_green(x, y, kernel: BoggioKernel) -> float:
    """Green function value at interior points x != y (0 on the boundary)."""
    spec = kernel.spec
    px = as_point(x, spec)
    py = as_point(y, spec)
    ux, uy = _to_unit(px, kernel), _to_unit(py, kernel)
    sep = float(np.linalg.norm(ux - uy))
    if sep < _DIAGONAL_TOL:
        raise SingularityError("ball_green is singular on the diagonal x = y")
    a = boggio_auxiliary(ux, uy)
    unit_value = kernel.normalization * sep ** spec.decay_exponent * boggio_profile(a, spec)
    return kernel.ball.radius ** spec.decay_exponent * unit_value


def ball_green_batch(x, ys: np.ndarray, kernel: BoggioKernel) -> np.ndarray:
    """Vectorized ``ball_green(x, y)`` over rows of ys; used by the quadratures."""
    spec = kernel.spec
    px = _to_unit(as_point(x, spec), kernel)
    pts = (np.atleast_2d(np.asarray(ys, dtype=float)) - kernel.ball.center_array()) / kernel.ball.radius
    rx2 = float(np.dot(px, px))
    ry2 = np.einsum("ij,ij->i", pts, pts)
    if rx2 > (1.0 + _BOUNDARY_TOL) ** 2 or np.any(ry2 > (1.0 + _BOUNDARY_TOL) ** 2):
        raise DomainError("ball_green_batch arguments must lie in the closed ball")
    seps = np.linalg.norm(pts - px, axis=1)
    if np.any(seps < _DIAGONAL_TOL):
        raise SingularityError("ball_green_batch hit the diagonal x = y")
    bracket = np.sqrt(np.maximum(rx2 * ry2 - 2.0 * pts @ px + 1.0, 0.0))
    a = np.maximum(bracket / seps, 1.0)
    vals = kernel.normalization * seps ** spec.decay_exponent * _profile_batch(a, spec)
    return kernel.ball.radius ** spec.decay_exponent * vals
