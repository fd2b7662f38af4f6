"""Green function of (-Delta)^k outside a small spherical hole.

The exterior kernel is obtained from a ball kernel by the inversion map:
inversion carries the exterior of the unit sphere onto the punctured unit
ball, so for a spherical hole the inner Green function is again the
closed-form ball kernel and

    G(x, y) = eps^(n-2k) |x|^(2k-n) |y|^(2k-n) G_ball(eps inv(x), eps inv(y)).

The operation accepts any inner ball kernel so a non-spherical inner
Green function could be dropped in later; only the spherical case is
instantiated here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numdiff
from .ball import BoggioKernel, ball_green, ball_green_batch, boggio_kernel
from .errors import DomainError, PreconditionError, SingularityError
from .geometry import ProblemSpec, as_point, invert

_HOLE_TOL = 1e-12
_DIAGONAL_TOL = 1e-14


@dataclass(frozen=True)
class ExteriorKernel:
    """Exterior-of-hole Green kernel with hole radius ``hole_scale``."""

    spec: ProblemSpec
    hole_scale: float
    inner_kernel: BoggioKernel

    def __post_init__(self):
        if not self.hole_scale > 0:
            raise PreconditionError(
                f"hole scale must be positive, got {self.hole_scale}"
            )
        if self.inner_kernel.spec != self.spec:
            raise PreconditionError("inner kernel spec does not match")


def exterior_kernel(spec: ProblemSpec, hole_scale: float = 1.0) -> ExteriorKernel:
    return ExteriorKernel(spec=spec, hole_scale=float(hole_scale), inner_kernel=boggio_kernel(spec))


def _check_outside(p: np.ndarray, eps: float, what: str) -> float:
    r = float(np.linalg.norm(p))
    if r < eps * (1.0 - _HOLE_TOL):
        raise DomainError(f"{what} lies inside the hole of radius {eps}")
    return r


def exterior_green(x, y, kernel: ExteriorKernel) -> float:
    spec = kernel.spec
    eps = kernel.hole_scale
    px = as_point(x, spec)
    py = as_point(y, spec)
    rx = _check_outside(px, eps, "x")
    ry = _check_outside(py, eps, "y")
    if float(np.linalg.norm(px - py)) < _DIAGONAL_TOL * max(rx, ry):
        raise SingularityError("exterior_green is singular on the diagonal x = y")
    pref = eps ** (spec.n - 2 * spec.k) * (rx * ry) ** spec.decay_exponent
    return pref * ball_green(eps * invert(px), eps * invert(py), kernel.inner_kernel)


def exterior_green_batch(x, ys: np.ndarray, kernel: ExteriorKernel) -> np.ndarray:
    """Vectorized exterior_green over rows of ys, for the quadrature checks."""
    spec = kernel.spec
    eps = kernel.hole_scale
    px = as_point(x, spec)
    rx = _check_outside(px, eps, "x")
    pts = np.atleast_2d(np.asarray(ys, dtype=float))
    ry = np.linalg.norm(pts, axis=1)
    if np.any(ry < eps * (1.0 - _HOLE_TOL)):
        raise DomainError("batch point inside the hole")
    inv_pts = eps * pts / (ry**2)[:, None]
    pref = eps ** (spec.n - 2 * spec.k) * (rx * ry) ** spec.decay_exponent
    return pref * ball_green_batch(eps * invert(px), inv_pts, kernel.inner_kernel)


@dataclass(frozen=True)
class SampleGrid:
    """Fixed collection of (x, y) probe pairs with the seed that produced it."""

    xs: np.ndarray
    ys: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        xs = np.atleast_2d(np.asarray(self.xs, dtype=float))
        ys = np.atleast_2d(np.asarray(self.ys, dtype=float))
        if xs.shape != ys.shape:
            raise PreconditionError("xs and ys must have matching shapes")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)

    def __len__(self):
        return self.xs.shape[0]

    @classmethod
    def stratified(
        cls,
        spec: ProblemSpec,
        hole_scale: float,
        count: int = 48,
        seed: int = 0,
    ) -> "SampleGrid":
        """Shell-stratified pairs outside the hole, scaled with the hole size.

        Radii are fixed multiples of the hole scale so that grids built for
        different scales probe the same scaled geometry.
        """
        rng = np.random.default_rng(seed)
        n, eps = spec.n, hole_scale
        x_shells = (1.2, 2.0, 5.0)
        y_shells = (1.05, 1.5, 3.0, 8.0)
        xs, ys = [], []
        for fx in x_shells:
            for fy in y_shells:
                u = _random_direction(rng, n)
                v = _random_direction(rng, n)
                xs.append(eps * fx * u)
                ys.append(eps * fy * v)
        while len(xs) < count:
            rx = eps * rng.uniform(1.05, 10.0)
            ry = eps * rng.uniform(1.05, 10.0)
            u = _random_direction(rng, n)
            v = _random_direction(rng, n)
            if np.linalg.norm(rx * u - ry * v) < 0.05 * eps:
                continue
            xs.append(rx * u)
            ys.append(ry * v)
        return cls(xs=np.array(xs[:count]), ys=np.array(ys[:count]), seed=seed)


def _random_direction(rng, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def derivative_envelope(x, y, i: int, spec: ProblemSpec) -> float:
    """Bound shape |y|^(-i) * sum_{r<=i} |x|^r |x-y|^(2k-n-r) for order-i derivatives."""
    px, py = as_point(x, spec), as_point(y, spec)
    rx, ry = float(np.linalg.norm(px)), float(np.linalg.norm(py))
    sep = float(np.linalg.norm(px - py))
    return ry ** (-i) * sum(rx**r * sep ** (spec.decay_exponent - r) for r in range(i + 1))


def exterior_derivative_bound_check(kernel: ExteriorKernel, i: int, samples: SampleGrid) -> float:
    """Smallest constant C with |grad^i_y G| <= C * envelope over the sample grid.

    Order-i derivatives are taken by finite differences on the assembled
    kernel (never by expanding the inversion chain rule).
    """
    spec = kernel.spec
    if not 0 <= i <= 2 * spec.k:
        raise PreconditionError(f"derivative order must satisfy 0 <= i <= 2k, got {i}")
    eps = kernel.hole_scale
    best = 0.0
    for x, y in zip(samples.xs, samples.ys):
        if i == 0:
            mag = abs(exterior_green(x, y, kernel))
        else:
            sep = float(np.linalg.norm(x - y))
            dist = float(np.linalg.norm(y)) - eps
            h = 1e-3 * min(sep, dist)
            mag = numdiff.max_abs_derivative(
                lambda yy: exterior_green(x, yy, kernel), y, i, h
            )
        best = max(best, mag / derivative_envelope(x, y, i, spec))
    return best
