"""Series Green function of (-Delta)^k on a concentric annulus a < |y| < b.

Spherical-harmonic decomposition:

    G(x, y) = sum_l  g_l(|x|, |y|) * Z_l(cos angle(x, y)),

where Z_l is the zonal harmonic of degree l and each radial factor g_l
solves a one-dimensional interface problem for the l-th radial
polyharmonic operator.  The mode equation is of Euler type, so its
fundamental system is the pure power family r^gamma; for n > 2k the 2k
indicial exponents are pairwise distinct and no logarithmic solutions
occur.  Gluing the 2k inner and 2k outer coefficients needs k Dirichlet
rows at r=a, k at r=b, continuity of orders 0..2k-2 at the source radius
s, and a jump of the (2k-1)-th derivative equal to (-1)^k / s^(n-1) —
a 4k x 4k linear system per mode.

Conditioning: each power is evaluated relative to an anchor radius chosen
per exponent sign (inner solutions: s for growing powers, a for decaying
ones; outer: b and s), and rows of derivative order m are scaled by the
m-th power of their collocation radius.  All matrix entries are then O(1)
times small falling factorials, and every basis value met during kernel
evaluation lies in [0, 1] so the series can never overflow.

Both the jump normalization and the zonal constants are pinned by the
manufactured-solution representation checks in the test suite, which fail
loudly if either is off by any factor.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass

import numpy as np

from . import numdiff
from .errors import (
    DomainError,
    PreconditionError,
    SingularityError,
    SingularSystemError,
    StencilMarginError,
)
from .geometry import AnnulusDomain, ProblemSpec, as_point, unit_sphere_area

DEFAULT_LMAX = 400
LMAX_ENV = "POLYGREEN_LMAX"
DEFAULT_TOL = 1e-10

_CHUNK = 32
_CONSECUTIVE_SMALL = 3
_COND_LIMIT = 1e13
_FD_STEP_FACTOR = 1e-3
_SERIES_TOL_FLOOR = 5e-15
_CACHE_LIMIT = 40000


def lmax_cap(override: int | None = None) -> int:
    """Mode cap: explicit override, else the POLYGREEN_LMAX env var, else 400."""
    if override is not None:
        return int(override)
    env = os.environ.get(LMAX_ENV)
    return int(env) if env else DEFAULT_LMAX


def indicial_exponents(l: int, spec: ProblemSpec) -> np.ndarray:
    """The 2k indicial roots {l, l+2, ...} and {2-n-l, 4-n-l, ...} of mode l.

    Coincidence across the two chains would force 2l + n <= 2k, impossible
    for n > 2k, so the roots are always pairwise distinct.
    """
    if l < 0:
        raise PreconditionError(f"mode degree must be nonnegative, got {l}")
    n, k = spec.n, spec.k
    pos = [l + 2 * j for j in range(k)]
    neg = [2 - n - l + 2 * j for j in range(k)]
    return np.array(pos + neg, dtype=float)


def _falling(gam: np.ndarray, m: int) -> np.ndarray:
    out = np.ones_like(gam)
    for i in range(m):
        out = out * (gam - i)
    return out


@dataclass(frozen=True)
class ModalGreenKernel:
    """Radial Green factor of one spherical-harmonic degree.

    Coefficients refer to the anchored power basis (t/anchor)^gamma;
    ``inner_anchors`` are valid on (a, s], ``outer_anchors`` on [s, b).
    ``residual`` is the max-norm residual of the row-scaled unit interface
    system, ``condition_estimate`` its 2-norm condition number.
    """

    degree: int
    source_radius: float
    exponents: np.ndarray
    inner_coeffs: np.ndarray
    outer_coeffs: np.ndarray
    inner_anchors: np.ndarray
    outer_anchors: np.ndarray
    residual: float
    condition_estimate: float
    domain: AnnulusDomain

    def radial(self, t: float) -> float:
        """Value g_l(t) of the mode at radius t in [a, b]."""
        if t <= self.source_radius:
            return float(np.sum(self.inner_coeffs * (t / self.inner_anchors) ** self.exponents))
        return float(np.sum(self.outer_coeffs * (t / self.outer_anchors) ** self.exponents))

    def radial_derivative(self, t: float, order: int = 1) -> float:
        """Termwise derivative d^m g_l / dt^m, exact on the power basis."""
        fall = _falling(self.exponents, order)
        if t <= self.source_radius:
            base = (t / self.inner_anchors) ** self.exponents
            return float(np.sum(self.inner_coeffs * fall * base) * t ** (-order))
        base = (t / self.outer_anchors) ** self.exponents
        return float(np.sum(self.outer_coeffs * fall * base) * t ** (-order))


class _ModalBlock:
    """Mode solutions for one (domain, spec, source radius), grown on demand."""

    __slots__ = ("exponents", "inner", "outer", "inner_anchors", "outer_anchors",
                 "residuals", "conditions", "count")

    def __init__(self):
        self.exponents = None
        self.inner = None
        self.outer = None
        self.inner_anchors = None
        self.outer_anchors = None
        self.residuals = None
        self.conditions = None
        self.count = 0


_cache_lock = threading.Lock()
_cache: dict = {}


def clear_mode_cache() -> None:
    with _cache_lock:
        _cache.clear()


def _solve_modes(ls: np.ndarray, s: float, dom: AnnulusDomain, spec: ProblemSpec):
    """Solve the 4k x 4k interface systems for all degrees in ``ls`` at once."""
    n, k = spec.n, spec.k
    a, b = dom.inner, dom.outer
    m = len(ls)
    pos = ls[:, None] + 2.0 * np.arange(k)[None, :]
    neg = (2.0 - n - ls)[:, None] + 2.0 * np.arange(k)[None, :]
    gam = np.concatenate([pos, neg], axis=1)  # (m, 2k)

    anchor_in = np.where(gam >= 0, s, a)
    anchor_out = np.where(gam >= 0, b, s)
    base_a = (a / anchor_in) ** gam
    base_b = (b / anchor_out) ** gam
    base_s_in = (s / anchor_in) ** gam
    base_s_out = (s / anchor_out) ** gam

    size = 4 * k
    mat = np.zeros((m, size, size))
    for j in range(k):
        fall = _falling(gam, j)
        mat[:, j, : 2 * k] = fall * base_a
        mat[:, k + j, 2 * k :] = fall * base_b
    for j in range(2 * k):
        fall = _falling(gam, j)
        row = 2 * k + j
        mat[:, row, : 2 * k] = -fall * base_s_in
        mat[:, row, 2 * k :] = fall * base_s_out

    row_norm = np.abs(mat).max(axis=2)
    mat = mat / row_norm[:, :, None]
    rhs = np.zeros((m, size))
    rhs[:, size - 1] = 1.0 / row_norm[:, size - 1]

    try:
        sol = np.linalg.solve(mat, rhs[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError as exc:  # distinct exponents: signals a bug
        raise SingularSystemError(f"modal interface system is singular: {exc}") from exc

    resid = np.abs(np.einsum("mij,mj->mi", mat, sol) - rhs).max(axis=1)
    sv = np.linalg.svd(mat, compute_uv=False)
    cond = sv[:, 0] / sv[:, -1]
    if np.any(~np.isfinite(cond)) or np.any(cond > _COND_LIMIT):
        raise SingularSystemError(
            "modal interface system is numerically singular",
            condition_estimate=float(np.max(cond)),
        )

    scale = (-1.0) ** k * s ** (2 * k - n)
    inner = sol[:, : 2 * k] * scale
    outer = sol[:, 2 * k :] * scale
    return gam, inner, outer, anchor_in, anchor_out, resid, cond


def _modal_block(dom: AnnulusDomain, spec: ProblemSpec, s: float, upto: int) -> _ModalBlock:
    """Return the cached block for source radius s, grown to >= upto modes."""
    key = (spec.n, spec.k, dom.inner, dom.outer, float(s))
    with _cache_lock:
        if len(_cache) > _CACHE_LIMIT:
            _cache.clear()
        block = _cache.setdefault(key, _ModalBlock())
        if block.count >= upto:
            return block
        start = block.count
        stop = max(upto, start + _CHUNK)
        ls = np.arange(start, stop, dtype=float)
        gam, inner, outer, a_in, a_out, resid, cond = _solve_modes(ls, s, dom, spec)
        if start == 0:
            block.exponents, block.inner, block.outer = gam, inner, outer
            block.inner_anchors, block.outer_anchors = a_in, a_out
            block.residuals, block.conditions = resid, cond
        else:
            block.exponents = np.vstack([block.exponents, gam])
            block.inner = np.vstack([block.inner, inner])
            block.outer = np.vstack([block.outer, outer])
            block.inner_anchors = np.vstack([block.inner_anchors, a_in])
            block.outer_anchors = np.vstack([block.outer_anchors, a_out])
            block.residuals = np.concatenate([block.residuals, resid])
            block.conditions = np.concatenate([block.conditions, cond])
        block.count = stop
        return block


def _radial_values(block: _ModalBlock, lo: int, hi: int, t: float, s: float,
                   derivative: int = 0) -> np.ndarray:
    """g_l(t) (or its termwise t-derivative) for modes lo..hi-1."""
    gam = block.exponents[lo:hi]
    if t <= s:
        coeffs, anchors = block.inner[lo:hi], block.inner_anchors[lo:hi]
    else:
        coeffs, anchors = block.outer[lo:hi], block.outer_anchors[lo:hi]
    base = (t / anchors) ** gam
    if derivative == 0:
        return np.sum(coeffs * base, axis=1)
    fall = _falling(gam, derivative)
    return np.sum(coeffs * fall * base, axis=1) * t ** (-derivative)


def modal_solve(l: int, s: float, dom: AnnulusDomain, spec: ProblemSpec) -> ModalGreenKernel:
    """Solve one mode's interface problem; results are cached per source radius."""
    if not dom.inner < s < dom.outer:
        raise PreconditionError(
            f"source radius {s} outside the open annulus ({dom.inner}, {dom.outer})"
        )
    block = _modal_block(dom, spec, float(s), int(l) + 1)
    return ModalGreenKernel(
        degree=int(l),
        source_radius=float(s),
        exponents=block.exponents[l].copy(),
        inner_coeffs=block.inner[l].copy(),
        outer_coeffs=block.outer[l].copy(),
        inner_anchors=block.inner_anchors[l].copy(),
        outer_anchors=block.outer_anchors[l].copy(),
        residual=float(block.residuals[l]),
        condition_estimate=float(block.conditions[l]),
        domain=dom,
    )


class _ZonalSeries:
    """Zonal values Z_0, Z_1, ... at fixed cosine(s), by the three-term recurrence."""

    def __init__(self, spec: ProblemSpec, t):
        self.lam = (spec.n - 2) / 2.0
        self.norm = 1.0 / ((spec.n - 2) * unit_sphere_area(spec.n))
        self.n = spec.n
        self.t = np.asarray(t, dtype=float)
        self.l = 0
        self.c_prev = None  # C_{l-1}
        self.c_prev2 = None  # C_{l-2}

    def next(self):
        t, lam, l = self.t, self.lam, self.l
        if l == 0:
            c = np.ones_like(t)
        elif l == 1:
            c = 2.0 * lam * t
        else:
            c = (2.0 * t * (l + lam - 1.0) * self.c_prev - (l + 2.0 * lam - 2.0) * self.c_prev2) / l
        self.c_prev2, self.c_prev = self.c_prev, c
        self.l += 1
        return (2 * l + self.n - 2) * self.norm * c


def zonal_harmonic(l: int, t: float, spec: ProblemSpec) -> float:
    """Zonal harmonic Z_l(t) = (2l+n-2)/((n-2) area(S^{n-1})) * C_l^{(n-2)/2}(t)."""
    if l < 0:
        raise PreconditionError(f"degree must be nonnegative, got {l}")
    if abs(t) > 1.0 + 1e-12:
        raise DomainError(f"zonal argument must lie in [-1, 1], got {t}")
    series = _ZonalSeries(spec, min(max(float(t), -1.0), 1.0))
    val = None
    for _ in range(int(l) + 1):
        val = series.next()
    return float(val)


@dataclass(frozen=True)
class GreenEvaluation:
    """Series value with a truncation-error estimate and the mode count used."""

    value: float
    truncation_estimate: float
    modes_used: int

    def __post_init__(self):
        if self.truncation_estimate < 0:
            raise PreconditionError("truncation estimate must be nonnegative")


def _tail_estimate(term_history) -> float:
    """Magnitude of the last included term times a geometric tail factor."""
    mags = [abs(t) for t in term_history if t != 0.0]
    if not mags:
        return 0.0
    last = mags[-1]
    if len(mags) < 2:
        return last
    ratios = [mags[i + 1] / mags[i] for i in range(len(mags) - 1) if mags[i] > 0]
    rho = min(max(float(np.median(ratios)) if ratios else 0.5, 0.0), 0.999)
    return float(last * rho / (1.0 - rho))


def _check_interior(r: float, dom: AnnulusDomain, what: str) -> None:
    if not dom.inner < r < dom.outer:
        raise DomainError(
            f"{what} radius {r} outside the open annulus ({dom.inner}, {dom.outer})"
        )


def _cosine(px: np.ndarray, py: np.ndarray, r: float, s: float) -> float:
    return min(max(float(np.dot(px, py) / (r * s)), -1.0), 1.0)


def annulus_green(x, y, dom: AnnulusDomain, spec: ProblemSpec,
                  tol: float = DEFAULT_TOL, lmax: int | None = None) -> GreenEvaluation:
    """Evaluate G(x, y) by the mode series.

    The sum stops once three consecutive terms fall below tol times the
    running partial sum, and is capped at the mode limit; hitting the cap
    is not an error, it is reported through the truncation estimate.
    """
    px = as_point(x, spec)
    py = as_point(y, spec)
    r = float(np.linalg.norm(px))
    s = float(np.linalg.norm(py))
    _check_interior(r, dom, "x")
    _check_interior(s, dom, "y")
    if float(np.linalg.norm(px - py)) < 1e-14 * dom.outer:
        raise SingularityError("annulus_green is singular on the diagonal x = y")
    tau = _cosine(px, py, r, s)
    cap = lmax_cap(lmax)

    zonal = _ZonalSeries(spec, tau)
    acc = 0.0
    small_run = 0
    history = []
    modes = 0
    for lo in range(0, cap, _CHUNK):
        hi = min(lo + _CHUNK, cap)
        block = _modal_block(dom, spec, s, hi)
        g = _radial_values(block, lo, hi, r, s)
        for i in range(hi - lo):
            term = g[i] * float(zonal.next())
            acc += term
            history.append(term)
            if len(history) > 8:
                history.pop(0)
            if abs(term) <= tol * max(abs(acc), 1e-300):
                small_run += 1
            else:
                small_run = 0
            modes = lo + i + 1
            if small_run >= _CONSECUTIVE_SMALL:
                break
        if small_run >= _CONSECUTIVE_SMALL:
            break
    return GreenEvaluation(
        value=float(acc),
        truncation_estimate=_tail_estimate(history),
        modes_used=modes,
    )


def annulus_green_axis(field_radius: float, source_radii, cosines,
                       dom: AnnulusDomain, spec: ProblemSpec,
                       tol: float = 1e-9, lmax: int | None = None):
    """Batched series values G(r e1, y) on a grid of radii and angle cosines.

    Returns (values, truncation, modes) with values of shape
    (len(source_radii), len(cosines)).  One modal solve per source radius
    is shared across the whole cosine row; stopping is judged on the worst
    column.  This is the workhorse behind the representation-check
    quadratures, where grid rows near the singular corner legitimately hit
    the mode cap and carry a nonzero truncation estimate.
    """
    r = float(field_radius)
    _check_interior(r, dom, "x")
    ss = np.asarray(source_radii, dtype=float)
    tt = np.clip(np.asarray(cosines, dtype=float), -1.0, 1.0)
    cap = lmax_cap(lmax)

    values = np.zeros((len(ss), len(tt)))
    trunc = np.zeros(len(ss))
    modes = np.zeros(len(ss), dtype=int)

    z_rows = []
    z_series = _ZonalSeries(spec, tt)

    for i, s in enumerate(ss):
        _check_interior(float(s), dom, "y")
        acc = np.zeros(len(tt))
        small_run = 0
        history = []
        used = 0
        for lo in range(0, cap, _CHUNK):
            hi = min(lo + _CHUNK, cap)
            while len(z_rows) < hi:
                z_rows.append(z_series.next())
            block = _modal_block(dom, spec, float(s), hi)
            g = _radial_values(block, lo, hi, r, float(s))
            for j in range(hi - lo):
                term_row = g[j] * z_rows[lo + j]
                acc += term_row
                worst = float(np.max(np.abs(term_row) / np.maximum(np.abs(acc), 1e-300)))
                history.append(float(np.max(np.abs(term_row))))
                if len(history) > 8:
                    history.pop(0)
                small_run = small_run + 1 if worst <= tol else 0
                used = lo + j + 1
                if small_run >= _CONSECUTIVE_SMALL:
                    break
            if small_run >= _CONSECUTIVE_SMALL:
                break
        values[i] = acc
        trunc[i] = _tail_estimate(history)
        modes[i] = used
    return values, trunc, modes


def annulus_green_radial_dy(x, y, dom: AnnulusDomain, spec: ProblemSpec,
                            tol: float = DEFAULT_TOL, order: int = 1,
                            lmax: int | None = None) -> float:
    """Termwise d^m/d|y|^m of the series, via the kernel's radial symmetry.

    The mode solve is placed at source radius |x| so the |y| dependence
    sits on the analytic power basis, where termwise differentiation is
    exact.  Used as the analytic cross-check for the finite-difference
    derivatives.
    """
    px = as_point(x, spec)
    py = as_point(y, spec)
    r = float(np.linalg.norm(px))
    s = float(np.linalg.norm(py))
    _check_interior(r, dom, "x")
    _check_interior(s, dom, "y")
    tau = _cosine(px, py, r, s)
    cap = lmax_cap(lmax)

    zonal = _ZonalSeries(spec, tau)
    acc = 0.0
    small_run = 0
    for lo in range(0, cap, _CHUNK):
        hi = min(lo + _CHUNK, cap)
        block = _modal_block(dom, spec, r, hi)
        dg = _radial_values(block, lo, hi, s, r, derivative=order)
        for i in range(hi - lo):
            term = dg[i] * float(zonal.next())
            acc += term
            small_run = small_run + 1 if abs(term) <= tol * max(abs(acc), 1e-300) else 0
            if small_run >= _CONSECUTIVE_SMALL:
                return float(acc)
    return float(acc)


def annulus_green_derivative(x, y, r: int, dom: AnnulusDomain, spec: ProblemSpec,
                             tol: float = DEFAULT_TOL, lmax: int | None = None) -> np.ndarray:
    """All order-r partials in y, shape (n,)*r, by nested central differences.

    Step h = 1e-3 * min(|x-y|, dist(y, boundary)), one Richardson level;
    the series tolerance is tightened to tol * h^r (floored near machine
    precision) so finite-difference cancellation stays benign.
    """
    if not 1 <= r <= 2 * spec.k:
        raise PreconditionError(f"derivative order must satisfy 1 <= r <= 2k, got {r}")
    px = as_point(x, spec)
    py = as_point(y, spec)
    s = float(np.linalg.norm(py))
    _check_interior(float(np.linalg.norm(px)), dom, "x")
    _check_interior(s, dom, "y")
    sep = float(np.linalg.norm(px - py))
    dist = min(s - dom.inner, dom.outer - s)
    h = _FD_STEP_FACTOR * min(sep, dist)
    if h <= 0 or numdiff.stencil_radius(r, h) >= dist:
        raise StencilMarginError(
            f"finite-difference stencil of width {numdiff.stencil_radius(r, h)} "
            f"does not fit inside margin {dist}"
        )
    tol_eff = max(tol * h**r, _SERIES_TOL_FLOOR)

    def f(yy):
        return annulus_green(px, yy, dom, spec, tol=tol_eff, lmax=lmax).value

    return numdiff.derivative_tensor(f, py, r, h)
