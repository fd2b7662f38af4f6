import math

import numpy as np
import pytest
import sympy

from polygreen import (
    AnnulusDomain,
    DomainError,
    PreconditionError,
    ProblemSpec,
    SingularityError,
    annulus_bubble,
    annulus_green,
    annulus_green_derivative,
    annulus_green_radial_dy,
    indicial_exponents,
    modal_solve,
    polyharmonic,
    unit_sphere_area,
    zonal_harmonic,
)
from polygreen.annulus import annulus_green_axis, lmax_cap
from polygreen.polynomials import Polynomial
from polygreen.quadrature import axisymmetric_integral, geometric_edges, refined_edges
from _oracles import axis_point, fundamental_constant, random_annulus_point

SPEC31 = ProblemSpec(3, 1)
SPEC52 = ProblemSpec(5, 2)
DOM = AnnulusDomain(0.25, 1.0)


# ---------------------------------------------------------------- indicial

def test_indicial_examples():
    assert sorted(indicial_exponents(0, SPEC31).tolist()) == [-1.0, 0.0]
    assert sorted(indicial_exponents(0, SPEC52).tolist()) == [-3.0, -1.0, 0.0, 2.0]
    assert sorted(indicial_exponents(1, SPEC52).tolist()) == [-4.0, -2.0, 1.0, 3.0]


@pytest.mark.parametrize("n,k,degrees", [(3, 1, (0, 1, 2)), (5, 2, (0, 1, 3)), (7, 3, (0, 2))])
def test_indicial_symbolic_oracle(n, k, degrees):
    # Apply the radial mode operator k times to r^gamma and require exact zero.
    r, g = sympy.symbols("r gamma")
    for l in degrees:
        spec = ProblemSpec(n, k)
        for gamma in indicial_exponents(l, spec):
            expr = r ** sympy.Integer(int(gamma))
            for _ in range(k):
                expr = sympy.diff(expr, r, 2) + (n - 1) / r * sympy.diff(expr, r) \
                    - l * (l + n - 2) / r**2 * expr
                expr = sympy.simplify(expr)
            assert sympy.simplify(expr) == 0


@pytest.mark.parametrize("spec", [SPEC31, SPEC52, ProblemSpec(7, 3)])
def test_indicial_distinct_exhaustive(spec):
    for l in range(lmax_cap() + 1):
        ex = indicial_exponents(l, spec)
        assert len(set(ex.tolist())) == 2 * spec.k


def test_indicial_rejects_negative_degree():
    with pytest.raises(PreconditionError):
        indicial_exponents(-1, SPEC31)


# ---------------------------------------------------------------- modal solve

def test_modal_closed_form_k1n3():
    # g_0(r, s) = (min - a)(b - max) / (r s (b - a)), solvable by hand.
    a, b = DOM.inner, DOM.outer
    for (r, s) in [(0.3, 0.7), (0.8, 0.35), (0.5, 0.55)]:
        kernel = modal_solve(0, s, DOM, SPEC31)
        lo, hi = min(r, s), max(r, s)
        want = (lo - a) * (b - hi) / (r * s * (b - a))
        assert kernel.radial(r) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("spec", [SPEC31, SPEC52])
@pytest.mark.parametrize("l", [0, 1, 4])
def test_modal_boundary_rows(spec, l):
    kernel = modal_solve(l, 0.6, DOM, spec)
    assert kernel.residual < 1e-9
    for order in range(spec.k):
        for edge in (DOM.inner, DOM.outer):
            val = kernel.radial(edge) if order == 0 else kernel.radial_derivative(edge, order)
            assert abs(val) < 1e-9


@pytest.mark.parametrize("spec", [SPEC31, SPEC52])
def test_modal_continuity_and_jump(spec):
    s = 0.45
    kernel = modal_solve(2, s, DOM, spec)
    eps = 1e-9 * s

    def one_sided(order, side):
        t = s * (1 + side * 1e-12)
        return kernel.radial_derivative(t, order) if order else kernel.radial(t)

    for order in range(2 * spec.k - 1):
        below = kernel.radial_derivative(s * (1 - 1e-12), order) if order else kernel.radial(s * (1 - 1e-12))
        above = kernel.radial_derivative(s * (1 + 1e-12), order) if order else kernel.radial(s * (1 + 1e-12))
        scale = max(abs(below), abs(above), 1e-30)
        assert abs(above - below) / scale < 1e-6

    jump = (kernel.radial_derivative(s * (1 + 1e-14), 2 * spec.k - 1)
            - kernel.radial_derivative(s * (1 - 1e-14), 2 * spec.k - 1))
    want = (-1.0) ** spec.k / s ** (spec.n - 1)
    assert jump == pytest.approx(want, rel=1e-8)


@pytest.mark.parametrize("spec", [SPEC31, SPEC52])
def test_modal_symmetry(spec):
    rng = np.random.default_rng(14)
    for _ in range(20):
        r = rng.uniform(0.27, 0.98)
        s = rng.uniform(0.27, 0.98)
        if abs(r - s) < 1e-3:
            continue
        for l in (0, 1, 3):
            one = modal_solve(l, s, DOM, spec).radial(r)
            two = modal_solve(l, r, DOM, spec).radial(s)
            assert one == pytest.approx(two, rel=1e-9, abs=1e-14)


def test_modal_source_radius_validated():
    with pytest.raises(PreconditionError):
        modal_solve(0, 0.2, DOM, SPEC31)


def test_modal_condition_recorded():
    kernel = modal_solve(50, 0.5, DOM, SPEC52)
    assert 1.0 <= kernel.condition_estimate < 1e13


# ---------------------------------------------------------------- zonal

def test_zonal_constant_mode():
    assert zonal_harmonic(0, 0.3, SPEC52) == pytest.approx(3.0 / (8 * math.pi**2), rel=1e-14)
    assert zonal_harmonic(0, -0.9, SPEC31) == pytest.approx(1.0 / (4 * math.pi), rel=1e-14)


def test_zonal_domain_error():
    with pytest.raises(DomainError):
        zonal_harmonic(3, 1.1, SPEC52)
    with pytest.raises(PreconditionError):
        zonal_harmonic(-2, 0.5, SPEC52)


def test_gegenbauer_generating_function():
    lam = 1.5
    u, t, L = 0.5, 0.3, 60
    om = unit_sphere_area(5)
    total = 0.0
    for l in range(L + 1):
        c = zonal_harmonic(l, t, SPEC52) * (5 - 2) * om / (2 * l + 5 - 2)
        total += c * u**l
    want = (1 - 2 * t * u + u * u) ** (-lam)
    assert abs(total - want) < 1e-10


def test_free_space_expansion():
    # sum_l s^l / r^(l+n-2) C_l(t) = |x - y|^(2-n) for r > s.
    n = 5
    r, s, t = 2.0, 0.5, 0.3
    om = unit_sphere_area(n)
    total = 0.0
    for l in range(61):
        c = zonal_harmonic(l, t, SPEC52) * (n - 2) * om / (2 * l + n - 2)
        total += c * s**l / r ** (l + n - 2)
    sep = math.sqrt(r * r + s * s - 2 * r * s * t)
    assert abs(total - sep ** (2 - n)) < 1e-10


# ---------------------------------------------------------------- series

def test_series_approaches_ball_kernel_as_hole_shrinks():
    # k = 1, n = 3: a point hole is removable, so for a tiny inner radius the
    # series must land on the closed-form ball kernel (reflection oracle,
    # rescaled to radius R).  This pins the jump and zonal normalizations
    # against an independent construction.
    from _oracles import images_green

    spec = SPEC31
    R = 60.0
    dom = AnnulusDomain(1e-5, R)
    x = axis_point(3, 1.0)
    y = np.array([0.0, 1.3, 0.0])
    got = annulus_green(x, y, dom, spec, tol=1e-12)
    want = R ** (2 - 3) * images_green(x / R, y / R, 3)
    assert got.value == pytest.approx(want, rel=2e-4)


def test_series_symmetry():
    rng = np.random.default_rng(3)
    for spec in (SPEC31, SPEC52):
        for _ in range(20):
            x = random_annulus_point(rng, spec.n, 0.27, 0.97)
            y = random_annulus_point(rng, spec.n, 0.27, 0.97)
            if np.linalg.norm(x - y) < 0.05:
                continue
            g = annulus_green(x, y, DOM, spec)
            h = annulus_green(y, x, DOM, spec)
            tol = max(1e-9, 10 * max(g.truncation_estimate, h.truncation_estimate))
            assert abs(g.value - h.value) <= tol


def test_k1_positivity_and_upper_bound_bulk():
    spec = SPEC31
    rng = np.random.default_rng(8)
    cap = fundamental_constant(3)
    checked = 0
    while checked < 10_000:
        x = random_annulus_point(rng, 3, 0.26, 0.98)
        y = random_annulus_point(rng, 3, 0.26, 0.98)
        sep = float(np.linalg.norm(x - y))
        if sep < 1e-2:
            continue
        val = annulus_green(x, y, DOM, spec, tol=1e-7).value
        assert 0.0 < val < cap * sep ** (2 - 3)
        checked += 1


def test_boundary_vanishing_order():
    # log-log slope of G against dist(y, boundary) approaches k at both shells.
    for spec, slope_want in ((SPEC31, 1.0), (SPEC52, 2.0)):
        x = axis_point(spec.n, 0.55)
        dists = np.array([3e-2, 1e-2, 3e-3, 1e-3])
        for edge, sign in ((DOM.inner, +1), (DOM.outer, -1)):
            vals = []
            for d in dists:
                y = axis_point(spec.n, -(edge + sign * d))
                vals.append(abs(annulus_green(x, y, DOM, spec).value))
            slope = np.polyfit(np.log(dists), np.log(vals), 1)[0]
            assert slope == pytest.approx(slope_want, rel=0.1)


def test_mode_decay_geometric():
    # Colinear probe pairs: the cleanest monotone regime, and the slowest
    # converging direction (no zonal oscillation masking the envelope).
    for spec in (SPEC31, SPEC52):
        for (r, s, tau) in [(0.5, 0.35, 1.0), (0.5, 0.35, -1.0), (0.8, 0.45, 1.0)]:
            terms = []
            for l in range(41):
                g = modal_solve(l, s, DOM, spec).radial(r)
                terms.append(g * zonal_harmonic(l, tau, spec))
            mags = [abs(t) for t in terms if t != 0.0]
            ratios = [mags[i + 1] / mags[i] for i in range(10, len(mags) - 1)]
            assert max(ratios) < 0.95


def test_degenerate_equal_radii_flagged():
    # x, y on the same sphere: the series oscillates without decay and the
    # evaluation must come back capped and flagged, not raise.
    ev = annulus_green(axis_point(3, 0.5), -axis_point(3, 0.5), DOM, SPEC31, tol=1e-10)
    assert ev.modes_used == lmax_cap()
    assert ev.truncation_estimate > 0
    assert math.isfinite(ev.value)


def test_domain_and_diagonal_errors():
    x = axis_point(3, 0.5)
    with pytest.raises(DomainError):
        annulus_green(axis_point(3, 0.2), x, DOM, SPEC31)
    with pytest.raises(DomainError):
        annulus_green(x, axis_point(3, 1.2), DOM, SPEC31)
    with pytest.raises(SingularityError):
        annulus_green(x, x, DOM, SPEC31)


def test_lmax_env_override(monkeypatch):
    monkeypatch.setenv("POLYGREEN_LMAX", "37")
    assert lmax_cap() == 37
    ev = annulus_green(axis_point(3, 0.5), -axis_point(3, 0.5), DOM, SPEC31)
    assert ev.modes_used == 37
    monkeypatch.delenv("POLYGREEN_LMAX")
    assert lmax_cap() == 400


# ---------------------------------------------------------------- representation

def _annulus_representation_error(spec, u, m, tol=1e-9):
    f = polyharmonic(u, spec.k)
    a, b = DOM.inner, DOM.outer
    x1 = 0.5 * (a + b)
    x = axis_point(spec.n, x1)

    def fn(S, T):
        vals, _, _ = annulus_green_axis(x1, S, np.cos(T), DOM, spec, tol=tol)
        pts = np.zeros((len(S) * len(T), spec.n))
        ss, tt = np.meshgrid(S, T, indexing="ij")
        pts[:, 0] = (ss * np.cos(tt)).ravel()
        pts[:, 1] = (ss * np.sin(tt)).ravel()
        fv = f(pts).reshape(len(S), len(T))
        return vals * fv

    s_edges = refined_edges(a, b, x1, 0.2, levels=6)
    th_edges = geometric_edges(0.0, math.pi, 0.04, levels=6)
    got = axisymmetric_integral(fn, spec.n, s_edges, th_edges, m=m)
    want = u(x)
    return abs(got - want) / abs(want)


def test_representation_radial_k1n3():
    u = annulus_bubble(3, 1, DOM.inner, DOM.outer)
    assert _annulus_representation_error(SPEC31, u, m=18) < 1e-4


def test_representation_radial_k2n5():
    u = annulus_bubble(5, 2, DOM.inner, DOM.outer)
    assert _annulus_representation_error(SPEC52, u, m=18) < 1e-3


def test_representation_angular_k2n5():
    u = annulus_bubble(5, 2, DOM.inner, DOM.outer) * Polynomial.coordinate(5, 0)
    assert _annulus_representation_error(SPEC52, u, m=18) < 1e-3


# ---------------------------------------------------------------- derivatives

def test_radial_derivative_matches_termwise():
    x = axis_point(5, 0.6)
    y = axis_point(5, 0.35)
    grad = annulus_green_derivative(x, y, 1, DOM, SPEC52)
    termwise = annulus_green_radial_dy(x, y, DOM, SPEC52)
    # at colinear points the y-gradient is radial, so component 0 carries it all
    assert grad[0] == pytest.approx(termwise, rel=1e-6)


def test_gradient_axial_symmetry():
    x = axis_point(5, 0.6)
    y = np.array([0.3, 0.25, 0.0, 0.0, 0.0])
    grad = annulus_green_derivative(x, y, 1, DOM, SPEC52)
    scale = np.abs(grad).max()
    assert abs(grad[2]) < 1e-8 * scale
    assert abs(grad[3]) < 1e-8 * scale
    assert abs(grad[4]) < 1e-8 * scale


def test_hessian_trace_harmonicity_k1():
    # k = 1: Delta_y G = 0 away from x, so the Hessian trace vanishes
    # relative to the Hessian magnitude.
    for (xv, yv) in [((0.6, 0.0, 0.0), (0.35, 0.1, 0.0)), ((0.5, 0.2, 0.0), (-0.4, 0.3, 0.2))]:
        x = np.array(xv)
        y = np.array(yv)
        hess = annulus_green_derivative(x, y, 2, DOM, SPEC31)
        trace = abs(np.trace(hess))
        assert trace < 1e-6 * np.abs(hess).max()


def test_derivative_validation():
    x = axis_point(3, 0.5)
    y = axis_point(3, 0.6)
    with pytest.raises(PreconditionError):
        annulus_green_derivative(x, y, 0, DOM, SPEC31)
    with pytest.raises(PreconditionError):
        annulus_green_derivative(x, y, 3, DOM, SPEC31)
