"""Fast invariant suite behind the ``verify`` CLI subcommand.

Each check is a named predicate over the core identities: inversion
algebra, ball kernel against its independent oracles, mode algebra,
zonal recurrence identities, a coarse representation check, and the
cutoff profile.  The full-tolerance versions live in the test suite;
this module keeps every check to at most a couple of seconds so the
whole run stays interactive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .annulus import annulus_green, annulus_green_axis, indicial_exponents, modal_solve, zonal_harmonic
from .ball import ball_green, boggio_kernel
from .geometry import (
    AnnulusDomain,
    ProblemSpec,
    invert,
    mobius_distance_check,
    unit_sphere_area,
)
from .polynomials import annulus_bubble, polyharmonic
from .quadrature import axisymmetric_integral, geometric_edges, refined_edges
from .scans import CutoffSpec, cutoff_eval_radial


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _images_green(x: np.ndarray, y: np.ndarray, n: int) -> float:
    # Laplace (k=1) Green function of the unit ball by the reflection construction.
    cn = 1.0 / ((n - 2) * unit_sphere_area(n))
    bracket = math.sqrt(float(np.dot(x, x) * np.dot(y, y) - 2.0 * np.dot(x, y) + 1.0))
    return cn * (float(np.linalg.norm(x - y)) ** (2 - n) - bracket ** (2 - n))


def _random_ball_pairs(rng, n: int, count: int, radius: float = 0.95):
    pts = []
    while len(pts) < 2 * count:
        p = rng.uniform(-1.0, 1.0, size=n)
        if np.linalg.norm(p) < radius:
            pts.append(p)
    xs, ys = pts[:count], pts[count:]
    return [(x, y) for x, y in zip(xs, ys) if np.linalg.norm(x - y) > 1e-3]


def check_mobius(spec: ProblemSpec, count: int = 200, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_inv = worst_dist = 0.0
    for _ in range(count):
        x = rng.uniform(-2, 2, size=spec.n)
        y = rng.uniform(-2, 2, size=spec.n)
        if min(np.linalg.norm(x), np.linalg.norm(y)) < 1e-3 or np.linalg.norm(x - y) < 1e-6:
            continue
        worst_inv = max(worst_inv, float(np.linalg.norm(invert(invert(x)) - x)))
        lhs, rhs = mobius_distance_check(x, y)
        worst_dist = max(worst_dist, abs(lhs - rhs))
    ok = worst_inv < 1e-12 and worst_dist < 1e-12
    return CheckResult("mobius-identities", ok,
                       f"involution err {worst_inv:.2e}, distance identity err {worst_dist:.2e}")


def check_ball_oracle(spec: ProblemSpec, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    kernel = boggio_kernel(spec)
    pairs = _random_ball_pairs(rng, spec.n, 60)
    if spec.k == 1:
        worst = max(abs(ball_green(x, y, kernel) - _images_green(x, y, spec.n))
                    for x, y in pairs)
        ok = worst < 1e-10
        return CheckResult("ball-images-oracle", ok, f"max deviation {worst:.2e}")
    worst_sym = max(abs(ball_green(x, y, kernel) - ball_green(y, x, kernel))
                    for x, y in pairs)
    positive = all(ball_green(x, y, kernel) > 0 for x, y in pairs)
    ok = worst_sym < 1e-12 and positive
    return CheckResult("ball-symmetry-positivity", ok,
                       f"symmetry err {worst_sym:.2e}, positive={positive}")


def check_indicial(spec: ProblemSpec, lmax: int = 400) -> CheckResult:
    for l in range(lmax + 1):
        ex = indicial_exponents(l, spec)
        if len(set(ex.tolist())) != 2 * spec.k:
            return CheckResult("indicial-distinct", False, f"coincidence at degree {l}")
    return CheckResult("indicial-distinct", True, f"2k distinct roots for all degrees <= {lmax}")


def check_modal(spec: ProblemSpec) -> CheckResult:
    dom = AnnulusDomain(0.25, 1.0)
    worst_res = worst_bc = worst_sym = 0.0
    for l in (0, 1, 3):
        for s in (0.4, 0.7):
            m = modal_solve(l, s, dom, spec)
            worst_res = max(worst_res, m.residual)
            for order in range(spec.k):
                worst_bc = max(worst_bc, abs(m.radial_derivative(dom.inner, order)
                                             if order else m.radial(dom.inner)))
                worst_bc = max(worst_bc, abs(m.radial_derivative(dom.outer, order)
                                             if order else m.radial(dom.outer)))
        a = modal_solve(l, 0.62, dom, spec).radial(0.33)
        b = modal_solve(l, 0.33, dom, spec).radial(0.62)
        worst_sym = max(worst_sym, abs(a - b) / max(abs(a), 1e-300))
    ok = worst_res < 1e-9 and worst_bc < 1e-9 and worst_sym < 1e-9
    return CheckResult("modal-interface", ok,
                       f"residual {worst_res:.2e}, boundary rows {worst_bc:.2e}, "
                       f"symmetry {worst_sym:.2e}")


def check_zonal(spec: ProblemSpec) -> CheckResult:
    lam = (spec.n - 2) / 2.0
    u, t = 0.5, 0.3
    series = sum(zonal_harmonic(l, t, spec) * (spec.n - 2) * unit_sphere_area(spec.n)
                 / (2 * l + spec.n - 2) * u**l for l in range(61))
    gen = (1 - 2 * t * u + u * u) ** (-lam)
    err = abs(series - gen) / abs(gen)
    ok = err < 1e-10
    return CheckResult("gegenbauer-generating-function", ok, f"relative err {err:.2e}")


def check_representation(spec: ProblemSpec) -> CheckResult:
    # Coarse manufactured-solution check on the annulus; the converged
    # version (and the unit-ball one) live in the acceptance tests.
    a, b = 0.25, 1.0
    dom = AnnulusDomain(a, b)
    u = annulus_bubble(spec.n, spec.k, a, b)
    f = polyharmonic(u, spec.k)
    x1 = 0.5 * (a + b)

    def fn(S, T):
        vals, _, _ = annulus_green_axis(x1, S, np.cos(T), dom, spec, tol=1e-8)
        return vals * f(np.stack([S] + [np.zeros_like(S)] * (spec.n - 1), axis=1))[:, None]

    s_edges = refined_edges(a, b, x1, 0.25 * (b - a), levels=5)
    th_edges = geometric_edges(0.0, math.pi, 0.05, levels=5)
    got = axisymmetric_integral(fn, spec.n, s_edges, th_edges, m=12)
    want = u(np.array([x1] + [0.0] * (spec.n - 1)))
    err = abs(got - want) / abs(want)
    ok = err < 5e-3
    return CheckResult("representation-identity", ok,
                       f"relative err {err:.2e} (coarse quadrature)")


def check_green_bound(spec: ProblemSpec, seed: int = 3) -> CheckResult:
    # k = 1 carries the clean two-sided bound; higher k checks symmetry of the series.
    rng = np.random.default_rng(seed)
    dom = AnnulusDomain(0.2, 1.0)
    cap = 1.0 / ((spec.n - 2) * unit_sphere_area(spec.n))
    worst_sym = 0.0
    violations = 0
    for _ in range(40):
        x = rng.standard_normal(spec.n)
        x *= rng.uniform(0.25, 0.95) / np.linalg.norm(x)
        y = rng.standard_normal(spec.n)
        y *= rng.uniform(0.25, 0.95) / np.linalg.norm(y)
        if np.linalg.norm(x - y) < 5e-2:
            continue
        gv = annulus_green(x, y, dom, spec, tol=1e-9)
        hv = annulus_green(y, x, dom, spec, tol=1e-9)
        tolerance = max(1e-9, 10 * max(gv.truncation_estimate, hv.truncation_estimate))
        worst_sym = max(worst_sym, abs(gv.value - hv.value) / max(tolerance, 1e-300) * 1e-9)
        if spec.k == 1:
            sep = float(np.linalg.norm(x - y))
            if not 0.0 < gv.value < cap * sep ** spec.decay_exponent:
                violations += 1
    ok = violations == 0
    name = "fundamental-bound" if spec.k == 1 else "series-symmetry"
    return CheckResult(name, ok, f"violations={violations}, symmetry scale {worst_sym:.2e}")


def check_cutoff(spec: ProblemSpec) -> CheckResult:
    cut = CutoffSpec(delta=0.15, k=spec.k)
    vals = (cutoff_eval_radial(0.075, cut), cutoff_eval_radial(0.45, cut),
            cutoff_eval_radial(0.225, cut))
    ok = vals[0] == 1.0 and vals[1] == 0.0 and abs(vals[2] - 0.5) < 1e-12
    return CheckResult("cutoff-profile", ok, f"values at (delta/2, 3delta, 1.5delta) = {vals}")


def run_verify(spec: ProblemSpec, seed: int = 0):
    checks = [
        check_mobius(spec, seed=seed),
        check_ball_oracle(spec, seed=seed + 1),
        check_indicial(spec),
        check_modal(spec),
        check_zonal(spec),
        check_representation(spec),
        check_green_bound(spec, seed=seed + 3),
        check_cutoff(spec),
    ]
    return checks, all(c.passed for c in checks)
