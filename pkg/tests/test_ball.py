import math

import numpy as np
import pytest
from scipy.integrate import quad

from polygreen import (
    BallDomain,
    DomainError,
    PreconditionError,
    ProblemSpec,
    SingularityError,
    ball_green,
    boggio_auxiliary,
    boggio_kernel,
    boggio_profile,
    polyharmonic,
    ball_bubble,
)
from polygreen import numdiff
from polygreen.ball import BoggioKernel, ball_green_batch
from polygreen.quadrature import axisymmetric_integral, geometric_edges, refined_edges
from _oracles import axis_point, fundamental_constant, images_green, random_ball_pairs

SPEC31 = ProblemSpec(3, 1)
SPEC52 = ProblemSpec(5, 2)


def test_auxiliary_center():
    y = np.array([0.4, 0.1, 0.0, 0.0, 0.0])
    a = boggio_auxiliary(np.zeros(5), y)
    assert a == pytest.approx(1.0 / np.linalg.norm(y), rel=1e-14)


def test_auxiliary_boundary_limit():
    x = np.array([0.2, 0.1, 0.0])
    y = np.array([0.0, 1.0 - 1e-9, 0.0])
    assert boggio_auxiliary(x, y) == pytest.approx(1.0, abs=1e-8)


def test_auxiliary_specific_value():
    x = axis_point(5, 0.5)
    y = axis_point(5, -0.5)
    # sqrt(|x|^2 |y|^2 - 2 x.y + 1)/|x-y| = sqrt(0.0625 + 0.5 + 1) / 1
    assert boggio_auxiliary(x, y) == pytest.approx(1.25, rel=1e-14)


def test_auxiliary_defect_identity():
    # A^2 - 1 = (1 - |x|^2)(1 - |y|^2) / |x - y|^2 characterizes the ratio.
    rng = np.random.default_rng(8)
    for x, y in random_ball_pairs(rng, 5, 100):
        a = boggio_auxiliary(x, y)
        want = (1 - np.dot(x, x)) * (1 - np.dot(y, y)) / np.dot(x - y, x - y)
        assert a * a - 1.0 == pytest.approx(want, rel=1e-10, abs=1e-13)


def test_auxiliary_at_least_one():
    rng = np.random.default_rng(0)
    for x, y in random_ball_pairs(rng, 5, 200):
        a = boggio_auxiliary(x, y)
        assert a >= 1.0
        assert a == pytest.approx(boggio_auxiliary(y, x), rel=1e-14)


def test_auxiliary_domain_errors():
    with pytest.raises(DomainError):
        boggio_auxiliary(np.array([1.5, 0, 0]), np.array([0.1, 0, 0]))
    with pytest.raises(SingularityError):
        boggio_auxiliary(np.array([0.3, 0, 0]), np.array([0.3, 0, 0]))


def test_profile_empty_integral():
    assert boggio_profile(1.0, SPEC52) == 0.0


def test_profile_k1_closed_form():
    for z in (1.0, 1.5, 3.0, 10.0):
        assert boggio_profile(z, SPEC31) == pytest.approx(1.0 - 1.0 / z, rel=1e-14)


def test_profile_matches_quadrature():
    n, k = 5, 2
    for z in (1.3, 2.0, 7.5):
        want, err = quad(lambda v: (v * v - 1.0) ** (k - 1) * v ** (1 - n), 1.0, z)
        assert err < 1e-8
        assert boggio_profile(z, SPEC52) == pytest.approx(want, abs=1e-12)
    want, _ = quad(lambda v: (v * v - 1.0) ** 2 * v ** (1 - 7), 1.0, 2.0)
    assert boggio_profile(2.0, ProblemSpec(7, 3)) == pytest.approx(want, abs=1e-12)


def test_profile_domain_error():
    with pytest.raises(DomainError):
        boggio_profile(0.5, SPEC31)


def test_normalization_k1_is_images_constant():
    # (n-2) * c_n with c_n the fundamental constant; for n=3 this is 1/(4 pi)
    kernel = boggio_kernel(SPEC31)
    assert kernel.normalization == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-12)
    kernel5 = boggio_kernel(ProblemSpec(5, 1))
    assert kernel5.normalization == pytest.approx(3.0 * fundamental_constant(5), rel=1e-12)


def test_kernel_validation():
    with pytest.raises(PreconditionError):
        BoggioKernel(spec=SPEC31, ball=BallDomain.unit(3), normalization=-1.0)
    with pytest.raises(PreconditionError):
        BoggioKernel(spec=SPEC31, ball=BallDomain.unit(5), normalization=1.0)


@pytest.mark.parametrize("n", [3, 5])
def test_images_oracle_match(n):
    spec = ProblemSpec(n, 1)
    kernel = boggio_kernel(spec)
    rng = np.random.default_rng(42)
    worst = 0.0
    for x, y in random_ball_pairs(rng, n, 100):
        worst = max(worst, abs(ball_green(x, y, kernel) - images_green(x, y, n)))
    assert worst < 1e-10


@pytest.mark.parametrize("n", [3, 5])
def test_two_sided_bound_k1(n):
    spec = ProblemSpec(n, 1)
    kernel = boggio_kernel(spec)
    rng = np.random.default_rng(3)
    cap = fundamental_constant(n)
    count = 0
    while count < 10_000:
        xs = rng.uniform(-1, 1, size=(4096, n))
        ys = rng.uniform(-1, 1, size=(4096, n))
        keep = (np.linalg.norm(xs, axis=1) < 0.98) & (np.linalg.norm(ys, axis=1) < 0.98)
        keep &= np.linalg.norm(xs - ys, axis=1) > 1e-6
        xs, ys = xs[keep], ys[keep]
        for x, y in zip(xs, ys):
            g = ball_green(x, y, kernel)
            sep = np.linalg.norm(x - y)
            assert 0.0 < g < cap * sep ** (2 - n)
            count += 1
            if count == 10_000:
                break
    assert count == 10_000


def test_symmetry_and_positivity_k2():
    kernel = boggio_kernel(SPEC52)
    rng = np.random.default_rng(9)
    for x, y in random_ball_pairs(rng, 5, 200):
        g = ball_green(x, y, kernel)
        assert g > 0.0
        assert g == pytest.approx(ball_green(y, x, kernel), abs=1e-12 * max(1.0, g))


def test_boundary_dirichlet_decay():
    kernel = boggio_kernel(SPEC52)
    x = axis_point(5, 0.3)
    vals = []
    for d in (1e-2, 1e-4, 1e-6):
        y = axis_point(5, -(1.0 - d))
        vals.append(ball_green(x, y, kernel))
    assert vals[0] > vals[1] > vals[2] > 0
    assert vals[2] < 1e-3 * vals[0]


def test_scaling_relation():
    spec = SPEC52
    unit = boggio_kernel(spec)
    R = 2.5
    scaled = boggio_kernel(spec, BallDomain(center=(0.0,) * 5, radius=R))
    rng = np.random.default_rng(4)
    for x, y in random_ball_pairs(rng, 5, 50):
        lhs = ball_green(R * x, R * y, scaled)
        rhs = R ** spec.decay_exponent * ball_green(x, y, unit)
        assert lhs == pytest.approx(rhs, rel=1e-13)


def test_batch_matches_scalar():
    kernel = boggio_kernel(SPEC52)
    rng = np.random.default_rng(6)
    x = axis_point(5, 0.35)
    ys = np.array([y for _, y in random_ball_pairs(rng, 5, 20)])
    batch = ball_green_batch(x, ys, kernel)
    for i in range(len(ys)):
        assert batch[i] == pytest.approx(ball_green(x, ys[i], kernel), rel=1e-13)


def _ball_representation_error(spec, m):
    """Relative error of the reproducing identity for u = (1-|y|^2)^k at x = 0.3 e1."""
    kernel = boggio_kernel(spec)
    u = ball_bubble(spec.n, spec.k)
    f_const = polyharmonic(u, spec.k).constant_value()
    x1 = 0.3
    x = axis_point(spec.n, x1)

    def fn(S, T):
        pts = np.zeros((len(S) * len(T), spec.n))
        ss, tt = np.meshgrid(S, T, indexing="ij")
        pts[:, 0] = (ss * np.cos(tt)).ravel()
        pts[:, 1] = (ss * np.sin(tt)).ravel()
        vals = ball_green_batch(x, pts, kernel)
        return vals.reshape(len(S), len(T)) * f_const

    s_edges = refined_edges(0.0, 1.0, x1, 0.3, levels=6)
    th_edges = geometric_edges(0.0, math.pi, 0.04, levels=6)
    got = axisymmetric_integral(fn, spec.n, s_edges, th_edges, m=m)
    want = u(x)
    return abs(got - want) / abs(want)


def test_representation_identity_k2_n5():
    err_coarse = _ball_representation_error(SPEC52, m=10)
    err_fine = _ball_representation_error(SPEC52, m=20)
    assert err_fine < 1e-3
    assert abs(err_fine - err_coarse) < 1e-4  # node-doubling stability


def _derivative_bound_constant(spec, r, samples, seed):
    kernel = boggio_kernel(spec)
    rng = np.random.default_rng(seed)
    pairs = []
    for i in range(samples // 2):
        sep = (1e-1, 1e-2, 1e-3)[i % 3]
        y = 0.5 * rng.standard_normal(spec.n)
        y *= min(0.6, np.linalg.norm(y)) / np.linalg.norm(y)
        x = y + sep * rng.standard_normal(spec.n) / math.sqrt(spec.n)
        if np.linalg.norm(x) < 0.9:
            pairs.append((x, y))
    pairs += random_ball_pairs(rng, spec.n, samples - len(pairs), radius=0.85, min_sep=1e-2)
    best = 0.0
    for x, y in pairs:
        sep = float(np.linalg.norm(x - y))
        dist = 1.0 - float(np.linalg.norm(y))
        h = 1e-4 * min(sep, dist)
        mag = numdiff.max_abs_derivative(lambda yy: ball_green(x, yy, kernel), y, r, h)
        best = max(best, mag * sep ** (spec.n - 2 * spec.k + r))
    return best


@pytest.mark.parametrize("r", [1, 2])
def test_derivative_bound_fitted_constant_stable(r):
    coarse = _derivative_bound_constant(SPEC52, r, samples=40, seed=12)
    fine = _derivative_bound_constant(SPEC52, r, samples=80, seed=13)
    assert coarse > 0 and fine > 0
    assert 0.8 <= fine / coarse <= 1.25


def test_diagonal_and_domain_errors():
    kernel = boggio_kernel(SPEC52)
    p = axis_point(5, 0.3)
    with pytest.raises(SingularityError):
        ball_green(p, p, kernel)
    with pytest.raises(DomainError):
        ball_green(axis_point(5, 1.2), p, kernel)
