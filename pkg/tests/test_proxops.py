import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsq.proxops import (
    RadiusSpec,
    half_threshold,
    project_l1_ball_hv,
    project_l1_ball_sort,
    prox_sq_l1,
    psi,
    soft_threshold,
)

vectors = st.lists(
    st.floats(-50.0, 50.0, allow_nan=False), min_size=1, max_size=10
).map(lambda v: np.array(v))


# ---------------------------------------------------------------- thresholds


def test_soft_threshold_example():
    out = soft_threshold(np.array([3.0, -1.0, 0.2]), 0.5)
    assert np.allclose(out, [2.5, -0.5, 0.0])


def test_soft_threshold_zero_t_is_identity():
    x = np.array([1.0, -2.0, 0.0])
    assert np.array_equal(soft_threshold(x, 0.0), x)


def test_soft_threshold_rejects_negative_t():
    with pytest.raises(ValueError):
        soft_threshold(np.ones(2), -0.1)


def _scalar_grid_min(objective, lo, hi, points=20001):
    grid = np.linspace(lo, hi, points)
    vals = objective(grid)
    return grid[np.argmin(vals)], float(np.min(vals))


def test_soft_threshold_is_scalar_prox_of_l1():
    rng = np.random.default_rng(0)
    for _ in range(10):
        a = float(rng.uniform(-4, 4))
        t = float(rng.uniform(0, 2))
        out = float(soft_threshold(np.array([a]), t)[0])
        _, best = _scalar_grid_min(lambda u: 0.5 * (u - a) ** 2 + t * np.abs(u), -5, 5)
        mine = 0.5 * (out - a) ** 2 + t * abs(out)
        assert mine <= best + 1e-7


def test_half_threshold_zero_in_zero_out():
    assert np.array_equal(half_threshold(np.zeros(3), 1.0, 1.0), np.zeros(3))


def test_half_threshold_kills_small_entries():
    lam, step = 0.8, 1.0
    thresh = 1.5 * (lam * step) ** (2.0 / 3.0)
    x = np.array([0.5 * thresh, -0.99 * thresh, thresh])
    assert np.array_equal(half_threshold(x, lam, step), np.zeros(3))


def test_half_threshold_matches_scalar_grid_oracle():
    rng = np.random.default_rng(1)
    for _ in range(12):
        lam = float(rng.uniform(0.05, 1.5))
        step = float(rng.uniform(0.3, 2.0))
        t = lam * step
        a = float(rng.uniform(1.01, 4.0)) * 1.5 * t ** (2.0 / 3.0)
        out = float(half_threshold(np.array([a]), lam, step)[0])

        def objective(u):
            return 0.5 * (u - a) ** 2 + t * np.sqrt(np.abs(u))

        _, best = _scalar_grid_min(objective, -0.5 * a, 1.5 * a, 40001)
        assert objective(np.array([out]))[0] <= best + 1e-7
        # odd symmetry
        out_neg = float(half_threshold(np.array([-a]), lam, step)[0])
        assert out_neg == pytest.approx(-out)


def test_half_threshold_rejects_bad_params():
    with pytest.raises(ValueError):
        half_threshold(np.ones(2), 0.0, 1.0)
    with pytest.raises(ValueError):
        half_threshold(np.ones(2), 1.0, -1.0)


# ----------------------------------------------------------------------- psi


def test_psi_requires_positive_mu():
    with pytest.raises(ValueError):
        psi(0.0, np.ones(2), 0.5)


def test_psi_scalar_root_closed_form():
    a, alpha = 2.0, 0.5
    mu_star = alpha * a**2 / (1 + 2 * alpha) ** 2
    assert psi(mu_star, np.array([a]), alpha) == pytest.approx(0.0, abs=1e-12)


def test_psi_limit_is_minus_one():
    x = np.array([1.0, 2.0])
    assert psi(1e12, x, 0.3) == pytest.approx(-1.0)


def test_psi_nonincreasing():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x = rng.standard_normal(6)
        alpha = float(rng.uniform(0.05, 2.0))
        mus = np.sort(rng.uniform(1e-4, 10.0, size=8))
        vals = [psi(m, x, alpha) for m in mus]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------- prox


def test_prox_zero_input():
    out = prox_sq_l1(np.zeros(4), 0.7)
    assert np.array_equal(out.value, np.zeros(4))
    assert out.mu_star == 0.0


def test_prox_scalar_closed_form():
    out = prox_sq_l1(np.array([2.0, 0.0, 0.0]), 0.5)
    assert np.allclose(out.value, [1.0, 0.0, 0.0], atol=1e-12)


def test_prox_symmetric_closed_form():
    out = prox_sq_l1(np.array([1.0, 1.0]), 0.25)
    assert np.allclose(out.value, [0.5, 0.5], atol=1e-12)


def test_prox_lambda_simplex_property():
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.standard_normal(rng.integers(1, 8))
        alpha = float(rng.uniform(0.01, 5.0))
        out = prox_sq_l1(x, alpha)
        assert np.all(out.lam >= 0)
        assert np.sum(out.lam) == pytest.approx(1.0, abs=1e-9)
        assert np.allclose(out.value, out.lam * x / (out.lam + 2 * alpha))


def test_prox_soft_threshold_reparametrization():
    rng = np.random.default_rng(4)
    for _ in range(50):
        x = rng.standard_normal(rng.integers(1, 8))
        alpha = float(rng.uniform(0.01, 5.0))
        out = prox_sq_l1(x, alpha)
        shrunk = soft_threshold(x, 2.0 * np.sqrt(alpha * out.mu_star))
        assert np.max(np.abs(out.value - shrunk)) <= 1e-10 * max(1.0, np.max(np.abs(x)))


def test_prox_optimality_against_perturbations():
    rng = np.random.default_rng(5)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        x = 3.0 * rng.standard_normal(n)
        alpha = float(rng.uniform(0.02, 3.0))
        out = prox_sq_l1(x, alpha)

        def objective(u):
            return 0.5 * np.sum((u - x) ** 2) + alpha * np.sum(np.abs(u)) ** 2

        base = objective(out.value)
        for scale in (1e-3, 1e-2, 0.1, 1.0):
            perturbed = out.value[None, :] + scale * rng.standard_normal((100, n))
            vals = 0.5 * np.sum((perturbed - x) ** 2, axis=1) + alpha * np.sum(
                np.abs(perturbed), axis=1
            ) ** 2
            assert np.min(vals) >= base - 1e-9


def test_prox_l1_norm_monotone_in_alpha_with_limits():
    rng = np.random.default_rng(6)
    x = rng.standard_normal(8)
    alphas = np.logspace(-4, 3, 15)
    norms = [np.sum(np.abs(prox_sq_l1(x, a).value)) for a in alphas]
    assert all(a >= b - 1e-10 for a, b in zip(norms, norms[1:]))
    l1 = np.sum(np.abs(x))
    assert np.sum(np.abs(prox_sq_l1(x, 1e-8).value)) == pytest.approx(l1, rel=1e-4)
    assert np.sum(np.abs(prox_sq_l1(x, 1e8).value)) <= 1e-3 * l1


def test_prox_rejects_bad_params():
    with pytest.raises(ValueError):
        prox_sq_l1(np.ones(2), 0.0)
    with pytest.raises(ValueError):
        prox_sq_l1(np.ones(2), 1.0, tol=0.0)


# ---------------------------------------------------------------- projection


def test_radius_spec():
    r = RadiusSpec(3.0)
    assert r.radius_sq == 9.0
    assert RadiusSpec.from_sq(9.0).radius_l1 == 3.0
    with pytest.raises(ValueError):
        RadiusSpec(0.0)


def test_project_interior_point_unchanged():
    r = RadiusSpec(1.0)
    x = np.array([0.3, -0.2])
    assert np.array_equal(project_l1_ball_sort(x, r), x)
    assert np.array_equal(project_l1_ball_hv(x, r), x)


def test_project_single_coordinate():
    r = RadiusSpec(1.0)
    out = project_l1_ball_sort(np.array([3.0, 0.0]), r)
    assert np.allclose(out, [1.0, 0.0])
    out_hv = project_l1_ball_hv(np.array([3.0, 0.0]), r, tol=1e-10)
    assert np.allclose(out_hv, [1.0, 0.0], atol=1e-9)


def test_project_shift_example():
    # shift t solves (2 - t) + (1 - t) = 2
    out = project_l1_ball_sort(np.array([2.0, 1.0]), RadiusSpec(2.0))
    assert np.allclose(out, [1.5, 0.5])


def test_projection_routes_agree():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        x = 4.0 * rng.standard_normal(n)
        radius = float(rng.uniform(0.2, 0.9) * max(np.sum(np.abs(x)), 0.5))
        r = RadiusSpec(radius)
        a = project_l1_ball_sort(x, r)
        b = project_l1_ball_hv(x, r, tol=1e-10)
        assert np.max(np.abs(a - b)) <= 1e-8


def test_projection_nonexpansive_both_routes():
    rng = np.random.default_rng(8)
    r = RadiusSpec(1.5)
    for project in (project_l1_ball_sort, lambda x, r: project_l1_ball_hv(x, r, 1e-10)):
        for _ in range(25):
            x = 3.0 * rng.standard_normal(6)
            z = 3.0 * rng.standard_normal(6)
            lhs = np.linalg.norm(project(x, r) - project(z, r))
            assert lhs <= np.linalg.norm(x - z) + 1e-9


def test_projection_variational_characterization():
    rng = np.random.default_rng(9)
    r = RadiusSpec(2.0)
    for _ in range(30):
        x = 5.0 * rng.standard_normal(5)
        px = project_l1_ball_sort(x, r)
        for _ in range(20):
            w = rng.standard_normal(5)
            w = w / max(np.sum(np.abs(w)) / r.radius_l1, 1.0)  # random point in the ball
            assert (w - px) @ (x - px) <= 1e-9


@given(vectors, st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_projection_output_feasible(x, radius):
    out = project_l1_ball_sort(x, RadiusSpec(radius))
    assert np.sum(np.abs(out)) <= radius + 1e-9


@given(vectors, st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_projection_idempotent(x, radius):
    r = RadiusSpec(radius)
    once = project_l1_ball_sort(x, r)
    twice = project_l1_ball_sort(once, r)
    assert np.allclose(once, twice, atol=1e-9)
