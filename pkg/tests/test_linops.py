import numpy as np
import pytest

from sparsq.linops import (
    DenseMatrix,
    KroneckerBlur,
    ScaledOperator,
    densify,
    dump_operator_csv,
    estimate_opnorm_sq,
)


def test_dense_identity_apply():
    op = DenseMatrix(np.eye(2))
    assert np.array_equal(op.apply([1.0, 2.0]), [1.0, 2.0])


def test_dense_adjoint_is_transpose():
    op = DenseMatrix([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(op.apply_adjoint([1.0, 0.0]), [0.0, 1.0])


def test_dense_scale_applied_at_evaluation():
    op = DenseMatrix(np.eye(3), scale=2.5)
    assert np.allclose(op.apply([1.0, -1.0, 0.0]), [2.5, -2.5, 0.0])


def test_dense_dimension_mismatch():
    op = DenseMatrix(np.ones((3, 2)))
    with pytest.raises(ValueError):
        op.apply([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        op.apply_adjoint([1.0, 2.0])


def test_dense_rejects_bad_inputs():
    with pytest.raises(ValueError):
        DenseMatrix([[np.inf, 0.0]])
    with pytest.raises(ValueError):
        DenseMatrix(np.eye(2), scale=0.0)


def test_adjoint_identity_random_dense():
    rng = np.random.default_rng(7)
    op = DenseMatrix(rng.standard_normal((5, 3)), scale=0.7)
    for _ in range(100):
        x = rng.standard_normal(3)
        y = rng.standard_normal(5)
        lhs = op.apply(x) @ y
        rhs = x @ op.apply_adjoint(y)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_adjoint_identity_blur():
    rng = np.random.default_rng(8)
    op = KroneckerBlur(16, 3, 0.7)
    for _ in range(100):
        x = rng.standard_normal(256)
        y = rng.standard_normal(256)
        lhs = op.apply(x) @ y
        rhs = x @ op.apply_adjoint(y)
        assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)


def test_blur_band_one_is_scaled_identity():
    sigma = 1.3
    op = KroneckerBlur(4, 1, sigma)
    x = np.arange(16.0)
    assert np.allclose(op.apply(x), x / (2.0 * np.pi * sigma**2), atol=1e-15)


def test_blur_self_adjoint():
    op = KroneckerBlur(5, 2, 0.9)
    x = np.random.default_rng(0).standard_normal(25)
    assert np.array_equal(op.apply(x), op.apply_adjoint(x))


def test_blur_first_row_definition():
    op = KroneckerBlur(6, 3, 0.7)
    expected = np.zeros(6)
    expected[:3] = np.exp(-np.arange(3.0) ** 2 / (2 * 0.7**2))
    assert np.allclose(op.toeplitz_first_row, expected)


def test_blur_matches_explicit_kronecker_product():
    # densify oracle: build T kron T by hand and compare columns
    op = KroneckerBlur(3, 2, 0.7)
    row = op.toeplitz_first_row
    T = np.array([[row[abs(i - j)] for j in range(3)] for i in range(3)])
    full = op.scale * np.kron(T, T)
    e1 = np.zeros(9)
    e1[0] = 1.0
    assert np.allclose(op.apply(e1), full[:, 0], atol=1e-14)
    dense = densify(op)
    assert np.allclose(dense.entries, full, atol=1e-14)


@pytest.mark.parametrize("n", [2, 5, 16])
def test_blur_apply_matches_densify(n):
    op = KroneckerBlur(n, min(3, n), 0.7)
    dense = densify(op)
    rng = np.random.default_rng(n)
    for _ in range(5):
        x = rng.standard_normal(n * n)
        assert np.max(np.abs(op.apply(x) - dense.apply(x))) <= 1e-12


def test_densify_blur_band_one():
    op = KroneckerBlur(2, 1, 0.5)
    dense = densify(op)
    assert np.allclose(dense.entries, op.scale * np.eye(4))


def test_densify_dense_folds_scale():
    op = DenseMatrix(np.diag([2.0, 3.0]), scale=2.0)
    dense = densify(op)
    assert dense.scale == 1.0
    assert np.allclose(dense.entries, np.diag([4.0, 6.0]))


def test_densify_guard():
    op = KroneckerBlur(60, 3, 0.7)  # (60^2)^2 > 1e7 entries
    with pytest.raises(ValueError):
        densify(op)


def test_densify_generic_fallback():
    inner = DenseMatrix(np.arange(6.0).reshape(2, 3))
    op = ScaledOperator(inner, 0.5)
    dense = densify(op)
    assert np.allclose(dense.entries, 0.5 * inner.entries)


def test_opnorm_diag():
    op = DenseMatrix(np.diag([3.0, 1.0]))
    est = estimate_opnorm_sq(op, max_iters=500, tol=1e-12)
    assert est.converged
    assert abs(est.value - 9.0) <= 1e-8


def test_opnorm_identity():
    est = estimate_opnorm_sq(DenseMatrix(np.eye(4)), max_iters=50, tol=1e-12)
    assert abs(est.value - 1.0) <= 1e-12


def test_opnorm_blur_near_one():
    est = estimate_opnorm_sq(KroneckerBlur(16, 3, 0.7), max_iters=2000, tol=1e-12)
    assert 0.8 <= est.value <= 1.2


def test_opnorm_matches_dense_svd_within_one_percent():
    rng = np.random.default_rng(3)
    for trial in range(4):
        op = DenseMatrix(rng.standard_normal((8, 12)))
        est = estimate_opnorm_sq(op, max_iters=5000, tol=1e-13, seed=trial)
        exact = np.linalg.svd(op.entries, compute_uv=False)[0] ** 2
        assert abs(est.value - exact) <= 0.01 * exact


def test_opnorm_deterministic():
    op = DenseMatrix(np.random.default_rng(5).standard_normal((6, 6)))
    a = estimate_opnorm_sq(op, max_iters=100, tol=1e-10, seed=42)
    b = estimate_opnorm_sq(op, max_iters=100, tol=1e-10, seed=42)
    assert a == b


def test_opnorm_zero_operator():
    est = estimate_opnorm_sq(DenseMatrix(np.zeros((3, 3))), max_iters=10, tol=1e-8)
    assert est.value == 0.0 and est.converged


def test_dump_operator_csv_roundtrip(tmp_path):
    op = DenseMatrix(np.random.default_rng(11).standard_normal((4, 3)), scale=1.5)
    path = tmp_path / "op.csv"
    dump_operator_csv(op, path)
    back = np.loadtxt(path, delimiter=",")
    assert np.array_equal(back, 1.5 * op.entries)
