"""Linear operators with adjoints: dense matrices and a separable banded blur.

The blur operator is the Kronecker product of a banded symmetric Toeplitz
factor with itself, scaled by the Gaussian kernel normalization.  It is never
materialized at full size; applying it to a vector reshapes the vector to an
image (column-major) and multiplies by the factor on both sides.
"""

import math
from typing import NamedTuple

import numpy as np

DENSIFY_GUARD = 10**7


class OpNormEstimate(NamedTuple):
    """Result of the power-iteration spectral estimate of the normal operator."""

    value: float
    iterations: int
    converged: bool


class LinearOperator:
    """A real linear map from R^domain_dim to R^range_dim with an adjoint."""

    domain_dim: int
    range_dim: int

    def apply(self, x):
        raise NotImplementedError

    def apply_adjoint(self, y):
        raise NotImplementedError

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.domain_dim,):
            raise ValueError(
                f"expected a vector of length {self.domain_dim}, got shape {x.shape}"
            )
        return x

    def _check_range(self, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (self.range_dim,):
            raise ValueError(
                f"expected a vector of length {self.range_dim}, got shape {y.shape}"
            )
        return y


class DenseMatrix(LinearOperator):
    """Explicit m-by-n matrix with a positive scalar multiplier applied at evaluation."""

    def __init__(self, entries, scale=1.0):
        entries = np.asarray(entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-d array")
        if not np.all(np.isfinite(entries)):
            raise ValueError("entries must be finite")
        if not scale > 0:
            raise ValueError("scale must be positive")
        self.entries = entries
        self.scale = float(scale)
        self.range_dim, self.domain_dim = entries.shape

    def apply(self, x):
        x = self._check_domain(x)
        return self.scale * (self.entries @ x)

    def apply_adjoint(self, y):
        y = self._check_range(y)
        return self.scale * (self.entries.T @ y)


class KroneckerBlur(LinearOperator):
    """Separable Gaussian blur on n-by-n images, stored through its 1-d factor.

    The factor T is the n-by-n symmetric banded Toeplitz matrix whose first
    row is exp(-j^2 / (2 sigma^2)) for j < band and zero beyond.  The full
    operator is scale * (T kron T) with scale = 1 / (2 pi sigma^2); it acts on
    length n^2 vectors identified with images in column-major order, and it is
    symmetric, so apply and apply_adjoint coincide.
    """

    def __init__(self, n, band, sigma):
        n = int(n)
        band = int(band)
        if n < 1:
            raise ValueError("n must be at least 1")
        if not 1 <= band <= n:
            raise ValueError("band must satisfy 1 <= band <= n")
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.n = n
        self.band = band
        self.sigma = float(sigma)
        self.scale = 1.0 / (2.0 * math.pi * sigma * sigma)
        row = np.zeros(n)
        j = np.arange(band)
        row[:band] = np.exp(-(j.astype(float) ** 2) / (2.0 * sigma * sigma))
        self.toeplitz_first_row = row
        offs = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        self._factor = row[offs]
        self.domain_dim = n * n
        self.range_dim = n * n

    def apply(self, x):
        x = self._check_domain(x)
        image = x.reshape(self.n, self.n, order="F")
        out = self._factor @ image @ self._factor
        return self.scale * out.reshape(-1, order="F")

    def apply_adjoint(self, y):
        return self.apply(y)


class ScaledOperator(LinearOperator):
    """A positive multiple of another operator, used to rescale ill-scaled problems."""

    def __init__(self, inner, factor):
        if not factor > 0:
            raise ValueError("factor must be positive")
        self.inner = inner
        self.factor = float(factor)
        self.domain_dim = inner.domain_dim
        self.range_dim = inner.range_dim

    def apply(self, x):
        return self.factor * self.inner.apply(x)

    def apply_adjoint(self, y):
        return self.factor * self.inner.apply_adjoint(y)


def densify(op):
    """Materialize an operator as a DenseMatrix with the scale folded in.

    Guarded against accidental huge allocations: the product of the
    dimensions must not exceed DENSIFY_GUARD.
    """
    if op.range_dim * op.domain_dim > DENSIFY_GUARD:
        raise ValueError(
            f"refusing to densify a {op.range_dim}x{op.domain_dim} operator "
            f"(guard: {DENSIFY_GUARD} entries)"
        )
    if isinstance(op, DenseMatrix):
        return DenseMatrix(op.scale * op.entries, 1.0)
    if isinstance(op, KroneckerBlur):
        return DenseMatrix(op.scale * np.kron(op._factor, op._factor), 1.0)
    cols = np.empty((op.range_dim, op.domain_dim))
    basis = np.zeros(op.domain_dim)
    for j in range(op.domain_dim):
        basis[j] = 1.0
        cols[:, j] = op.apply(basis)
        basis[j] = 0.0
    return DenseMatrix(cols, 1.0)


def estimate_opnorm_sq(op, max_iters=500, tol=1e-10, seed=0):
    """Estimate the spectral norm of A*A by power iteration.

    Starts from a seeded positive random vector so the estimate is
    deterministic.  Returns an OpNormEstimate; the convergence flag records
    whether the Rayleigh quotient stabilized to within tol relative change.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.1, 1.0, op.domain_dim)
    v /= np.linalg.norm(v)
    estimate = 0.0
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        w = op.apply_adjoint(op.apply(v))
        new_estimate = float(v @ w)
        wnorm = np.linalg.norm(w)
        if wnorm == 0.0:
            return OpNormEstimate(0.0, iters, True)
        if abs(new_estimate - estimate) <= tol * max(abs(new_estimate), 1e-300):
            estimate = new_estimate
            converged = True
            break
        estimate = new_estimate
        v = w / wnorm
    return OpNormEstimate(estimate, iters, converged)


def opnorm_sq_cached(op, **kwargs):
    """Memoized estimate_opnorm_sq value, keyed on the operator instance."""
    cached = getattr(op, "_opnorm_sq_value", None)
    if cached is None:
        cached = estimate_opnorm_sq(op, **kwargs).value
        op._opnorm_sq_value = cached
    return cached


def dump_operator_csv(op, path):
    """Write the densified matrix as CSV, one row per line, full precision."""
    dense = densify(op)
    with open(path, "w") as fh:
        for row in dense.entries:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")
