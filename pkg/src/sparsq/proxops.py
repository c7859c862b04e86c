"""Thresholding, proximal, and projection operators.

The central primitive is the proximal operator of alpha * ||.||_1^2.  Its
value at x is a coordinatewise rescaling x_i -> lambda_i x_i / (lambda_i + 2 alpha)
where the weights lambda_i come from the positive root mu* of the scalar
function psi below.  psi is continuous and nonincreasing on (0, inf), tends to
+inf as mu -> 0 for x != 0, and equals -1 once mu is large enough that every
bracket vanishes, so a sign-change bisection is robust.

Two l1-ball projections are provided.  The sort-based one is the exact
O(n log n) method and is used on solver hot paths; the prox-based one obtains
the projection by tuning alpha until the prox output has the requested l1
norm, and exists as an independent cross-check of the first.
"""

from dataclasses import dataclass

import numpy as np

PSI_ROOT_MAX_ITERS = 200
PSI_ROOT_TOL = 1e-12


@dataclass(frozen=True)
class RadiusSpec:
    """l1-ball radius.  radius_sq is the squared value used in reports."""

    radius_l1: float

    def __post_init__(self):
        if not self.radius_l1 > 0:
            raise ValueError("radius_l1 must be positive")

    @property
    def radius_sq(self):
        return self.radius_l1 * self.radius_l1

    @classmethod
    def from_sq(cls, radius_sq):
        if not radius_sq > 0:
            raise ValueError("radius_sq must be positive")
        return cls(float(np.sqrt(radius_sq)))


@dataclass(frozen=True)
class ProxResult:
    """Output of prox_sq_l1: the prox value, the root mu*, and the weights lambda."""

    value: np.ndarray
    mu_star: float
    lam: np.ndarray


def soft_threshold(x, t):
    """Entrywise sign(x) * max(|x| - t, 0)."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def half_threshold(x, lam, step):
    """Entrywise proximal map of (lam * step) * |u|^(1/2) for the 0.5*(u-a)^2 fit.

    Entries at or below the jump threshold 1.5 * (lam*step)^(2/3) map to zero;
    above it the minimizer has the closed trigonometric form below (largest
    root of the depressed cubic in sqrt(u)).
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not step > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    t = lam * step
    thresh = 1.5 * t ** (2.0 / 3.0)
    out = np.zeros_like(x)
    mask = np.abs(x) > thresh
    if np.any(mask):
        a = x[mask]
        arg = (t * 3.0**1.5 / 4.0) * np.abs(a) ** -1.5
        arg = np.minimum(arg, 1.0)
        out[mask] = (2.0 / 3.0) * a * (1.0 + np.cos((2.0 / 3.0) * np.arccos(-arg)))
    return out


def psi(mu, x, alpha):
    """sum_i [sqrt(alpha)|x_i|/sqrt(mu) - 2 alpha]_+ - 1, nonincreasing in mu."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    x = np.asarray(x, dtype=float)
    brackets = np.sqrt(alpha) * np.abs(x) / np.sqrt(mu) - 2.0 * alpha
    return float(np.sum(np.maximum(brackets, 0.0))) - 1.0


def prox_sq_l1(x, alpha, tol=PSI_ROOT_TOL, max_iters=PSI_ROOT_MAX_ITERS):
    """Proximal operator of alpha * ||.||_1^2, i.e. argmin 0.5||u - x||^2 + alpha ||u||_1^2.

    For x = 0 the prox is 0.  Otherwise mu* is found by bracketing bisection
    on psi: the lower end starts at alpha * min_nz^2 / (||x||_1 + 2 alpha n)^2
    and is shrunk geometrically until psi > 0; the upper end max_i x_i^2 / (4 alpha)
    makes every bracket vanish so psi = -1 there.  Bisection stops when
    |psi(mu)| <= tol.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        zeros = np.zeros_like(x)
        return ProxResult(zeros, 0.0, zeros.copy())

    absx = np.abs(x)
    l1 = float(np.sum(absx))
    n = x.size
    min_nz = float(np.min(absx[absx > 0]))

    lo = alpha * min_nz**2 / (l1 + 2.0 * alpha * n) ** 2
    while psi(lo, x, alpha) <= 0.0:
        lo *= 0.25
        if lo < 1e-300:
            raise RuntimeError("failed to bracket the psi root from below")
    hi = max(float(np.max(absx)) ** 2 / (4.0 * alpha), 2.0 * lo)

    root = None
    for _ in range(max_iters):
        mid = 0.5 * (lo + hi)
        val = psi(mid, x, alpha)
        if abs(val) <= tol:
            root = mid
            break
        if val > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * hi:
            root = 0.5 * (lo + hi)
            break
    if root is None:
        raise RuntimeError("psi bisection did not converge within the iteration cap")

    lam = np.maximum(np.sqrt(alpha) * absx / np.sqrt(root) - 2.0 * alpha, 0.0)
    value = lam * x / (lam + 2.0 * alpha)
    return ProxResult(value, root, lam)


def project_l1_ball_sort(x, r):
    """Euclidean projection onto {u : ||u||_1 <= r.radius_l1} by sort and shift."""
    x = np.asarray(x, dtype=float)
    radius = r.radius_l1
    absx = np.abs(x)
    if np.sum(absx) <= radius:
        return x.copy()
    u = np.sort(absx)[::-1]
    cssv = np.cumsum(u)
    k = np.arange(1, x.size + 1)
    rho = np.nonzero(u * k > cssv - radius)[0][-1]
    theta = (cssv[rho] - radius) / (rho + 1.0)
    return np.sign(x) * np.maximum(absx - theta, 0.0)


def project_l1_ball_hv(x, r, tol=1e-10, max_iters=200):
    """l1-ball projection computed through prox_sq_l1.

    The l1 norm of the prox output is continuous and decreasing in alpha, from
    ||x||_1 at alpha -> 0 down to 0, so when ||x||_1 exceeds the radius there is
    an alpha at which the prox output lands on the sphere ||.||_1 = radius and
    that output is the projection.  alpha is located by bisection on its
    logarithm until | ||value||_1 - radius | <= tol.  Inputs already inside the
    ball are returned unchanged.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    x = np.asarray(x, dtype=float)
    radius = r.radius_l1
    if np.sum(np.abs(x)) <= radius:
        return x.copy()

    def excess(alpha):
        value = prox_sq_l1(x, alpha).value
        return float(np.sum(np.abs(value))) - radius

    lo = 1e-14
    while excess(lo) <= 0.0:
        lo *= 0.01
        if lo < 1e-300:
            raise RuntimeError("failed to bracket the projection weight from below")
    hi = 1.0
    while excess(hi) >= 0.0:
        hi *= 100.0
        if hi > 1e300:
            raise RuntimeError("failed to bracket the projection weight from above")

    for _ in range(max_iters):
        mid = float(np.sqrt(lo * hi))
        e = excess(mid)
        if abs(e) <= tol:
            return prox_sq_l1(x, mid).value
        if e > 0.0:
            lo = mid
        else:
            hi = mid
    raise RuntimeError("projection bisection did not reach the requested tolerance")
