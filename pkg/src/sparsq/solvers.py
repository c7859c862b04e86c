"""Iterative solvers.

Two first-class algorithms share the package's penalty:

* solve_hv      prox-gradient iteration built on the squared-l1 prox,
                minimizing 0.5||Ax - y||^2 + alpha ||x||_1^2 - beta ||x||_2^2.
* solve_pg_sf   projected-gradient iteration over an l1 ball, derived from a
                quadratic surrogate of 0.5||Ax - y||^2 - beta ||x||_2^2.

search_radius_mdp wraps solve_pg_sf in an outer bisection on the squared ball
radius driven by the discrepancy principle, and select_alpha_discrepancy does
the analogous bisection on alpha for the penalized solvers.  The remaining
solvers (ISTA, FISTA, a soft-threshold l1-minus-l2 iteration, and iterative
half thresholding) are comparison baselines.

Every solver is deterministic given its inputs, stops when the step norm
falls below opts.step_tol or the iteration cap is reached, and can record a
per-iteration trace.  The gradient step uses the descent sign
x - t * A*(Ax - y) throughout.
"""

import time
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .linops import opnorm_sq_cached
from .proxops import (
    RadiusSpec,
    half_threshold,
    project_l1_ball_sort,
    prox_sq_l1,
    soft_threshold,
)
from .regfun import RegParams, eval_D, eval_J


class Termination(str, Enum):
    STEP_TOL = "step_tol"
    MAX_ITER = "max_iter"
    STAGNATION = "stagnation"


@dataclass(frozen=True)
class SolverOptions:
    """Shared iteration controls.  Defaults follow the benchmark settings."""

    max_iter: int = 1500
    step_tol: float = 1e-5
    L_k: float = 1.0
    gamma: float = 1.0
    lambda_st: float = 1.0
    record_trace: bool = True

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.step_tol > 0:
            raise ValueError("step_tol must be positive")
        if not self.L_k > 0:
            raise ValueError("L_k must be positive")
        if not self.lambda_st > 0:
            raise ValueError("lambda_st must be positive")


@dataclass(frozen=True)
class IterateRecord:
    k: int
    objective: float
    residual_norm: float
    step_norm: float
    rerror: Optional[float]
    elapsed_s: float


@dataclass(frozen=True)
class SolveResult:
    x_final: np.ndarray
    iterations: int
    termination: Termination
    trace: list


@dataclass(frozen=True)
class MdpOptions:
    """Outer bisection controls for the radius search (radii in squared units)."""

    r_min: float
    r_max: float
    tau1: float
    tau2: float
    delta: float
    max_outer: int = 40

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if not 1 < self.tau1 <= self.tau2:
            raise ValueError("need tau2 >= tau1 > 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.max_outer < 1:
            raise ValueError("max_outer must be at least 1")


@dataclass(frozen=True)
class MdpRecord:
    j: int
    radius_sq: float
    residual_norm: float
    rerror: Optional[float]


@dataclass(frozen=True)
class MdpResult:
    radius: RadiusSpec
    result: SolveResult
    bracketed: bool
    trace: list


@dataclass(frozen=True)
class AlphaSelection:
    alpha: float
    residual_norm: float
    bracketed: bool


def _iterate(x0, step_fn, objective_fn, residual_fn, opts, x_true=None):
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    x_true_norm = None
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=float)
        x_true_norm = float(np.linalg.norm(x_true))
    trace = []
    start = time.perf_counter()
    termination = Termination.MAX_ITER
    k = 0
    for k in range(1, opts.max_iter + 1):
        x_next = step_fn(x)
        step_norm = float(np.linalg.norm(x_next - x))
        x = x_next
        if opts.record_trace:
            rerror = None
            if x_true_norm:
                rerror = float(np.linalg.norm(x - x_true)) / x_true_norm
            trace.append(
                IterateRecord(
                    k=k,
                    objective=objective_fn(x),
                    residual_norm=residual_fn(x),
                    step_norm=step_norm,
                    rerror=rerror,
                    elapsed_s=time.perf_counter() - start,
                )
            )
        if step_norm == 0.0:
            termination = Termination.STAGNATION
            break
        if step_norm < opts.step_tol:
            termination = Termination.STEP_TOL
            break
    return SolveResult(x, k, termination, trace)


def _residual_norm(A, ydelta):
    def fn(x):
        r = A.apply(x) - ydelta
        return float(np.linalg.norm(r))

    return fn


def solve_hv(A, ydelta, p: RegParams, opts: SolverOptions, x0, x_true=None):
    """Prox-gradient solve of 0.5||Ax-y||^2 + alpha||x||_1^2 - beta||x||_2^2.

    One step maps x to the squared-l1 prox (weight alpha/L_k) of
    x + (2 beta / L_k) x - (1/L_k) A*(Ax - y).  A step constant L_k at or below
    half the gradient Lipschitz bound forfeits the descent guarantee; that
    case is reported as a warning, not an error.
    """
    alpha, beta = p.alpha, p.beta
    lk = opts.L_k
    r_hat = opnorm_sq_cached(A)
    if lk <= 0.5 * r_hat + beta:
        warnings.warn(
            f"L_k={lk:g} is not above half the smoothness bound "
            f"({0.5 * (r_hat + 2 * beta):g}); descent is not guaranteed",
            RuntimeWarning,
            stacklevel=2,
        )

    def step(x):
        u = x + (2.0 * beta / lk) * x - A.apply_adjoint(A.apply(x) - ydelta) / lk
        return prox_sq_l1(u, alpha / lk).value

    return _iterate(
        x0,
        step,
        lambda x: eval_J(A, ydelta, x, p),
        _residual_norm(A, ydelta),
        opts,
        x_true,
    )


def solve_pg_sf(A, ydelta, beta, gamma, r: RadiusSpec, opts: SolverOptions, x0, x_true=None):
    """Projected-gradient solve of 0.5||Ax-y||^2 - beta||x||_2^2 over an l1 ball.

    One step projects (gamma x - A*(Ax - y)) / (gamma - 2 beta) onto the ball.
    Requires gamma > 2 * beta.
    """
    if not gamma > 2.0 * beta:
        raise ValueError("gamma must exceed 2 * beta")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    denom = gamma - 2.0 * beta

    def step(x):
        u = (gamma * x - A.apply_adjoint(A.apply(x) - ydelta)) / denom
        return project_l1_ball_sort(u, r)

    return _iterate(
        x0,
        step,
        lambda x: eval_D(A, ydelta, x, beta),
        _residual_norm(A, ydelta),
        opts,
        x_true,
    )


def pg_fixed_point_defect(A, ydelta, beta, gamma, r, x):
    """Norm of x minus one projected-gradient step from x (stationarity check)."""
    denom = gamma - 2.0 * beta
    u = (gamma * np.asarray(x, float) - A.apply_adjoint(A.apply(x) - ydelta)) / denom
    return float(np.linalg.norm(x - project_l1_ball_sort(u, r)))


def search_radius_mdp(
    A, ydelta, beta, gamma, mdp: MdpOptions, opts: SolverOptions, x0, x_true=None
):
    """Bisection on the squared l1-ball radius until the residual obeys the
    discrepancy band [tau1 * delta, tau2 * delta].

    Each trial radius runs a fresh solve_pg_sf from x0.  The residual is a
    decreasing function of the radius, so the bracket update shrinks toward
    the transition.  If max_outer halvings never land in the band the result
    carries bracketed=False and holds the last midpoint solve.
    """
    r_min, r_max = mdp.r_min, mdp.r_max
    trace = []
    result = None
    radius = None
    bracketed = False
    residual_fn = _residual_norm(A, ydelta)
    x_true_norm = None
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=float)
        x_true_norm = float(np.linalg.norm(x_true))
    for j in range(1, mdp.max_outer + 1):
        r_j = 0.5 * (r_max + r_min)
        radius = RadiusSpec.from_sq(r_j)
        result = solve_pg_sf(A, ydelta, beta, gamma, radius, opts, x0, x_true)
        residual = residual_fn(result.x_final)
        rerror = None
        if x_true_norm:
            rerror = float(np.linalg.norm(result.x_final - x_true)) / x_true_norm
        trace.append(MdpRecord(j, r_j, residual, rerror))
        if residual < mdp.tau1 * mdp.delta:
            r_max = r_j
        elif residual > mdp.tau2 * mdp.delta:
            r_min = r_j
        else:
            bracketed = True
            break
    return MdpResult(radius, result, bracketed, trace)


def select_alpha_discrepancy(
    A,
    ydelta,
    delta,
    eta,
    solver="hv",
    opts: SolverOptions = SolverOptions(),
    alpha_bracket=(1e-8, 1e-1),
    max_steps=60,
    band=1.05,
    x0=None,
):
    """Pick alpha so the solve residual lands in [delta, band * delta].

    The residual grows with alpha, so a log-scale bisection applies.  If even
    the bracket endpoints cannot reach the band (residual above it at the low
    end, or below it at the high end) the nearer endpoint is returned with
    bracketed=False.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    lo, hi = alpha_bracket
    if not 0 < lo < hi:
        raise ValueError("alpha_bracket must be positive and increasing")
    if x0 is None:
        x0 = np.full(A.domain_dim, 0.01)
    residual_fn = _residual_norm(A, ydelta)

    def solve_at(alpha):
        if solver == "hv":
            res = solve_hv(A, ydelta, RegParams(alpha, eta * alpha), opts, x0)
        elif solver == "ista":
            res = solve_ista(A, ydelta, alpha, opts, x0)
        elif solver == "fista":
            res = solve_fista(A, ydelta, alpha, opts, x0)
        elif solver == "st":
            res = solve_st_l1_l2(A, ydelta, alpha, eta * alpha, opts, x0)
        else:
            raise ValueError(f"unknown solver {solver!r}")
        return residual_fn(res.x_final)

    res_lo = solve_at(lo)
    if res_lo > band * delta:
        return AlphaSelection(lo, res_lo, False)
    if res_lo >= delta:
        return AlphaSelection(lo, res_lo, True)
    res_hi = solve_at(hi)
    if res_hi < delta:
        return AlphaSelection(hi, res_hi, False)
    if res_hi <= band * delta:
        return AlphaSelection(hi, res_hi, True)

    for _ in range(max_steps):
        mid = float(np.sqrt(lo * hi))
        res_mid = solve_at(mid)
        if delta <= res_mid <= band * delta:
            return AlphaSelection(mid, res_mid, True)
        if res_mid < delta:
            lo = mid
        else:
            hi = mid
    mid = float(np.sqrt(lo * hi))
    return AlphaSelection(mid, solve_at(mid), False)


def solve_ista(A, ydelta, alpha, opts: SolverOptions, x0, x_true=None):
    """Iterative soft thresholding for 0.5||Ax-y||^2 + alpha ||x||_1."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    t = 1.0 / opts.lambda_st

    def step(x):
        return soft_threshold(x - t * A.apply_adjoint(A.apply(x) - ydelta), alpha * t)

    return _iterate(
        x0, step, _l1_objective(A, ydelta, alpha), _residual_norm(A, ydelta), opts, x_true
    )


def fista_momentum_next(t):
    """Momentum update t -> (1 + sqrt(1 + 4 t^2)) / 2."""
    return 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))


def solve_fista(A, ydelta, alpha, opts: SolverOptions, x0, x_true=None, momentum=True):
    """ISTA with extrapolation.  momentum=False freezes the momentum sequence
    at 1, which reproduces plain ISTA exactly."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    t = 1.0 / opts.lambda_st
    state = {"t": 1.0, "x_prev": np.array(x0, dtype=float), "first": True}

    def step(x):
        if state["first"]:
            z = x
            state["first"] = False
        else:
            t_k = state["t"]
            t_next = fista_momentum_next(t_k) if momentum else 1.0
            z = x + ((t_k - 1.0) / t_next) * (x - state["x_prev"])
            state["t"] = t_next
        x_next = soft_threshold(
            z - t * A.apply_adjoint(A.apply(z) - ydelta), alpha * t
        )
        state["x_prev"] = x
        return x_next

    return _iterate(
        x0, step, _l1_objective(A, ydelta, alpha), _residual_norm(A, ydelta), opts, x_true
    )


def solve_st_l1_l2(A, ydelta, alpha, beta, opts: SolverOptions, x0, x_true=None):
    """Soft-threshold iteration for 0.5||Ax-y||^2 + alpha||x||_1 - beta||x||_2.

    The l2 term enters through x / ||x||_2, so the iterate norm is floored at
    1e-12 to keep the step defined; beta = 0 reduces the step to ISTA's.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not 0 <= beta <= alpha:
        raise ValueError("beta must satisfy 0 <= beta <= alpha")
    gamma = opts.lambda_st

    def step(x):
        norm_x = max(float(np.linalg.norm(x)), 1e-12)
        u = x + (beta / (gamma * norm_x)) * x - A.apply_adjoint(A.apply(x) - ydelta) / gamma
        return soft_threshold(u, alpha / gamma)

    def objective(x):
        r = A.apply(x) - ydelta
        return (
            0.5 * float(r @ r)
            + alpha * float(np.sum(np.abs(x)))
            - beta * float(np.linalg.norm(x))
        )

    return _iterate(x0, step, objective, _residual_norm(A, ydelta), opts, x_true)


def solve_ht_half(A, ydelta, lam, opts: SolverOptions, x0, x_true=None):
    """Iterative half thresholding for 0.5||Ax-y||^2 + lam * sum_i |x_i|^(1/2)."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    t = 1.0 / opts.lambda_st

    def step(x):
        return half_threshold(x - t * A.apply_adjoint(A.apply(x) - ydelta), lam, t)

    def objective(x):
        r = A.apply(x) - ydelta
        return 0.5 * float(r @ r) + lam * float(np.sum(np.sqrt(np.abs(x))))

    return _iterate(x0, step, objective, _residual_norm(A, ydelta), opts, x_true)


def _l1_objective(A, ydelta, alpha):
    def objective(x):
        r = A.apply(x) - ydelta
        return 0.5 * float(r @ r) + alpha * float(np.sum(np.abs(x)))

    return objective
