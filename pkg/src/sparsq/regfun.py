"""Penalty, objective, surrogate, and gradient evaluations shared by all solvers."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RegParams:
    """Regularization weights: alpha on the squared l1 term, beta on the squared l2 term.

    Requires alpha > 0 and 0 <= beta <= alpha, so eta = beta / alpha lies in [0, 1].
    beta = 0 gives the pure squared-l1 penalty.
    """

    alpha: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not 0 <= self.beta <= self.alpha:
            raise ValueError("beta must satisfy 0 <= beta <= alpha")

    @property
    def eta(self):
        return self.beta / self.alpha


def eval_R(x, p):
    """Penalty alpha * ||x||_1^2 - beta * ||x||_2^2; nonnegative when alpha >= beta."""
    x = np.asarray(x, dtype=float)
    l1 = np.sum(np.abs(x))
    return p.alpha * l1 * l1 - p.beta * float(x @ x)


def eval_J(A, ydelta, x, p):
    """Penalized objective 0.5 * ||Ax - y||^2 + eval_R(x, p)."""
    r = A.apply(x) - ydelta
    return 0.5 * float(r @ r) + eval_R(x, p)


def eval_D(A, ydelta, x, beta):
    """Constrained-formulation objective 0.5 * ||Ax - y||^2 - beta * ||x||_2^2."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    x = np.asarray(x, dtype=float)
    r = A.apply(x) - ydelta
    return 0.5 * float(r @ r) - beta * float(x @ x)


def eval_surrogate(A, ydelta, omega, x, beta, gamma):
    """Quadratic majorizer of eval_D around x, evaluated at omega.

    Equals eval_D(omega) plus (gamma/2)*||x - omega||^2 - 0.5*||A(x - omega)||^2,
    so it coincides with eval_D(omega) when x == omega.  Requires gamma > 2*beta
    for strict convexity in omega.
    """
    if not gamma > 2.0 * beta:
        raise ValueError("gamma must exceed 2 * beta")
    omega = np.asarray(omega, dtype=float)
    x = np.asarray(x, dtype=float)
    d = x - omega
    ad = A.apply(x) - A.apply(omega)
    return (
        eval_D(A, ydelta, omega, beta)
        + 0.5 * gamma * float(d @ d)
        - 0.5 * float(ad @ ad)
    )


def grad_f(A, ydelta, x, beta):
    """Gradient of the smooth part: A*(Ax - y) - 2 * beta * x."""
    x = np.asarray(x, dtype=float)
    return A.apply_adjoint(A.apply(x) - ydelta) - 2.0 * beta * x


def phi(s, t):
    """Quotient s^2 / t extended to the closure: 0 at (0, 0), +inf elsewhere off t > 0."""
    if t > 0:
        return s * s / t
    if s == 0 and t == 0:
        return 0.0
    return math.inf


def optimal_lambda(x):
    """Simplex weights |x_i| / ||x||_1 attaining sum_i phi(x_i, lambda_i) = ||x||_1^2.

    Returns the uniform vector 1/n when x is the zero vector.
    """
    x = np.asarray(x, dtype=float)
    l1 = np.sum(np.abs(x))
    if l1 == 0.0:
        return np.full(x.shape, 1.0 / x.size)
    return np.abs(x) / l1
