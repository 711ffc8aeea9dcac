"""
Quadratic consensus penalty and the per-agent Lyapunov pieces built on it.

The penalty is ``P(X; gamma) = X^T (I - W kron I_n) X / (2 gamma)``. It is
evaluated agent by agent as ``sum_i x_i^T (x_i - xhat_i) / (2 gamma)`` with
``xhat_i = sum_j w_ij x_j``, which only needs neighbour copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import MixingMatrix, mix


@dataclass(frozen=True)
class PenaltyParams:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")


def _W(W):
    return W.W if isinstance(W, MixingMatrix) else np.asarray(W, dtype=float)


def _check_gamma(gamma):
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")


def _stack(W, X):
    Wa = _W(W)
    X = np.asarray(X, dtype=float)
    m = Wa.shape[0]
    if X.ndim == 1:
        if X.size % m:
            raise ValueError(f"cannot split {X.shape} into {m} blocks")
        X = X.reshape(m, -1)
    if X.shape[0] != m:
        raise ValueError(f"expected {m} blocks, got {X.shape[0]}")
    return Wa, X


def penalty_value(W, X, gamma):
    _check_gamma(gamma)
    Wa, X = _stack(W, X)
    return float(np.sum(X * (X - Wa @ X)) / (2.0 * gamma))


def penalty_residual_form(W, X, gamma):
    """``sum_i ||xhat_i - x_i||^2 / (2 gamma)``.

    Agrees with :func:`penalty_value` only when ``I - W`` is idempotent
    (e.g. ``W = ones/m``); kept for comparison.
    """
    _check_gamma(gamma)
    Wa, X = _stack(W, X)
    return float(np.sum((Wa @ X - X) ** 2) / (2.0 * gamma))


def penalty_gradient(W, X, gamma):
    _check_gamma(gamma)
    _, X = _stack(W, X)
    return (X - mix(W, X)) / gamma


def _neighbor_term(W, i, copies):
    Wa = _W(W)
    nbrs = W.neighbors(i) if isinstance(W, MixingMatrix) else [
        j for j in range(Wa.shape[0]) if j != i and Wa[i, j] != 0
    ]
    total = 0.0
    for j in nbrs:
        if j not in copies:
            raise KeyError(f"agent {i} is missing the copy of neighbour {j}")
        total = total + Wa[i, j] * np.asarray(copies[j], dtype=float)
    return Wa[i, i], total


def _copies(X_or_map):
    if isinstance(X_or_map, dict):
        return X_or_map
    return dict(enumerate(np.asarray(X_or_map, dtype=float)))


def lyapunov_quadratic(W, i, xi, copies, gamma):
    """Penalty part of ``L_i``: ``[(1-w_ii)||x_i||^2 - 2 sum_j w_ij x_i^T x_j] / (2 gamma)``."""
    _check_gamma(gamma)
    wii, s = _neighbor_term(W, i, _copies(copies))
    xi = np.asarray(xi, dtype=float)
    s = np.broadcast_to(s, xi.shape)
    return float(((1.0 - wii) * (xi @ xi) - 2.0 * np.dot(xi, s)) / (2.0 * gamma))


def lyapunov_local(i, xi, copies, W, gamma, fi):
    """
    ``L_i(x_i; x_N(i), gamma)``.

    `copies` maps neighbour index to its copy (a full stacked iterate also
    works); `fi` is a callable ``fi(x) -> float``.
    """
    return float(fi(xi)) + lyapunov_quadratic(W, i, xi, copies, gamma)


def grad_lyapunov_local(i, xi, copies, W, gamma, grad_fi):
    _check_gamma(gamma)
    wii, s = _neighbor_term(W, i, _copies(copies))
    xi = np.asarray(xi, dtype=float)
    return np.asarray(grad_fi(xi), dtype=float) + ((1.0 - wii) * xi - s) / gamma


def stacked_lyapunov_gradient(problem, W, X, gamma):
    """Rows ``grad_{x_i} L_i``; equals ``grad F(X) + (I - What) X / gamma``."""
    X = np.asarray(X, dtype=float)
    return np.vstack([
        grad_lyapunov_local(i, X[i], X, W, gamma, lambda y, i=i: problem.gradient(i, y))
        for i in range(problem.m)
    ])


def penalized_objective(W, X, gamma, problem):
    """``F(X) + P(X; gamma)`` using the monitor counter channel."""
    _, X = _stack(W, X)
    F = sum(problem.evaluate(i, X[i], channel="monitor") for i in range(problem.m))
    return F + penalty_value(W, X, gamma)


def lyapunov_handle(W, i, X, gamma, fi):
    """Closure ``y -> L_i(y; x_N(i), gamma)`` with neighbour copies frozen from `X`."""
    wii, s = _neighbor_term(W, i, _copies(X))
    scale = 1.0 / (2.0 * gamma)
    s = np.asarray(s, dtype=float)
    if s.ndim == 0:  # no neighbours
        s = np.zeros(np.shape(X[i]))

    def L(y):
        return fi(y) + scale * ((1.0 - wii) * (y @ y) - 2.0 * (y @ s))

    return L
