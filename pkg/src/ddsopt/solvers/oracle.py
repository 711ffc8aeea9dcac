"""Runtime check of the stationarity bound on unsuccessful DDS-L steps."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..network import MixingMatrix
from ..penalty import grad_lyapunov_local

EPS = np.finfo(float).eps
ROUNDOFF_ULPS = 16


@dataclass(frozen=True)
class Lemma1Check:
    """
    One unsuccessful (agent, iteration) pair.

    ``bound`` is the exact-arithmetic bound. ``roundoff`` is the extra
    ``2 delta / (kappa alpha)`` allowed when the two compared values of
    ``L_i`` each carry an absolute rounding error up to ``delta``.
    """

    agent: int
    k: int
    alpha: float
    grad_norm: float
    bound: float
    roundoff: float = 0.0

    @property
    def slack(self):
        return self.bound - self.grad_norm

    def violated(self, rtol=1e-10, with_roundoff=True):
        limit = self.bound + (self.roundoff if with_roundoff else 0.0)
        return self.grad_norm > limit * (1.0 + rtol)


def _lyapunov_scale(Wa, i, X, gamma, fx):
    """Sum of magnitudes of the terms of ``L_i(x_i)``; sets the rounding level."""
    x = X[i]
    cross = sum(abs(Wa[i, j] * float(x @ X[j])) for j in range(Wa.shape[0]) if j != i)
    return abs(fx) + ((1.0 - Wa[i, i]) * float(x @ x) + 2.0 * cross) / (2.0 * gamma)


def lemma1_checks(trace, problem, W, gamma, kappa, M, rho):
    """
    Evaluate ``||grad_i L_i(x^(k))||`` against
    ``(M_i alpha / 2 + rho(alpha) / alpha) / kappa`` for every unsuccessful
    (agent, iteration) pair of an instrumented DDS-L run.

    `M` is a sequence of per-agent constants ``L_i + (1 - w_ii) / gamma``.
    The bound assumes exact arithmetic; once ``alpha`` is near machine
    precision relative to ``|L_i|`` the sufficient-decrease comparison is
    decided by rounding, so each check also carries a rounding allowance
    based on ``16 eps`` times the magnitude of the terms of ``L_i``.
    """
    if trace.iterates is None:
        raise ValueError("trace was recorded without iterates")
    Wa = W.W if isinstance(W, MixingMatrix) else np.asarray(W, dtype=float)
    checks = []
    for k, flags in enumerate(trace.step_success):
        X = trace.iterates[k]
        alphas = trace.alphas[k]
        for i in np.flatnonzero(~np.asarray(flags)):
            g = grad_lyapunov_local(i, X[i], X, W, gamma, lambda y, i=i: problem.gradient(i, y))
            a = float(alphas[i])
            bound = (M[i] * a / 2.0 + rho(a) / a) / kappa
            fx = problem.evaluate(i, X[i], "monitor")
            delta = ROUNDOFF_ULPS * EPS * _lyapunov_scale(Wa, i, X, gamma, fx)
            checks.append(Lemma1Check(int(i), k, a, float(np.linalg.norm(g)), float(bound),
                                      float(2.0 * delta / (kappa * a))))
    return checks


def lemma1_oracle(trace, problem, W, gamma, kappa, M, rho, rtol=1e-10, with_roundoff=True):
    """Violations among :func:`lemma1_checks` (empty for a correct solver)."""
    return [
        c for c in lemma1_checks(trace, problem, W, gamma, kappa, M, rho)
        if c.violated(rtol, with_roundoff)
    ]


def lyapunov_constants(W, gamma, lipschitz):
    """``M_i = L_i + (1 - w_ii) / gamma``."""
    Wa = W.W if isinstance(W, MixingMatrix) else np.asarray(W, dtype=float)
    return np.asarray(lipschitz, dtype=float) + (1.0 - np.diag(Wa)) / gamma
