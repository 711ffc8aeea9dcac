"""Poll sets, forcing functions, sufficient-decrease polling and stepsize rules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class PollSet:
    """Ordered unit poll directions (rows) with a cosine-measure lower bound."""

    directions: np.ndarray
    kappa: float

    def __post_init__(self):
        D = np.array(self.directions, dtype=float)
        if D.ndim != 2 or D.shape[0] == 0:
            raise ValueError("poll set needs at least one direction")
        norms = np.linalg.norm(D, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("poll directions must have unit norm")
        D.setflags(write=False)
        object.__setattr__(self, "directions", D)

    def __len__(self):
        return self.directions.shape[0]

    def __iter__(self):
        return iter(self.directions)

    @property
    def n(self):
        return self.directions.shape[1]


def canonical_pss(n):
    """``[e_1, ..., e_n, -e_1, ..., -e_n]`` with cosine measure ``1/sqrt(n)``."""
    if n < 1:
        raise ValueError("dimension must be positive")
    eye = np.eye(n)
    return PollSet(np.vstack([eye, -eye]), 1.0 / math.sqrt(n))


def cosine_measure_estimate(D, samples=10_000, seed=0):
    """
    Sampled estimate of ``min_v max_d d^T v`` over unit ``v``.

    Minimising over a finite sample can only overestimate the true cosine
    measure. In one dimension both unit vectors are checked exactly.
    """
    Dm = D.directions if isinstance(D, PollSet) else np.atleast_2d(np.asarray(D, dtype=float))
    Dm = Dm / np.linalg.norm(Dm, axis=1, keepdims=True)
    n = Dm.shape[1]
    if n == 1:
        V = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(seed)
        V = rng.standard_normal((samples, n))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
    return float(np.min(np.max(V @ Dm.T, axis=1)))


@dataclass(frozen=True)
class ForcingFunction:
    """``rho(alpha) = c * alpha**(1 + tau_rho)``."""

    c: float = 1e-8
    tau_rho: float = 0.8

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("forcing coefficient must be positive")
        if not 0 < self.tau_rho <= 1:
            raise ValueError("forcing exponent tau_rho must lie in (0, 1]")

    def __call__(self, alpha):
        return self.c * alpha ** (1.0 + self.tau_rho)

    @classmethod
    def for_vanishing(cls, alpha0, tau_alpha, rho0, tau_rho):
        """Power rule reproducing ``rho^(k) = rho0 / (1+k)**tau_rho`` along
        ``alpha^(k) = alpha0 / (1+k)**tau_alpha``."""
        p = tau_rho / tau_alpha
        return cls(rho0 / alpha0**p, p - 1.0)


@dataclass(frozen=True)
class Vanishing:
    """Predefined ``alpha^(k) = alpha0 / (1+k)**tau_alpha``, shared by all agents."""

    alpha0: float
    tau_alpha: float = 0.6
    theory_compliant: bool = field(default=True, init=False)

    def alpha(self, k):
        return self.alpha0 / (1.0 + k) ** self.tau_alpha

    def bounds(self, k):
        a = self.alpha(k)
        return a, a


@dataclass(frozen=True)
class Adaptive:
    """
    Per-agent expand/contract rule clipped to ``[alpha_min(k), alpha_max(k)]``.

    The bounds are ``c_min / (1+k)**tau_alpha`` and ``c_max / (1+k)**tau_alpha``;
    the defaults ``c_min = 0``, ``c_max = inf`` give the unbounded practical
    variant, which is flagged as not theory compliant.
    """

    theta: float = 0.5
    c_min: float = 0.0
    c_max: float = math.inf
    tau_alpha: float = 0.6

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError("theta must lie in (0, 1)")
        if self.c_min < 0 or self.c_max <= self.c_min:
            raise ValueError("need 0 <= c_min < c_max")

    @property
    def theory_compliant(self):
        return self.c_min > 0 and math.isfinite(self.c_max)

    def bounds(self, k):
        d = (1.0 + k) ** self.tau_alpha
        return self.c_min / d, self.c_max / d


def update_stepsize(schedule, alpha, success, k):
    """Stepsize for iteration ``k + 1`` given the outcome at iteration ``k``."""
    if isinstance(schedule, Vanishing):
        return schedule.alpha(k + 1)
    lo, hi = schedule.bounds(k)
    if success:
        return min(alpha / schedule.theta, hi)
    return max(schedule.theta * alpha, lo)


class PollEvaluationError(RuntimeError):
    def __init__(self, index, cause):
        self.direction_index = index
        super().__init__(f"evaluation failed while polling direction {index}: {cause}")


@dataclass(frozen=True, eq=False)
class PollResult:
    success: bool
    evaluations: int
    baseline: float
    index: int | None = None
    direction: np.ndarray | None = None
    trial: np.ndarray | None = None
    trial_value: float | None = None
    threshold: float = 0.0


def poll(fun, x, alpha, D, rho, baseline=None):
    """
    Opportunistic poll: try ``x + alpha * d`` for ``d`` in `D` in order and
    stop at the first one with ``fun(x + alpha d) <= fun(x) - rho(alpha)``.

    ``fun(x)`` is evaluated (and counted) only when `baseline` is None.
    The test is applied as ``fun(x) - fun(x + alpha d) >= rho(alpha)`` so a
    forcing value below the spacing of floats near ``fun(x)`` cannot turn
    an equal value into a success.
    """
    if not alpha > 0:
        raise ValueError("stepsize must be positive")
    x = np.asarray(x, dtype=float)
    evals = 0
    if baseline is None:
        try:
            baseline = fun(x)
        except Exception as exc:
            raise PollEvaluationError(None, exc) from exc
        evals = 1
    r = rho(alpha)
    threshold = baseline - r
    for idx, d in enumerate(D):
        trial = x + alpha * d
        try:
            value = fun(trial)
        except Exception as exc:
            raise PollEvaluationError(idx, exc) from exc
        evals += 1
        if baseline - value >= r:
            return PollResult(True, evals, baseline, idx, np.array(d), trial, value, threshold)
    return PollResult(False, evals, baseline, threshold=threshold)
