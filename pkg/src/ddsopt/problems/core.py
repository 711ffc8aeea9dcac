"""Decentralized objectives with per-agent evaluation accounting."""

from __future__ import annotations

import threading

import numpy as np


class EvaluationFailure(ArithmeticError):
    """A local objective returned a non-finite value or was given one."""

    def __init__(self, problem, agent, x, value=None, reason="function evaluation failed"):
        self.problem = problem
        self.agent = agent
        self.x = np.array(x, copy=True)
        self.value = value
        self.reason = reason
        super().__init__(f"{reason}: problem={problem} agent={agent} value={value}")


class _Counters:
    def __init__(self, m):
        self._lock = threading.Lock()
        self._counts = [0] * m

    def bump(self, i):
        with self._lock:
            self._counts[i] += 1

    def reset(self):
        with self._lock:
            self._counts = [0] * len(self._counts)

    def snapshot(self):
        with self._lock:
            return np.array(self._counts, dtype=np.int64)


class DecentralizedProblem:
    """
    ``m`` local objectives ``f_i : R^n -> R`` sharing one variable.

    Parameters
    ----------
    name : str
    n, m : int
    local : callable
        ``local(i, x) -> float``.
    local_grad : callable
        ``local_grad(i, x) -> ndarray``; used by oracles and tests only.
    x0 : array_like
        Standard starting point.

    Two counter channels are kept: ``"solver"`` (what budgets see) and
    ``"monitor"`` (metrics and diagnostics).
    """

    def __init__(self, name, n, m, local, local_grad, x0, meta=None):
        self.name = name
        self.n = int(n)
        self.m = int(m)
        self._local = local
        self._local_grad = local_grad
        self.x0 = np.array(x0, dtype=float)
        self.x0.setflags(write=False)
        if self.x0.shape != (self.n,):
            raise ValueError(f"x0 has shape {self.x0.shape}, expected ({self.n},)")
        self.meta = dict(meta or {})
        self._channels = {"solver": _Counters(self.m), "monitor": _Counters(self.m)}
        self.failures = []

    def __repr__(self):
        return f"DecentralizedProblem({self.name!r}, n={self.n}, m={self.m})"

    def evaluate(self, i, x, channel="solver"):
        if not 0 <= i < self.m:
            raise IndexError(f"agent {i} out of range for m={self.m}")
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            failure = EvaluationFailure(self.name, i, x, reason="non-finite point")
            self.failures.append(failure)
            raise failure
        self._channels[channel].bump(i)
        with np.errstate(all="ignore"):
            value = float(self._local(i, x))
        if not np.isfinite(value):
            failure = EvaluationFailure(self.name, i, x, value)
            self.failures.append(failure)
            raise failure
        return value

    def gradient(self, i, x):
        return np.asarray(self._local_grad(i, np.asarray(x, dtype=float)), dtype=float)

    def aggregate(self, x, channel="monitor"):
        """``sum_i f_i(x)`` at a single point."""
        return sum(self.evaluate(i, x, channel) for i in range(self.m))

    def counts(self, channel="solver"):
        return self._channels[channel].snapshot()

    def total_evaluations(self, channel="solver"):
        return int(self.counts(channel).sum())

    def reset_counters(self):
        for c in self._channels.values():
            c.reset()
        self.failures.clear()

    def metadata(self):
        return {"name": self.name, "n": self.n, "m": self.m, "x0": self.x0.tolist()}


def eval_local(problem, i, x):
    """Evaluate ``f_i(x)`` on the solver channel."""
    return problem.evaluate(i, x)


def fd_gradient(fun, x, h=1e-6):
    """Centered differences with a step scaled by ``max(1, |x_j|)``."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        step = h * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = step
        g[j] = (fun(x + e) - fun(x - e)) / (2 * step)
    return g


def relative_error(a, b):
    """``||a - b|| / max(||b||, 1)``."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))
