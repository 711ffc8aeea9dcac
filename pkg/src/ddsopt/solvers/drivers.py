"""
Synchronous-round drivers for the direct-search and zeroth-order solvers.

Every iteration reads a frozen snapshot ``X^(k)``; agent updates are
independent and may run on a thread pool, then the new stacked iterate is
assembled in agent order. Runs stop at the first iteration boundary where
the solver-channel evaluations reach ``max_evals`` or ``k`` reaches
``max_iters``; the iteration in flight always completes.
"""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..bench import metrics
from ..network import MixingMatrix
from ..penalty import lyapunov_handle, lyapunov_quadratic
from ..problems.core import EvaluationFailure
from ..searchcore import PollEvaluationError, Vanishing, poll, update_stepsize
from .config import SolverConfig
from .trace import RunTrace


@dataclass
class AgentState:
    index: int
    x: np.ndarray
    alpha: float
    success: bool = False
    evals: int = 0
    stream: int = 0
    cached_point: np.ndarray | None = None
    cached_value: float | None = None
    window: deque | None = None
    fallbacks: int = 0

    def cached(self, x):
        if self.cached_point is not None and np.array_equal(self.cached_point, x):
            return self.cached_value
        return None

    def cache(self, x, value):
        self.cached_point = np.array(x, copy=True)
        self.cached_value = value


@dataclass(frozen=True)
class StepOutcome:
    x: np.ndarray
    success: bool
    evals: int


def _weights(W):
    if isinstance(W, MixingMatrix):
        return W.W
    return MixingMatrix.from_array(W).W


def _solver_fun(problem, i):
    return lambda y: problem.evaluate(i, y)


def _run(problem, W, config, step, init_agent=None):
    Wa = _weights(W)
    if Wa.shape[0] != problem.m:
        raise ValueError(f"mixing matrix is {Wa.shape[0]}x{Wa.shape[0]}, problem has m={problem.m}")
    m, n = problem.m, problem.n
    x0 = problem.x0
    schedule = config.resolved_schedule(x0)
    alpha0 = config.initial_stepsize(x0)
    seeds = np.random.SeedSequence(config.seed).spawn(m)
    agents = [
        AgentState(i, x0.copy(), alpha0, stream=int(seeds[i].generate_state(1)[0]))
        for i in range(m)
    ]
    if init_agent is not None:
        for a in agents:
            init_agent(a)
    start_counts = problem.counts("solver")
    trace = RunTrace(config.name, problem.name, m, n,
                     iterates=[] if config.record_iterates else None,
                     theory_compliant=schedule.theory_compliant)

    def spent():
        return int((problem.counts("solver") - start_counts).sum())

    if config.initial_iterates is None:
        X = np.tile(x0, (m, 1))
    else:
        X = np.array(config.initial_iterates, dtype=float)
        if X.shape != (m, n):
            raise ValueError(f"initial_iterates has shape {X.shape}, expected ({m}, {n})")
    pool = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        trace.record(0, metrics(problem, X), [a.alpha for a in agents], 0, 0, X)
        k = 0
        while True:
            if config.max_iters is not None and k >= config.max_iters:
                trace.stop_reason = "max_iters"
                break
            if config.max_evals is not None and spent() >= config.max_evals:
                trace.stop_reason = "max_evals"
                break
            snapshot = X.copy()
            snapshot.setflags(write=False)
            mixed = Wa @ snapshot

            def work(agent, k=k, snapshot=snapshot, mixed=mixed):
                return step(agent, k, snapshot, mixed, schedule)

            outcomes = list(pool.map(work, agents)) if pool else [work(a) for a in agents]
            X = np.vstack([o.x for o in outcomes])
            flags = np.array([o.success for o in outcomes])
            for a, o in zip(agents, outcomes):
                a.evals += o.evals
                a.success = o.success
                a.alpha = update_stepsize(schedule, a.alpha, o.success, k)
                a.x = o.x
            trace.step_success.append(flags)
            k += 1
            trace.record(k, metrics(problem, X), [a.alpha for a in agents],
                         int(flags.sum()), spent(), X)
    except (EvaluationFailure, PollEvaluationError) as exc:
        trace.complete = False
        trace.failure = str(exc)
        trace.stop_reason = "evaluation_failure"
    finally:
        if pool is not None:
            pool.shutdown()
    trace.final_X = X
    trace.agent_evals = np.array([a.evals for a in agents], dtype=np.int64)
    trace.fallbacks = sum(a.fallbacks for a in agents)
    return trace


def _require(config, algorithm):
    if config.algorithm != algorithm:
        raise ValueError(f"config is for {config.algorithm}, not {algorithm}")


def run_dds_l(problem, W, config: SolverConfig):
    """Direct search on each agent's local Lyapunov function (copies stay put on failure)."""
    _require(config, "dds-l")
    gamma = config.gamma
    rho = config.forcing
    polls = [config.poll_set(problem.n, i) for i in range(problem.m)]

    def step(agent, k, X, mixed, schedule):
        i = agent.index
        fi = _solver_fun(problem, i)
        x = X[i]
        evals = 0
        f_here = agent.cached(x)
        if f_here is None:
            f_here = fi(x)
            evals += 1
        last = {}

        def f_track(y):
            last["f"] = fi(y)
            return last["f"]

        L = lyapunov_handle(W, i, X, gamma, f_track)
        quad_here = lyapunov_quadratic(W, i, x, X, gamma)
        res = poll(L, x, agent.alpha, polls[i], rho, baseline=f_here + quad_here)
        evals += res.evaluations
        if res.success:
            agent.cache(res.trial, last["f"])
            return StepOutcome(res.trial, True, evals)
        agent.cache(x, f_here)
        return StepOutcome(x.copy(), False, evals)

    return _run(problem, W, config, step)


def run_dds_f(problem, W, config: SolverConfig):
    """Direct search on ``f_i`` followed by a consensus step for every agent."""
    _require(config, "dds-f")
    rho = config.forcing
    polls = [config.poll_set(problem.n, i) for i in range(problem.m)]

    def step(agent, k, X, mixed, schedule):
        i = agent.index
        x = X[i]
        baseline = agent.cached(x)
        res = poll(_solver_fun(problem, i), x, agent.alpha, polls[i], rho, baseline=baseline)
        if res.success:
            agent.cache(res.trial, res.trial_value)
            return StepOutcome(mixed[i] + agent.alpha * res.direction, True, res.evaluations)
        agent.cache(x, res.baseline)
        return StepOutcome(mixed[i].copy(), False, res.evaluations)

    return _run(problem, W, config, step)


def centered_fd_gradient(fun, x, h, directions):
    """``sum_d (f(x + h d) - f(x - h d)) / (2h) * d`` over `directions`.

    For the coordinate basis this is the usual centered-difference gradient;
    it costs ``2 * len(directions)`` evaluations.
    """
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    points, values = [], []
    for d in directions:
        fp = fun(x + h * d)
        fm = fun(x - h * d)
        points += [x + h * d, x - h * d]
        values += [fp, fm]
        g += (fp - fm) / (2.0 * h) * d
    return g, points, values


def fit_affine_slope(points, values, center, ridge=1e-10):
    """
    Ridge least-squares fit of ``f(y) ~ c + g^T (y - center)``.

    Returns ``(g, cond)`` where ``cond`` is the condition number of the
    shifted design ``[y_j - center]`` (``inf`` when it has rank below n).
    """
    Y = np.asarray(points, dtype=float)
    f = np.asarray(values, dtype=float)
    center = np.asarray(center, dtype=float)
    n = center.size
    S = Y - center
    if Y.shape[0] < n + 1:
        return None, np.inf
    sv = np.linalg.svd(S, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else float(sv[0] / sv[-1])
    A = np.hstack([np.ones((Y.shape[0], 1)), S])
    A_aug = np.vstack([A, np.sqrt(ridge) * np.eye(n + 1)])
    b_aug = np.concatenate([f, np.zeros(n + 1)])
    coef = np.linalg.lstsq(A_aug, b_aug, rcond=None)[0]
    return coef[1:], cond


def _coordinate_directions(n):
    return np.eye(n)


def run_zo_dgd_fd(problem, W, config: SolverConfig):
    """Decentralized gradient descent with centered finite-difference gradients."""
    _require(config, "zo-dgd-fd")
    h = config.fd_step
    dirs = _coordinate_directions(problem.n)

    def step(agent, k, X, mixed, schedule):
        i = agent.index
        g, _, _ = centered_fd_gradient(_solver_fun(problem, i), X[i], h, dirs)
        return StepOutcome(mixed[i] - schedule.alpha(k) * g, False, 2 * problem.n)

    return _run(problem, W, config, step)


def run_zo_dgd_lm(problem, W, config: SolverConfig):
    """
    Decentralized gradient descent with slopes of affine models fitted to the
    last ``2n + 1`` points each agent evaluated. When that window is
    ill-conditioned a centered-difference stencil is evaluated instead and
    its points enter the window.
    """
    _require(config, "zo-dgd-lm")
    n = problem.n
    h = config.fd_step
    dirs = _coordinate_directions(n)

    def init(agent):
        agent.window = deque(maxlen=2 * n + 1)

    def step(agent, k, X, mixed, schedule):
        i = agent.index
        fi = _solver_fun(problem, i)
        x = X[i]
        fx = fi(x)
        evals = 1
        agent.window.append((x.copy(), fx))
        pts = [p for p, _ in agent.window]
        vals = [v for _, v in agent.window]
        g, cond = fit_affine_slope(pts, vals, x, config.lm_ridge)
        if g is None or not cond <= config.lm_cond_max:
            g, fd_pts, fd_vals = centered_fd_gradient(fi, x, h, dirs)
            evals += 2 * n
            agent.fallbacks += 1
            agent.window.extend(zip(fd_pts, fd_vals))
        return StepOutcome(mixed[i] - schedule.alpha(k) * g, False, evals)

    return _run(problem, W, config, step, init_agent=init)


RUNNERS = {
    "dds-l": run_dds_l,
    "dds-f": run_dds_f,
    "zo-dgd-fd": run_zo_dgd_fd,
    "zo-dgd-lm": run_zo_dgd_lm,
}


def run_solver(problem, W, config):
    return RUNNERS[config.algorithm](problem, W, config)
