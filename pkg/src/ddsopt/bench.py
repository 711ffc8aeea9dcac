"""
Optimality/consensus metrics, convergence indices and profile curves.

Profile curves are exact step functions: for each solver, the sorted
finite ratios (performance) or budget-group counts (data) at which the
curve steps up by ``1/|P|``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

METRICS = ("f_iterates", "f_mean", "consensus")


@dataclass(frozen=True)
class MetricTriple:
    f_iterates: float
    f_mean: float
    consensus: float

    def __getitem__(self, name):
        return getattr(self, name)


def consensus_value(X):
    X = np.asarray(X, dtype=float)
    xbar = X.mean(axis=0)
    return float(np.linalg.norm(X - xbar, axis=1).sum())


def metrics(problem, X):
    """Sum of local values at the copies, at their mean, and the spread
    ``sum_i ||x_i - xbar||``. Uses the monitor counter channel."""
    X = np.asarray(X, dtype=float).reshape(problem.m, problem.n)
    xbar = X.mean(axis=0)
    f_it = sum(problem.evaluate(i, X[i], "monitor") for i in range(problem.m))
    f_mean = sum(problem.evaluate(i, xbar, "monitor") for i in range(problem.m))
    return MetricTriple(f_it, f_mean, consensus_value(X))


def convergence_index(trace, metric, alpha_tol, opt_low, opt_start):
    """
    First cumulative evaluation count at which ``metric <= opt_low +
    alpha_tol * (opt_start - opt_low)``; ``math.inf`` when never reached.
    """
    if not 0 < alpha_tol <= 1:
        raise ValueError("alpha_tol must lie in (0, 1]")
    if opt_low > opt_start:
        raise ValueError(f"opt_low={opt_low} exceeds opt_start={opt_start}")
    threshold = opt_low + alpha_tol * (opt_start - opt_low)
    for value, evals in zip(trace.metric(metric), trace.cum_evals):
        if value <= threshold:
            return evals
    return math.inf


def opt_start_for(trace, metric):
    """Anchor for the threshold: the value at ``k = 0``, or for consensus
    (identically zero at ``k = 0``) the largest value seen in the trace."""
    values = np.asarray(trace.metric(metric), dtype=float)
    if metric == "consensus":
        finite = values[np.isfinite(values)]
        return float(finite.max()) if finite.size else 0.0
    return float(values[0])


@dataclass(frozen=True)
class ProfileInput:
    """``t[p][s]`` evaluation counts (``math.inf`` when unsolved) and ``n[p]``."""

    t: dict
    n: dict
    solvers: tuple

    @property
    def problems(self):
        return tuple(sorted(self.t))


def profile_inputs(traces, metric, alpha_tol, dims):
    """
    Build :class:`ProfileInput` from ``traces[problem][solver] -> RunTrace``.

    ``opt_low`` is the best value any completed run reached on the problem;
    incomplete runs count as unsolved.
    """
    t = {}
    solvers = sorted({s for per in traces.values() for s in per})
    for p in sorted(traces):
        # aborted runs are kept as unsolved markers
        per = {s: tr for s, tr in traces[p].items() if tr.complete}
        vals = [np.asarray(tr.metric(metric), dtype=float) for tr in per.values()]
        finite = np.concatenate([v[np.isfinite(v)] for v in vals]) if vals else np.array([])
        opt_low = float(finite.min()) if finite.size else math.inf
        row = {}
        for s in solvers:
            tr = per.get(s)
            if tr is None or not math.isfinite(opt_low) or not len(tr.cum_evals):
                row[s] = math.inf
                continue
            start = opt_start_for(tr, metric)
            row[s] = convergence_index(tr, metric, alpha_tol, opt_low, start)
        t[p] = row
    return ProfileInput(t, {p: dims[p] for p in t}, tuple(solvers))


@dataclass(frozen=True)
class ProfileCurve:
    """Right-continuous step curve: value at ``x`` is ``#{b <= x} / total``."""

    solver: str
    breakpoints: tuple
    total: int

    def __call__(self, x):
        return float(np.searchsorted(self.breakpoints, x, side="right")) / self.total


def _check_nonempty(inputs):
    if not inputs.t:
        raise ValueError("empty problem set")


def performance_profile(inputs):
    """``rho_s(g) = |{p : t_ps / min_s' t_ps' <= g}| / |P|``.

    Counts of zero are clamped to one before forming ratios, so a problem
    solved at the start by some solver gives that solver ratio 1.
    """
    _check_nonempty(inputs)
    problems = inputs.problems
    ratios = {s: [] for s in inputs.solvers}
    for p in problems:
        row = inputs.t[p]
        best = min(row.values())
        if not math.isfinite(best):
            continue
        for s in inputs.solvers:
            if math.isfinite(row[s]):
                ratios[s].append(max(row[s], 1) / max(best, 1))
    return {
        s: ProfileCurve(s, tuple(sorted(r)), len(problems)) for s, r in ratios.items()
    }


def data_profile(inputs):
    """``d_s(k) = |{p : t_ps <= k (n_p + 1)}| / |P|``."""
    _check_nonempty(inputs)
    problems = inputs.problems
    groups = {s: [] for s in inputs.solvers}
    for p in problems:
        for s in inputs.solvers:
            t = inputs.t[p][s]
            if math.isfinite(t):
                groups[s].append(t / (inputs.n[p] + 1))
    return {
        s: ProfileCurve(s, tuple(sorted(g)), len(problems)) for s, g in groups.items()
    }


def _fmt(v):
    return format(float(v), ".17g")


def profile_filename(kind, metric, alpha_tol):
    return f"{kind}_{metric}_{alpha_tol:.0e}.csv"


def curve_grid(curves, kind):
    start = 1.0 if kind == "perf" else 0.0
    pts = {start}
    for c in curves.values():
        pts.update(b for b in c.breakpoints if b >= start)
    return sorted(pts)


def emit_profiles(curves, outdir):
    """
    Write one wide CSV per ``(kind, metric, alpha_tol)`` key of `curves` and a
    long-format ``profiles_long.csv``. Returns the written paths.

    `curves` maps ``(kind, metric, alpha_tol)`` to ``{solver: ProfileCurve}``.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {outdir}: {exc}") from exc
    written = []
    long_rows = []
    for key in sorted(curves):
        kind, metric, alpha_tol = key
        per = curves[key]
        solvers = sorted(per)
        path = outdir / profile_filename(kind, metric, alpha_tol)
        grid = curve_grid(per, kind) if solvers else []
        try:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["gamma" if kind == "perf" else "kappa"] + solvers)
                for x in grid:
                    vals = [per[s](x) for s in solvers]
                    w.writerow([_fmt(x)] + [_fmt(v) for v in vals])
                    long_rows.extend(
                        (kind, metric, f"{alpha_tol:.0e}", s, _fmt(x), _fmt(v))
                        for s, v in zip(solvers, vals)
                    )
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)
    long_path = outdir / "profiles_long.csv"
    with long_path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["profile", "metric", "alpha_tol", "solver", "x", "value"])
        w.writerows(long_rows)
    written.append(long_path)
    return written


def all_profiles(traces, dims, alpha_tols=(1e-3, 1e-6)):
    """Both profile kinds for every metric and tolerance."""
    curves = {}
    for metric in METRICS:
        for tol in alpha_tols:
            inputs = profile_inputs(traces, metric, tol, dims)
            curves[("perf", metric, tol)] = performance_profile(inputs)
            curves[("data", metric, tol)] = data_profile(inputs)
    return curves
