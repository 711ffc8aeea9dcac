"""Per-iteration run records and their CSV form."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = (
    "k",
    "metric_f_iterates",
    "metric_f_mean",
    "metric_consensus",
    "alpha_min",
    "alpha_max",
    "successes",
    "cum_evals",
)


@dataclass
class RunTrace:
    """
    Row ``k`` describes the iterate ``X^(k)``: its three metrics, the
    stepsizes ``alpha_i^(k)`` about to be used, the number of agents whose
    step into ``X^(k)`` was successful (0 for ``k = 0`` and for the
    gradient-type solvers, which have no acceptance test) and the solver
    evaluations spent so far.

    ``step_success[k]`` holds the per-agent flags of iteration ``k``.
    """

    solver: str
    problem: str
    m: int
    n: int
    k: list = field(default_factory=list)
    f_iterates: list = field(default_factory=list)
    f_mean: list = field(default_factory=list)
    consensus: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    successes: list = field(default_factory=list)
    cum_evals: list = field(default_factory=list)
    step_success: list = field(default_factory=list)
    iterates: list | None = None
    final_X: np.ndarray | None = None
    agent_evals: np.ndarray | None = None
    complete: bool = True
    failure: str | None = None
    stop_reason: str = ""
    theory_compliant: bool = True
    fallbacks: int = 0

    def record(self, k, triple, alphas, successes, cum_evals, X=None):
        self.k.append(k)
        self.f_iterates.append(triple.f_iterates)
        self.f_mean.append(triple.f_mean)
        self.consensus.append(triple.consensus)
        self.alphas.append(np.array(alphas, dtype=float))
        self.successes.append(int(successes))
        self.cum_evals.append(int(cum_evals))
        if self.iterates is not None and X is not None:
            self.iterates.append(np.array(X, copy=True))

    def metric(self, name):
        return {
            "f_iterates": self.f_iterates,
            "f_mean": self.f_mean,
            "consensus": self.consensus,
        }[name]

    @property
    def iterations(self):
        return len(self.k) - 1

    @property
    def total_evaluations(self):
        return self.cum_evals[-1] if self.cum_evals else 0

    def rows(self):
        for idx in range(len(self.k)):
            a = self.alphas[idx]
            yield (
                self.k[idx],
                self.f_iterates[idx],
                self.f_mean[idx],
                self.consensus[idx],
                float(a.min()),
                float(a.max()),
                self.successes[idx],
                self.cum_evals[idx],
            )

    def to_csv(self, path=None):
        """CSV text (floats at 17 significant digits); also written to `path`."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for row in self.rows():
            w.writerow([
                v if isinstance(v, int) else format(v, ".17g") for v in row
            ])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, path, solver="", problem="", m=0, n=0):
        """Rebuild the scalar columns (per-agent data is not stored)."""
        tr = cls(solver, problem, m, n)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != TRACE_COLUMNS:
                raise ValueError(f"{path}: unexpected header {header}")
            for row in reader:
                tr.k.append(int(row[0]))
                tr.f_iterates.append(float(row[1]))
                tr.f_mean.append(float(row[2]))
                tr.consensus.append(float(row[3]))
                tr.alphas.append(np.array([float(row[4]), float(row[5])]))
                tr.successes.append(int(row[6]))
                tr.cum_evals.append(int(row[7]))
        return tr
