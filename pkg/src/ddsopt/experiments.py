"""
Experiment configuration and batch orchestration.

A batch is a list of cells ``(problem, solver, gamma, seed)``. One
communication graph is drawn per ``(problem, seed)`` and shared by every
solver in that cell group.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import bench
from .network import build_mixing_matrix, generate_graph
from .problems import resolve_problem, residual_problem_names
from .solvers import GAMMA_SOLVERS, SOLVER_IDS, ConfigError, RunTrace, run_solver, solver_config
from .solvers import config as C

TOY_DIMENSIONS = (5, 10, 15)
TOY_GAMMAS = (1.0, 10.0, 100.0)
ALPHA_TOLS = (1e-3, 1e-6)
SUITE_EVAL_FACTOR = 400
SUITE_MAX_ITERS = 500
TOY_EVAL_FACTOR = 100

SUMMARY_COLUMNS = (
    "problem", "solver", "gamma", "seed", "n", "m", "iterations", "cum_evals",
    "complete", "stop_reason", "f_iterates", "f_mean", "consensus", "trace",
)


@dataclass
class ExperimentConfig:
    kind: str = "suite"
    problems: list = field(default_factory=lambda: ["all"])
    solvers: list = field(default_factory=lambda: list(SOLVER_IDS))
    gammas: list = field(default_factory=lambda: [1.0])
    seeds: list = field(default_factory=lambda: [1])
    p_c: float = C.P_C
    budget: str = "suite"
    max_evals: int | None = None
    max_iters: int | None = None
    output: str = "out"
    workers: int = 1
    jobs: int = 1

    def __post_init__(self):
        if self.kind not in ("single", "toy-sweep", "suite"):
            raise ConfigError(f"experiment.kind: unknown {self.kind!r}")
        if not self.seeds:
            raise ConfigError("experiment.seeds: at least one seed is required")
        for s in self.solvers:
            if s not in SOLVER_IDS:
                raise ConfigError(f"experiment.solvers: unknown {s!r}; valid: {', '.join(SOLVER_IDS)}")
        if self.budget not in ("toy", "suite"):
            raise ConfigError(f"budget.rule: unknown {self.budget!r}; valid: toy, suite")
        if not self.gammas or any(not g > 0 for g in self.gammas):
            raise ConfigError("penalty.gammas: need positive values")
        if not 0 < self.p_c <= 1:
            raise ConfigError("network.p_c: must lie in (0, 1]")
        for p in self.problem_list():
            try:
                resolve_problem(p, 0)
            except KeyError as exc:
                raise ConfigError(f"experiment.problems: {exc.args[0]}") from None

    def problem_list(self):
        if self.problems == ["all"]:
            return residual_problem_names()
        return list(self.problems)

    # -- plain-text form ----------------------------------------------------

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp["experiment"] = {
            "kind": self.kind,
            "problems": ", ".join(self.problems),
            "solvers": ", ".join(self.solvers),
            "seeds": ", ".join(str(s) for s in self.seeds),
            "output": self.output,
            "workers": str(self.workers),
            "jobs": str(self.jobs),
        }
        cp["network"] = {"p_c": repr(self.p_c)}
        cp["penalty"] = {"gammas": ", ".join(repr(float(g)) for g in self.gammas)}
        cp["budget"] = {
            "rule": self.budget,
            "max_evals": "" if self.max_evals is None else str(self.max_evals),
            "max_iters": "" if self.max_iters is None else str(self.max_iters),
        }
        cp["constants"] = protocol_constants()
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.read_string(text)

        def get(section, key, default=None):
            if cp.has_option(section, key):
                v = cp.get(section, key).strip()
                return v if v != "" else default
            return default

        def listing(section, key, conv, default):
            raw = get(section, key)
            if raw is None:
                return default
            try:
                return [conv(v.strip()) for v in raw.split(",") if v.strip()]
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}: {exc}") from None

        def number(section, key, conv, default):
            raw = get(section, key)
            if raw is None:
                return default
            try:
                return conv(raw)
            except ValueError:
                raise ConfigError(f"{section}.{key}: cannot parse {raw!r}") from None

        defaults = cls.__dataclass_fields__
        kind = get("experiment", "kind", "suite")
        return cls(
            kind=kind,
            problems=listing("experiment", "problems", str, ["all"]),
            solvers=listing("experiment", "solvers", str, list(SOLVER_IDS)),
            gammas=listing("penalty", "gammas", float, [1.0]),
            seeds=listing("experiment", "seeds", int, [1]),
            p_c=number("network", "p_c", float, C.P_C),
            budget=get("budget", "rule", "toy" if kind == "toy-sweep" else "suite"),
            max_evals=number("budget", "max_evals", int, None),
            max_iters=number("budget", "max_iters", int, None),
            output=get("experiment", "output", defaults["output"].default),
            workers=number("experiment", "workers", int, 1),
            jobs=number("experiment", "jobs", int, 1),
        )


def protocol_constants():
    return {
        "p_c": repr(C.P_C),
        "fd_step": repr(C.FD_STEP),
        "theta": repr(C.THETA),
        "forcing_c": repr(C.FORCING_C),
        "tau_rho": repr(C.TAU_RHO),
        "tau_alpha": repr(C.TAU_ALPHA),
        "alpha0": "norm(x0)+1",
        "lm_window": "2n+1",
        "lm_ridge": repr(C.LM_RIDGE),
        "lm_cond_max": repr(C.LM_COND_MAX),
        "toy_budget": f"{TOY_EVAL_FACTOR}*n local evaluations",
        "suite_budget": f"{SUITE_EVAL_FACTOR}*n*m local evaluations or {SUITE_MAX_ITERS} iterations",
        "evaluation_count": "total local evaluations over all agents (solver channel)",
        "alpha_tols": ", ".join(repr(a) for a in ALPHA_TOLS),
        "consensus_opt_start": "maximum consensus value in the trace",
    }


def budget_for(rule, n, m, max_evals=None, max_iters=None):
    if rule == "toy":
        evals, iters = TOY_EVAL_FACTOR * n, None
    else:
        evals, iters = SUITE_EVAL_FACTOR * n * m, SUITE_MAX_ITERS
    return (max_evals if max_evals is not None else evals,
            max_iters if max_iters is not None else iters)


def graph_seed(problem, seed):
    """Seed of the communication graph shared by all solvers on ``(problem, seed)``."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(problem.encode())])
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class Cell:
    problem: str
    solver: str
    gamma: float | None
    seed: int

    @property
    def label(self):
        return self.solver if self.gamma is None else f"{self.solver}(gamma={self.gamma:g})"

    @property
    def stem(self):
        g = "" if self.gamma is None else f"_gamma{self.gamma:g}"
        return f"{self.solver}{g}_seed{self.seed}"


def make_cells(cfg):
    cells = []
    for p in cfg.problem_list():
        for seed in cfg.seeds:
            for s in cfg.solvers:
                if s in GAMMA_SOLVERS:
                    cells.extend(Cell(p, s, float(g), seed) for g in cfg.gammas)
                else:
                    cells.append(Cell(p, s, None, seed))
    return cells


def build_instance(problem_selector, seed, p_c=C.P_C):
    problem = resolve_problem(problem_selector, seed)
    W = build_mixing_matrix(generate_graph(problem.m, p_c, graph_seed(problem_selector, seed)))
    return problem, W


def cell_config(cell, cfg, problem, workers=1, **extra):
    evals, iters = budget_for(cfg.budget, problem.n, problem.m, cfg.max_evals, cfg.max_iters)
    kw = dict(max_evals=evals, max_iters=iters, seed=cell.seed, workers=workers, **extra)
    if cell.gamma is not None:
        kw["gamma"] = cell.gamma
    return solver_config(cell.solver, **kw).with_(label=cell.label)


def run_cell(cell, cfg, workers=1):
    problem, W = build_instance(cell.problem, cell.seed, cfg.p_c)
    config = cell_config(cell, cfg, problem, workers)
    trace = run_solver(problem, W, config)
    return trace, config, problem


def _cell_job(args):
    cell, cfg = args
    trace, config, problem = run_cell(cell, cfg, cfg.workers)
    return trace.to_csv(), _summary_row(cell, trace, problem, ""), config.describe()


def _summary_row(cell, trace, problem, path):
    return {
        "problem": cell.problem,
        "solver": cell.solver,
        "gamma": "" if cell.gamma is None else repr(cell.gamma),
        "seed": str(cell.seed),
        "n": str(problem.n),
        "m": str(problem.m),
        "iterations": str(trace.iterations),
        "cum_evals": str(trace.total_evaluations),
        "complete": "1" if trace.complete else "0",
        "stop_reason": trace.stop_reason,
        "f_iterates": format(trace.f_iterates[-1], ".17g"),
        "f_mean": format(trace.f_mean[-1], ".17g"),
        "consensus": format(trace.consensus[-1], ".17g"),
        "trace": path,
    }


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


@dataclass
class BatchResult:
    output: Path
    cells: list
    rows: list
    traces: dict
    failed: list
    files: list


def run_batch(cfg):
    """Run every cell, write traces, ``summary.csv``, ``config.ini``."""
    out = Path(cfg.output)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    cells = make_cells(cfg)
    jobs = [(c, cfg) for c in cells]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as ex:
            results = list(ex.map(_cell_job, jobs))
    else:
        results = [_cell_job(j) for j in jobs]
    rows, traces, failed, files, configs = [], {}, [], [], []
    for cell, (text, row, desc) in zip(cells, results):
        rel = Path("traces") / cell.problem.replace(":", "") / f"{cell.stem}.csv"
        (out / rel).parent.mkdir(parents=True, exist_ok=True)
        (out / rel).write_text(text)
        row["trace"] = rel.as_posix()
        rows.append(row)
        files.append(rel)
        configs.append(desc)
        if row["complete"] != "1":
            failed.append(cell)
    _write_csv(out / "summary.csv", SUMMARY_COLUMNS, rows)
    (out / "config.ini").write_text(cfg.to_ini())
    files += [Path("summary.csv"), Path("config.ini")]
    return BatchResult(out, cells, rows, _load_traces(out, rows), failed, files), configs


def _load_traces(out, rows):
    traces = {}
    for r in rows:
        label = r["solver"] if r["gamma"] == "" else f"{r['solver']}(gamma={float(r['gamma']):g})"
        tr = RunTrace.from_csv(Path(out) / r["trace"], label, r["problem"], int(r["m"]), int(r["n"]))
        tr.complete = r["complete"] == "1"
        traces.setdefault((r["problem"], r["seed"]), {})[label] = tr
    return traces


def load_summary(out):
    with open(Path(out) / "summary.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def compute_profiles(out, rows, alpha_tols=ALPHA_TOLS):
    """Profiles over problem instances ``(problem, seed)``; writes the CSVs."""
    traces = _load_traces(out, rows)
    keyed = {f"{p}#seed{s}": per for (p, s), per in traces.items()}
    dims = {}
    for r in rows:
        dims[f"{r['problem']}#seed{r['seed']}"] = int(r["n"])
    curves = bench.all_profiles(keyed, dims, alpha_tols)
    return curves, bench.emit_profiles(curves, Path(out) / "profiles")


def write_manifest(out, cfg, cells, configs, files):
    out = Path(out)
    manifest = {
        "experiment": asdict(cfg),
        "constants": protocol_constants(),
        "cells": [
            {"problem": c.problem, "solver": c.solver, "gamma": c.gamma, "seed": c.seed,
             "graph_seed": graph_seed(c.problem, c.seed), "config": d}
            for c, d in zip(cells, configs)
        ],
        "files": {Path(f).as_posix(): _sha256(out / f) for f in sorted(files, key=str)},
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(v):
    return str(v)


def run_toy_sweep(cfg):
    """Every solver on the toy instances over the gamma sweep (gamma only
    multiplies the DDS-L runs)."""
    batch, configs = run_batch(cfg)
    manifest = write_manifest(batch.output, cfg, batch.cells, configs, batch.files)
    return batch, manifest


def run_suite(cfg):
    """Every solver on the least-squares suite, then all profile CSVs."""
    batch, configs = run_batch(cfg)
    _, written = compute_profiles(batch.output, batch.rows)
    files = batch.files + [p.relative_to(batch.output) for p in written]
    manifest = write_manifest(batch.output, cfg, batch.cells, configs, files)
    return batch, manifest


def toy_sweep_config(**kw):
    kw.setdefault("problems", [f"toy:{n}" for n in TOY_DIMENSIONS])
    kw.setdefault("gammas", list(TOY_GAMMAS))
    return ExperimentConfig(kind="toy-sweep", budget="toy", **kw)


def suite_config(**kw):
    return ExperimentConfig(kind="suite", budget="suite", **kw)


def run_single(problem, solver, seed=1, gamma=1.0, budget=None, max_evals=None,
               max_iters=None, workers=1, p_c=C.P_C, out=None):
    """One ``(problem, solver, seed)`` run; writes the trace CSV when `out` is given."""
    if solver not in SOLVER_IDS:
        raise ConfigError(f"solver: unknown {solver!r}; valid: {', '.join(SOLVER_IDS)}")
    rule = budget or ("toy" if problem.startswith("toy") else "suite")
    cfg = ExperimentConfig(kind="single", problems=[problem], solvers=[solver],
                           gammas=[gamma], seeds=[seed], p_c=p_c, budget=rule,
                           max_evals=max_evals, max_iters=max_iters, workers=workers)
    cell = Cell(problem, solver, float(gamma) if solver in GAMMA_SOLVERS else None, seed)
    trace, _, _ = run_cell(cell, cfg, workers)
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        trace.to_csv(out)
    return trace
