"""Command-line entry points: ``ddsopt <verb> ...``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import experiments as ex
from .problems import register_residual_problems, toy_problem
from .solvers import SOLVER_IDS, ConfigError


def _seeds(text):
    return [int(s) for s in text.split(",") if s.strip()]


def _add_batch_flags(p):
    p.add_argument("--config", type=Path, help="INI experiment file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seeds", type=_seeds, help="comma-separated seeds")
    p.add_argument("--problems", help="comma-separated problem selectors")
    p.add_argument("--solvers", help="comma-separated solver ids")
    p.add_argument("--gammas", help="comma-separated penalty parameters")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--workers", type=int, help="threads per run")
    p.add_argument("--jobs", type=int, help="runs executed in parallel")
    p.add_argument("--strict", action="store_true", help="exit 1 if any cell failed")


def _batch_config(args, factory):
    kw = {}
    if args.out:
        kw["output"] = args.out
    if args.seeds:
        kw["seeds"] = args.seeds
    if args.problems:
        kw["problems"] = [p.strip() for p in args.problems.split(",")]
    if args.solvers:
        kw["solvers"] = [s.strip() for s in args.solvers.split(",")]
    if args.gammas:
        kw["gammas"] = [float(g) for g in args.gammas.split(",")]
    for key in ("max_evals", "max_iters", "workers", "jobs"):
        if getattr(args, key) is not None:
            kw[key] = getattr(args, key)
    if args.config:
        base = ex.ExperimentConfig.from_ini(args.config.read_text())
        fields = {k: getattr(base, k) for k in base.__dataclass_fields__}
        fields.update(kw)
        return ex.ExperimentConfig(**fields)
    return factory(**kw)


def cmd_list_problems(args):
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["name", "n", "m", "x0"])
    for n in ex.TOY_DIMENSIONS:
        p = toy_problem(n)
        w.writerow([f"toy:{n}", p.n, p.m, " ".join(format(v, ".17g") for v in p.x0)])
    for vp in register_residual_problems():
        w.writerow([vp.name, vp.n, vp.m, " ".join(format(v, ".17g") for v in vp.x0)])
    return 0


def cmd_run(args):
    trace = ex.run_single(
        args.problem, args.solver, seed=args.seed, gamma=args.gamma,
        budget=args.budget, max_evals=args.max_evals, max_iters=args.max_iters,
        workers=args.workers, out=args.out,
    )
    if args.out is None:
        sys.stdout.write(trace.to_csv())
    print(
        f"final k={trace.iterations} evals={trace.total_evaluations} "
        f"f_iterates={trace.f_iterates[-1]:.17g} f_mean={trace.f_mean[-1]:.17g} "
        f"consensus={trace.consensus[-1]:.17g} complete={int(trace.complete)}",
        file=sys.stderr if args.out is None else sys.stdout,
    )
    if not trace.complete:
        print(f"warning: {trace.failure}", file=sys.stderr)
        return 1 if args.strict else 0
    return 0


def _report(batch, manifest, strict):
    print(f"{len(batch.cells)} runs -> {batch.output}")
    print(f"manifest: {manifest}")
    for cell in batch.failed:
        print(f"failed: {cell.problem} {cell.label} seed={cell.seed}", file=sys.stderr)
    return 1 if strict and batch.failed else 0


def cmd_toy_sweep(args):
    cfg = _batch_config(args, ex.toy_sweep_config)
    batch, manifest = ex.run_toy_sweep(cfg)
    return _report(batch, manifest, args.strict)


def cmd_suite(args):
    cfg = _batch_config(args, ex.suite_config)
    batch, manifest = ex.run_suite(cfg)
    return _report(batch, manifest, args.strict)


def cmd_profiles(args):
    out = Path(args.out)
    rows = ex.load_summary(out)
    _, written = ex.compute_profiles(out, rows)
    for p in written:
        print(p)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="ddsopt", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    sub.add_parser("list-problems", help="print registered problems as CSV")

    run = sub.add_parser("run", help="run one solver on one problem")
    run.add_argument("--problem", required=True, help="toy:<n> or a registry name")
    run.add_argument("--solver", required=True, choices=SOLVER_IDS, metavar="SOLVER",
                     help=f"one of {', '.join(SOLVER_IDS)}")
    run.add_argument("--seed", type=int, default=1)
    run.add_argument("--gamma", type=float, default=1.0)
    run.add_argument("--budget", choices=("toy", "suite"))
    run.add_argument("--max-evals", type=int)
    run.add_argument("--max-iters", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", help="trace CSV path (default: stdout)")
    run.add_argument("--strict", action="store_true")

    _add_batch_flags(sub.add_parser("toy-sweep", help="toy problems over the gamma sweep"))
    _add_batch_flags(sub.add_parser("suite", help="least-squares suite and profiles"))

    prof = sub.add_parser("profiles", help="recompute profiles from stored traces")
    prof.add_argument("--out", required=True, help="directory of a finished suite run")
    return parser


COMMANDS = {
    "list-problems": cmd_list_problems,
    "run": cmd_run,
    "toy-sweep": cmd_toy_sweep,
    "suite": cmd_suite,
    "profiles": cmd_profiles,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, KeyError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
