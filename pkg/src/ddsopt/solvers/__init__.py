"""Decentralized direct-search and zeroth-order gradient solvers."""

from .config import (
    ALGORITHMS,
    GAMMA_SOLVERS,
    SOLVER_IDS,
    ConfigError,
    SolverConfig,
    solver_config,
)
from .drivers import (
    AgentState,
    centered_fd_gradient,
    fit_affine_slope,
    run_dds_f,
    run_dds_l,
    run_solver,
    run_zo_dgd_fd,
    run_zo_dgd_lm,
)
from .oracle import Lemma1Check, lemma1_checks, lemma1_oracle, lyapunov_constants
from .trace import TRACE_COLUMNS, RunTrace

__all__ = [
    "ALGORITHMS",
    "AgentState",
    "ConfigError",
    "GAMMA_SOLVERS",
    "Lemma1Check",
    "RunTrace",
    "SOLVER_IDS",
    "SolverConfig",
    "TRACE_COLUMNS",
    "centered_fd_gradient",
    "fit_affine_slope",
    "lemma1_checks",
    "lemma1_oracle",
    "lyapunov_constants",
    "run_dds_f",
    "run_dds_l",
    "run_solver",
    "run_zo_dgd_fd",
    "run_zo_dgd_lm",
    "solver_config",
]
