"""Solver configuration and the named solver variants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..searchcore import Adaptive, ForcingFunction, Vanishing, canonical_pss

ALGORITHMS = ("dds-l", "dds-f", "zo-dgd-fd", "zo-dgd-lm")

# protocol constants
P_C = 0.5
FD_STEP = 1e-7
THETA = 0.5
FORCING_C = 1e-8
TAU_RHO = 0.8
TAU_ALPHA = 0.6
LM_RIDGE = 1e-10
LM_COND_MAX = 1e12


class ConfigError(ValueError):
    pass


def default_poll_sets(n, agent):
    return canonical_pss(n)


@dataclass(frozen=True)
class SolverConfig:
    """
    Everything one solver run consumes.

    ``alpha0=None`` selects the rule ``alpha0 = ||x0|| + 1``. ``max_evals``
    counts solver-channel local evaluations summed over agents.
    ``initial_iterates`` overrides the identical start ``x0`` for every
    agent with an ``(m, n)`` array; it exists for diagnostics such as
    checking that DDS-F without successes is pure mixing.
    """

    algorithm: str
    schedule: Vanishing | Adaptive = field(default_factory=lambda: Vanishing(None, TAU_ALPHA))
    forcing: ForcingFunction | None = None
    gamma: float | None = None
    max_evals: int | None = None
    max_iters: int | None = None
    seed: int = 0
    alpha0: float | None = None
    poll_sets: Callable | None = None
    fd_step: float = FD_STEP
    lm_ridge: float = LM_RIDGE
    lm_cond_max: float = LM_COND_MAX
    workers: int = 1
    record_iterates: bool = False
    initial_iterates: np.ndarray | None = None
    label: str | None = None

    def __post_init__(self):
        a = self.algorithm
        if a not in ALGORITHMS:
            raise ConfigError(f"algorithm: unknown {a!r}; valid: {', '.join(ALGORITHMS)}")
        if a == "dds-l":
            if self.gamma is None or not self.gamma > 0:
                raise ConfigError("gamma: dds-l needs a positive penalty parameter")
        elif self.gamma is not None:
            raise ConfigError(f"gamma: not used by {a}")
        if a.startswith("dds"):
            if self.forcing is None:
                raise ConfigError("forcing: direct-search solvers need a forcing function")
        else:
            if self.forcing is not None:
                raise ConfigError(f"forcing: not used by {a}")
            if not isinstance(self.schedule, Vanishing):
                raise ConfigError(f"schedule: {a} needs the shared vanishing schedule")
        if self.max_evals is None and self.max_iters is None:
            raise ConfigError("budget: set max_evals and/or max_iters")
        if self.workers < 1:
            raise ConfigError("workers: must be at least 1")
        if self.alpha0 is not None and not self.alpha0 > 0:
            raise ConfigError("alpha0: must be positive")

    @property
    def name(self):
        return self.label or self.algorithm

    def initial_stepsize(self, x0):
        if self.alpha0 is not None:
            return float(self.alpha0)
        if isinstance(self.schedule, Vanishing) and self.schedule.alpha0 is not None:
            return float(self.schedule.alpha0)
        return float(np.linalg.norm(x0)) + 1.0

    def resolved_schedule(self, x0):
        if isinstance(self.schedule, Vanishing):
            return Vanishing(self.initial_stepsize(x0), self.schedule.tau_alpha)
        return self.schedule

    def poll_set(self, n, agent):
        return (self.poll_sets or default_poll_sets)(n, agent)

    def with_(self, **changes):
        return replace(self, **changes)

    def describe(self):
        """Flat dict of every parameter, for manifests."""
        s = self.schedule
        out = {
            "algorithm": self.algorithm,
            "label": self.name,
            "schedule": type(s).__name__.lower(),
            "tau_alpha": s.tau_alpha,
            "alpha0": "norm(x0)+1" if self.alpha0 is None and getattr(s, "alpha0", None) is None
            else self.alpha0 if self.alpha0 is not None else s.alpha0,
            "max_evals": self.max_evals,
            "max_iters": self.max_iters,
            "seed": self.seed,
        }
        if isinstance(s, Adaptive):
            out.update(theta=s.theta, c_min=s.c_min, c_max=str(s.c_max))
        if self.forcing is not None:
            out.update(forcing_c=self.forcing.c, tau_rho=self.forcing.tau_rho)
        if self.gamma is not None:
            out["gamma"] = self.gamma
        if self.algorithm.startswith("zo"):
            out["fd_step"] = self.fd_step
        if self.algorithm == "zo-dgd-lm":
            out.update(lm_window="2n+1", lm_ridge=self.lm_ridge, lm_cond_max=self.lm_cond_max)
        return out


SOLVER_IDS = (
    "dds-l-vanishing",
    "dds-l-adaptive",
    "dds-f-vanishing",
    "dds-f-adaptive",
    "zo-dgd-fd",
    "zo-dgd-lm",
)

GAMMA_SOLVERS = ("dds-l-vanishing", "dds-l-adaptive")


def solver_config(solver_id, *, gamma=1.0, **overrides):
    """Named variant with the default experiment constants."""
    forcing = ForcingFunction(FORCING_C, TAU_RHO)
    if solver_id not in SOLVER_IDS:
        raise ConfigError(f"solver: unknown {solver_id!r}; valid: {', '.join(SOLVER_IDS)}")
    if solver_id.startswith("zo"):
        base = SolverConfig(solver_id, label=solver_id, **overrides)
        return base
    algorithm, _, variant = solver_id.rpartition("-")
    schedule = Vanishing(None, TAU_ALPHA) if variant == "vanishing" else Adaptive(THETA, 0.0, math.inf, TAU_ALPHA)
    return SolverConfig(
        algorithm,
        schedule=schedule,
        forcing=forcing,
        gamma=gamma if algorithm == "dds-l" else None,
        label=solver_id,
        **overrides,
    )
