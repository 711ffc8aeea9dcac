"""Decentralized test problems."""

from .core import DecentralizedProblem, EvaluationFailure, eval_local, fd_gradient, relative_error
from .residuals import (
    UnknownProblemError,
    VectorResidualProblem,
    get_residual_problem,
    register_residual_problems,
    residual_problem_names,
)
from .toy import toy_problem


def resolve_problem(selector, seed=0):
    """
    Build a problem from a selector string.

    ``toy:<n>`` (or ``toy<n>``) gives the separable toy problem seeded with
    `seed`; anything else is looked up in the least-squares registry.
    """
    if selector.startswith("toy"):
        digits = selector[3:].lstrip(":")
        if not digits.isdigit():
            raise UnknownProblemError(f"malformed toy selector {selector!r}; use toy:<n>")
        return toy_problem(int(digits), seed)
    return get_residual_problem(selector).to_problem()


__all__ = [
    "DecentralizedProblem",
    "EvaluationFailure",
    "UnknownProblemError",
    "VectorResidualProblem",
    "eval_local",
    "fd_gradient",
    "get_residual_problem",
    "register_residual_problems",
    "relative_error",
    "resolve_problem",
    "residual_problem_names",
    "toy_problem",
]
