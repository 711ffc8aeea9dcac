"""Separable logistic/log test problem with one agent per coordinate."""

import numpy as np

from .core import DecentralizedProblem


def toy_local(a, b, t):
    return a / (1.0 + np.exp(-t)) + b * np.log1p(t * t)


def toy_local_derivative(a, b, t):
    e = np.exp(-t)
    return a * e / (1.0 + e) ** 2 + 2.0 * b * t / (1.0 + t * t)


def toy_problem(n, seed=0, a=None, b=None):
    """
    ``f_i(x) = a_i / (1 + exp(-x_i)) + b_i log(1 + x_i^2)`` for ``i < n``.

    Coefficients are i.i.d. standard normal drawn from `seed` unless given
    explicitly. Starts from the all-ones vector.
    """
    if n < 2:
        raise ValueError("toy problem needs n >= 2")
    if a is None or b is None:
        rng = np.random.default_rng(seed)
        draw = rng.standard_normal((2, n))
        a = draw[0] if a is None else a
        b = draw[1] if b is None else b
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def local(i, x):
        return toy_local(a[i], b[i], x[i])

    def local_grad(i, x):
        g = np.zeros_like(x)
        g[i] = toy_local_derivative(a[i], b[i], x[i])
        return g

    return DecentralizedProblem(
        f"toy{n}", n, n, local, local_grad, np.ones(n),
        meta={"a": a.tolist(), "b": b.tolist(), "seed": seed},
    )
