"""
Smooth nonlinear least-squares residual functions with analytic Jacobians.

Definitions and starting points follow the classical More-Garbow-Hillstrom
collection as used for derivative-free benchmarking. Each residual vector
``F : R^n -> R^m`` becomes a decentralized problem with ``f_i = F_i^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DecentralizedProblem


class UnknownProblemError(KeyError):
    pass


@dataclass(frozen=True)
class VectorResidualProblem:
    name: str
    n: int
    m: int
    residual: Callable
    jacobian: Callable
    x0: tuple

    def to_problem(self):
        F, J = self.residual, self.jacobian

        def local(i, x):
            r = F(x)[i]
            return r * r

        def local_grad(i, x):
            return 2.0 * F(x)[i] * J(x)[i]

        return DecentralizedProblem(self.name, self.n, self.m, local, local_grad, self.x0)


# -- data --------------------------------------------------------------------

BARD_Y = np.array([
    0.14, 0.18, 0.22, 0.25, 0.29, 0.32, 0.35, 0.39,
    0.37, 0.58, 0.73, 0.96, 1.34, 2.10, 4.39,
])
KOWALIK_V = np.array([4.0, 2.0, 1.0, 0.5, 0.25, 0.167, 0.125, 0.1, 0.0833, 0.0714, 0.0625])
KOWALIK_Y = np.array([
    0.1957, 0.1947, 0.1735, 0.1600, 0.0844, 0.0627,
    0.0456, 0.0342, 0.0323, 0.0235, 0.0246,
])
MEYER_Y = np.array([
    34780.0, 28610.0, 23650.0, 19630.0, 16370.0, 13720.0, 11540.0, 9744.0,
    8261.0, 7030.0, 6005.0, 5147.0, 4427.0, 3820.0, 3307.0, 2872.0,
])
OSBORNE1_Y = np.array([
    0.844, 0.908, 0.932, 0.936, 0.925, 0.908, 0.881, 0.850, 0.818, 0.784, 0.751,
    0.718, 0.685, 0.658, 0.628, 0.603, 0.580, 0.558, 0.538, 0.522, 0.506, 0.490,
    0.478, 0.467, 0.457, 0.448, 0.438, 0.431, 0.424, 0.420, 0.414, 0.411, 0.406,
])
OSBORNE2_Y = np.array([
    1.366, 1.191, 1.112, 1.013, 0.991, 0.885, 0.831, 0.847, 0.786, 0.725,
    0.746, 0.679, 0.608, 0.655, 0.616, 0.606, 0.602, 0.626, 0.651, 0.724,
    0.649, 0.649, 0.694, 0.644, 0.624, 0.661, 0.612, 0.558, 0.533, 0.495,
    0.500, 0.423, 0.395, 0.375, 0.372, 0.391, 0.396, 0.405, 0.428, 0.429,
    0.523, 0.562, 0.607, 0.653, 0.672, 0.708, 0.633, 0.668, 0.645, 0.632,
    0.591, 0.559, 0.597, 0.625, 0.739, 0.710, 0.729, 0.720, 0.636, 0.581,
    0.428, 0.292, 0.162, 0.098, 0.054,
])


# -- residuals ---------------------------------------------------------------

def _linear_full_rank(m):
    def F(x):
        out = np.full(m, -2.0 * x.sum() / m - 1.0)
        out[: x.size] += x
        return out

    def J(x):
        jac = np.full((m, x.size), -2.0 / m)
        jac[np.arange(x.size), np.arange(x.size)] += 1.0
        return jac

    return F, J


def _linear_rank_one(m):
    def F(x):
        s = np.arange(1, x.size + 1) @ x
        return np.arange(1, m + 1) * s - 1.0

    def J(x):
        return np.outer(np.arange(1, m + 1), np.arange(1, x.size + 1)).astype(float)

    return F, J


def _rosenbrock():
    def F(x):
        return np.array([10.0 * (x[1] - x[0] ** 2), 1.0 - x[0]])

    def J(x):
        return np.array([[-20.0 * x[0], 10.0], [-1.0, 0.0]])

    return F, J


def _powell_singular():
    s5, s10 = np.sqrt(5.0), np.sqrt(10.0)

    def F(x):
        return np.array([
            x[0] + 10.0 * x[1],
            s5 * (x[2] - x[3]),
            (x[1] - 2.0 * x[2]) ** 2,
            s10 * (x[0] - x[3]) ** 2,
        ])

    def J(x):
        u = x[1] - 2.0 * x[2]
        v = x[0] - x[3]
        return np.array([
            [1.0, 10.0, 0.0, 0.0],
            [0.0, 0.0, s5, -s5],
            [0.0, 2.0 * u, -4.0 * u, 0.0],
            [2.0 * s10 * v, 0.0, 0.0, -2.0 * s10 * v],
        ])

    return F, J


def _freudenstein_roth():
    def F(x):
        t = x[1]
        return np.array([
            -13.0 + x[0] + ((5.0 - t) * t - 2.0) * t,
            -29.0 + x[0] + ((1.0 + t) * t - 14.0) * t,
        ])

    def J(x):
        t = x[1]
        return np.array([
            [1.0, 10.0 * t - 3.0 * t * t - 2.0],
            [1.0, 3.0 * t * t + 2.0 * t - 14.0],
        ])

    return F, J


def _bard():
    u = np.arange(1.0, 16.0)
    v = 16.0 - u
    w = np.minimum(u, v)

    def F(x):
        return BARD_Y - (x[0] + u / (x[1] * v + x[2] * w))

    def J(x):
        d2 = (x[1] * v + x[2] * w) ** 2
        return np.column_stack([-np.ones_like(u), u * v / d2, u * w / d2])

    return F, J


def _kowalik_osborne():
    v, y = KOWALIK_V, KOWALIK_Y

    def F(x):
        return y - x[0] * v * (v + x[1]) / (v * (v + x[2]) + x[3])

    def J(x):
        num = v * (v + x[1])
        den = v * (v + x[2]) + x[3]
        return np.column_stack([
            -num / den,
            -x[0] * v / den,
            x[0] * num * v / den**2,
            x[0] * num / den**2,
        ])

    return F, J


def _meyer():
    t = 45.0 + 5.0 * np.arange(1, 17)

    def F(x):
        return x[0] * np.exp(x[1] / (t + x[2])) - MEYER_Y

    def J(x):
        q = t + x[2]
        e = np.exp(x[1] / q)
        return np.column_stack([e, x[0] * e / q, -x[0] * e * x[1] / q**2])

    return F, J


def _watson(n):
    t = np.arange(1, 30) / 29.0
    pw = t[:, None] ** np.arange(n)  # t^(j-1), j = 1..n
    dcoef = np.zeros((29, n))
    dcoef[:, 1:] = np.arange(1, n) * pw[:, : n - 1]  # (j-1) t^(j-2)

    def F(x):
        s = pw @ x
        out = np.empty(31)
        out[:29] = dcoef @ x - s**2 - 1.0
        out[29] = x[0]
        out[30] = x[1] - x[0] ** 2 - 1.0
        return out

    def J(x):
        s = pw @ x
        jac = np.zeros((31, n))
        jac[:29] = dcoef - 2.0 * s[:, None] * pw
        jac[29, 0] = 1.0
        jac[30, 0] = -2.0 * x[0]
        jac[30, 1] = 1.0
        return jac

    return F, J


def _box_3d(m):
    t = np.arange(1, m + 1) / 10.0
    c = np.exp(-10.0 * t) - np.exp(-t)

    def F(x):
        return np.exp(-t * x[0]) - np.exp(-t * x[1]) + c * x[2]

    def J(x):
        return np.column_stack([-t * np.exp(-t * x[0]), t * np.exp(-t * x[1]), c])

    return F, J


def _jennrich_sampson(m):
    i = np.arange(1.0, m + 1)

    def F(x):
        return 2.0 + 2.0 * i - np.exp(i * x[0]) - np.exp(i * x[1])

    def J(x):
        return np.column_stack([-i * np.exp(i * x[0]), -i * np.exp(i * x[1])])

    return F, J


def _brown_dennis(m):
    t = np.arange(1, m + 1) / 5.0
    st, ct, et = np.sin(t), np.cos(t), np.exp(t)

    def F(x):
        a = x[0] + t * x[1] - et
        b = x[2] + st * x[3] - ct
        return a * a + b * b

    def J(x):
        a = x[0] + t * x[1] - et
        b = x[2] + st * x[3] - ct
        return np.column_stack([2.0 * a, 2.0 * t * a, 2.0 * b, 2.0 * st * b])

    return F, J


def _chebyquad(n, m):
    j = np.arange(1, m + 1)
    shift = np.zeros(m)
    shift[1::2] = 1.0 / (j[1::2] ** 2 - 1.0)

    def _tables(x):
        # T_j(y) and T_j'(y) for j = 1..m at y = 2x - 1
        y = 2.0 * x - 1.0
        T = np.empty((m + 1, n))
        dT = np.empty((m + 1, n))
        T[0], dT[0] = 1.0, 0.0
        T[1], dT[1] = y, 1.0
        for j in range(1, m):
            T[j + 1] = 2.0 * y * T[j] - T[j - 1]
            dT[j + 1] = 2.0 * T[j] + 2.0 * y * dT[j] - dT[j - 1]
        return T[1:], dT[1:]

    def F(x):
        T, _ = _tables(x)
        return T.sum(axis=1) / n + shift

    def J(x):
        _, dT = _tables(x)
        return 2.0 * dT / n

    return F, J


def _brown_almost_linear(n):
    def F(x):
        out = x + x.sum() - (n + 1.0)
        out[-1] = np.prod(x) - 1.0
        return out

    def J(x):
        jac = np.eye(n) + 1.0
        jac[-1] = [np.prod(np.delete(x, j)) for j in range(n)]
        return jac

    return F, J


def _osborne1():
    t = 10.0 * np.arange(33)

    def F(x):
        return OSBORNE1_Y - (x[0] + x[1] * np.exp(-x[3] * t) + x[2] * np.exp(-x[4] * t))

    def J(x):
        e4, e5 = np.exp(-x[3] * t), np.exp(-x[4] * t)
        return np.column_stack([
            -np.ones_like(t), -e4, -e5, x[1] * t * e4, x[2] * t * e5,
        ])

    return F, J


def _osborne2():
    t = np.arange(65) / 10.0

    def _parts(x):
        e1 = np.exp(-x[4] * t)
        d = [t - x[8], t - x[9], t - x[10]]
        e = [np.exp(-x[5 + k] * d[k] ** 2) for k in range(3)]
        return e1, d, e

    def F(x):
        e1, _, e = _parts(x)
        return OSBORNE2_Y - (x[0] * e1 + x[1] * e[0] + x[2] * e[1] + x[3] * e[2])

    def J(x):
        e1, d, e = _parts(x)
        jac = np.empty((65, 11))
        jac[:, 0] = -e1
        jac[:, 1:4] = -np.column_stack(e)
        jac[:, 4] = x[0] * t * e1
        for k in range(3):
            jac[:, 5 + k] = x[1 + k] * d[k] ** 2 * e[k]
            jac[:, 8 + k] = -2.0 * x[1 + k] * x[5 + k] * d[k] * e[k]
        return jac

    return F, J


def _bdqrtic(n):
    p = n - 4
    coef = np.array([1.0, 2.0, 3.0, 4.0])

    def F(x):
        out = np.empty(2 * p)
        out[:p] = -4.0 * x[:p] + 3.0
        for i in range(p):
            out[p + i] = coef @ x[i : i + 4] ** 2 + 5.0 * x[-1] ** 2
        return out

    def J(x):
        jac = np.zeros((2 * p, n))
        jac[np.arange(p), np.arange(p)] = -4.0
        for i in range(p):
            jac[p + i, i : i + 4] = 2.0 * coef * x[i : i + 4]
            jac[p + i, -1] += 10.0 * x[-1]
        return jac

    return F, J


def _cube(n):
    def F(x):
        out = 10.0 * (x - np.roll(x, 1) ** 3)
        out[0] = x[0] - 1.0
        return out

    def J(x):
        jac = 10.0 * np.eye(n)
        jac[0, 0] = 1.0
        for i in range(1, n):
            jac[i, i - 1] = -30.0 * x[i - 1] ** 2
        return jac

    return F, J


def _entry(name, n, m, pair, x0):
    F, J = pair
    return VectorResidualProblem(name, n, m, F, J, tuple(float(v) for v in x0))


def register_residual_problems():
    """Build the registered least-squares suite, in a fixed order."""
    return [
        _entry("linear_full_rank", 9, 45, _linear_full_rank(45), np.ones(9)),
        _entry("linear_rank_one", 7, 35, _linear_rank_one(35), np.ones(7)),
        _entry("rosenbrock", 2, 2, _rosenbrock(), [-1.2, 1.0]),
        _entry("powell_singular", 4, 4, _powell_singular(), [3.0, -1.0, 0.0, 1.0]),
        _entry("freudenstein_roth", 2, 2, _freudenstein_roth(), [0.5, -2.0]),
        _entry("bard", 3, 15, _bard(), np.ones(3)),
        _entry("kowalik_osborne", 4, 11, _kowalik_osborne(), [0.25, 0.39, 0.415, 0.39]),
        _entry("meyer", 3, 16, _meyer(), [0.02, 4000.0, 250.0]),
        _entry("watson", 6, 31, _watson(6), np.zeros(6)),
        _entry("box_3d", 3, 10, _box_3d(10), [0.0, 10.0, 20.0]),
        _entry("jennrich_sampson", 2, 10, _jennrich_sampson(10), [0.3, 0.4]),
        _entry("brown_dennis", 4, 20, _brown_dennis(20), [25.0, 5.0, -5.0, -1.0]),
        _entry("chebyquad", 6, 6, _chebyquad(6, 6), np.arange(1, 7) / 7.0),
        _entry("brown_almost_linear", 7, 7, _brown_almost_linear(7), np.full(7, 0.5)),
        _entry("osborne1", 5, 33, _osborne1(), [0.5, 1.5, -1.0, 0.01, 0.02]),
        _entry("osborne2", 11, 65, _osborne2(),
               [1.3, 0.65, 0.65, 0.7, 0.6, 3.0, 5.0, 7.0, 2.0, 4.5, 5.5]),
        _entry("bdqrtic", 10, 12, _bdqrtic(10), np.ones(10)),
        _entry("cube", 5, 5, _cube(5), np.full(5, 0.5)),
    ]


_REGISTRY = {p.name: p for p in register_residual_problems()}


def residual_problem_names():
    return list(_REGISTRY)


def get_residual_problem(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownProblemError(
            f"unknown problem {name!r}; registered: {', '.join(_REGISTRY)}"
        ) from None
