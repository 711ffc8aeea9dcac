import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ddsopt.network import MixingMatrix, build_mixing_matrix, generate_graph
from ddsopt.penalty import (
    PenaltyParams,
    grad_lyapunov_local,
    lyapunov_handle,
    lyapunov_local,
    penalized_objective,
    penalty_gradient,
    penalty_residual_form,
    penalty_value,
    stacked_lyapunov_gradient,
)
from ddsopt.problems import toy_problem

HALF = MixingMatrix.from_array(np.full((2, 2), 0.5))


def _random_instance(seed, m=5, n=3):
    W = build_mixing_matrix(generate_graph(m, 0.5, seed))
    X = np.random.default_rng(seed).standard_normal((m, n))
    return W, X


def test_gamma_must_be_positive():
    with pytest.raises(ValueError):
        PenaltyParams(0.0)
    with pytest.raises(ValueError):
        penalty_value(HALF, np.zeros((2, 2)), -1.0)


def test_penalty_vanishes_at_consensus():
    W, _ = _random_instance(0)
    C = np.tile([1.0, 2.0, 3.0], (5, 1))
    assert penalty_value(W, C, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_penalty_two_agent_example():
    X = np.array([[0.0, 1.0], [0.0, -1.0]])
    assert penalty_value(HALF, X, 1.0) == pytest.approx(1.0)
    assert penalty_residual_form(HALF, X, 1.0) == pytest.approx(1.0)


def test_residual_form_differs_without_idempotence():
    W, X = _random_instance(3)
    assert penalty_value(W, X, 1.0) != pytest.approx(penalty_residual_form(W, X, 1.0), rel=1e-6)


def test_penalty_gradient_matches_fd():
    W, X = _random_instance(2)
    g = penalty_gradient(W, X, 2.0)
    h = 1e-6
    G = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        G[idx] = (penalty_value(W, X + E, 2.0) - penalty_value(W, X - E, 2.0)) / (2 * h)
    np.testing.assert_allclose(g, G, atol=1e-7)


def test_lyapunov_at_zero_equals_local_value():
    W, X = _random_instance(1)
    f = lambda x: 3.5
    assert lyapunov_local(2, np.zeros(3), X, W, 1.0, f) == 3.5


def test_lyapunov_two_agent_example():
    X = np.array([[0.0, 1.0], [0.0, 1.0]])
    assert lyapunov_local(0, X[0], X, HALF, 1.0, lambda x: 0.0) == pytest.approx(-0.25)


def test_missing_neighbor_copy_names_the_pair():
    with pytest.raises(KeyError, match="agent 0.*neighbour 1"):
        lyapunov_local(0, np.zeros(2), {0: np.zeros(2)}, HALF, 1.0, lambda x: 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_sum_of_lyapunov_functions_identity(seed):
    W, X = _random_instance(seed)
    gamma = 0.5 + seed
    p = toy_problem(3, seed=seed)
    f = [lambda y, i=i: p.evaluate(i % 3, y, "monitor") for i in range(5)]
    lhs = sum(lyapunov_local(i, X[i], X, W, gamma, f[i]) for i in range(5)) - sum(
        f[i](X[i]) for i in range(5)
    )
    Wa = W.W
    direct = (np.sum((1 - np.diag(Wa)) * np.sum(X**2, axis=1))
              - 2 * sum(Wa[i, j] * X[i] @ X[j] for i in range(5) for j in range(5) if j != i)) / (2 * gamma)
    via_penalty = 2 * penalty_value(W, X, gamma) - np.sum((1 - np.diag(Wa)) * np.sum(X**2, axis=1)) / (2 * gamma)
    assert lhs == pytest.approx(direct, abs=1e-10)
    assert lhs == pytest.approx(via_penalty, abs=1e-10)


def test_gradient_counterexample_values():
    X = np.array([[0.0, 1.0], [0.0, 1.0]])
    g = grad_lyapunov_local(0, X[0], X, HALF, 1.0, lambda x: np.array([2 * (x[0] - 1), 0.0]))
    np.testing.assert_allclose(g, [-2.0, 0.0])


def test_gradient_at_consensus_is_local_gradient():
    W, _ = _random_instance(4)
    C = np.tile([0.3, -0.1, 2.0], (5, 1))
    gf = lambda x: np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(grad_lyapunov_local(1, C[1], C, W, 7.0, gf), [1, 2, 3], atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 1000), st.floats(0.1, 100.0))
def test_stacked_gradient_equals_global_form(seed, gamma):
    W, X = _random_instance(seed, m=4, n=4)
    p = toy_problem(4, seed=seed)
    G = stacked_lyapunov_gradient(p, W, X, gamma)
    grad_F = np.vstack([p.gradient(i, X[i]) for i in range(4)])
    np.testing.assert_allclose(G, grad_F + (X - W.W @ X) / gamma, atol=1e-10)


def test_penalized_objective_limits():
    W, X = _random_instance(5, m=4, n=4)
    p = toy_problem(4, seed=5)
    F = sum(p.evaluate(i, X[i], "monitor") for i in range(4))
    assert penalized_objective(W, X, 1e12, p) == pytest.approx(F, abs=1e-9)
    C = np.tile(X[0], (4, 1))
    assert penalized_objective(W, C, 1.0, p) == pytest.approx(sum(p.evaluate(i, C[i]) for i in range(4)))
    assert p.total_evaluations("solver") == 4  # only the explicit calls above


def test_handle_matches_lyapunov_local():
    W, X = _random_instance(6)
    f = lambda y: float(np.sum(np.sin(y)))
    L = lyapunov_handle(W, 3, X, 2.0, f)
    y = np.array([0.1, -0.4, 1.3])
    assert L(y) == pytest.approx(lyapunov_local(3, y, X, W, 2.0, f), rel=1e-14)
