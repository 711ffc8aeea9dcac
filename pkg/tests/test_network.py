import numpy as np
import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from ddsopt.network import (
    Graph,
    GraphSamplingError,
    MixingMatrix,
    MixingMatrixError,
    average_project,
    build_mixing_matrix,
    generate_graph,
    mix,
    spectral_report,
)


def test_two_nodes_complete_graph_is_single_edge():
    for seed in (0, 1, 99):
        g = generate_graph(2, 1.0, seed)
        assert g.edges == frozenset({(0, 1)})


def test_five_nodes_half_density_is_connected():
    g = generate_graph(5, 0.5, 42)
    # independent BFS reachability check
    seen, todo = {0}, [0]
    while todo:
        u = todo.pop()
        for v in g.neighbors[u]:
            if v not in seen:
                seen.add(v)
                todo.append(v)
    assert seen == set(range(5))


def test_triangle_at_full_density():
    g = generate_graph(3, 1.0, 7)
    assert all(len(g.neighbors[i]) == 2 for i in range(3))


def test_generation_is_seed_deterministic():
    assert generate_graph(8, 0.5, 3).edges == generate_graph(8, 0.5, 3).edges


def test_invalid_graph_parameters():
    with pytest.raises(ValueError):
        generate_graph(0, 0.5, 0)
    with pytest.raises(ValueError):
        generate_graph(4, 0.0, 0)
    with pytest.raises(ValueError):
        generate_graph(4, 1.5, 0)


def test_disconnected_edge_set_rejected():
    with pytest.raises(ValueError):
        Graph.from_edges(4, [(0, 1), (2, 3)])


def test_tiny_density_gives_up_with_sampling_error():
    with pytest.raises(GraphSamplingError):
        generate_graph(40, 1e-6, 0)


def test_metropolis_on_two_nodes():
    W = build_mixing_matrix(generate_graph(2, 1.0, 0))
    np.testing.assert_allclose(W.W, np.full((2, 2), 0.5))
    np.testing.assert_allclose(W.eigenvalues, [1.0, 0.0], atol=1e-12)
    assert W.zeta == pytest.approx(0.0, abs=1e-12)


def test_metropolis_on_triangle():
    W = build_mixing_matrix(generate_graph(3, 1.0, 0))
    np.testing.assert_allclose(W.W, np.full((3, 3), 1 / 3))
    np.testing.assert_allclose(sorted(W.eigenvalues), [0, 0, 1], atol=1e-12)
    assert W.zeta == pytest.approx(0.0, abs=1e-12)


def test_identity_fails_lambda2():
    rep = spectral_report(np.eye(3))
    assert not rep.lambda2_below_one
    assert not rep.mixing_ok
    with pytest.raises(MixingMatrixError) as err:
        MixingMatrix.from_array(np.eye(3))
    assert "lambda2" in str(err.value) or err.value.check


def test_asymmetric_matrix_rejected_naming_the_check():
    W = np.array([[0.6, 0.4], [0.3, 0.7]])
    with pytest.raises(MixingMatrixError) as err:
        MixingMatrix.from_array(W)
    assert err.value.check


def test_support_mismatch_detected():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    rep = spectral_report(np.full((3, 3), 1 / 3), graph=g)
    assert not rep.support_matches


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.integers(0, 10_000))
def test_metropolis_matrices_satisfy_mixing_clauses(m, seed):
    W = build_mixing_matrix(generate_graph(m, 0.5, seed))
    rep = spectral_report(W)
    assert rep.mixing_ok and rep.lambda_min_above_minus_one
    np.testing.assert_allclose(W.W, W.W.T)
    np.testing.assert_allclose(W.W.sum(axis=1), 1.0, atol=1e-12)
    assert 0 <= W.zeta < 1
    J = np.full((m, m), 1 / m)
    assert np.linalg.norm(np.linalg.matrix_power(W.W, 5) - J, 2) == pytest.approx(W.zeta**5, abs=1e-9)


def test_graph_matches_networkx_view():
    g = generate_graph(6, 0.5, 5)
    G = g.to_networkx()
    assert nx.is_connected(G)
    assert sorted(G.edges()) == sorted(g.edges)


def test_mix_examples():
    W = np.full((2, 2), 0.5)
    X = np.array([[0.0, 1.0], [0.0, 1.0]])
    np.testing.assert_allclose(mix(W, X), X)
    np.testing.assert_allclose(mix(W, np.array([[2.0, 0.0], [0.0, 0.0]])), [[1, 0], [1, 0]])


def test_mix_preserves_consensus_and_mean():
    W = build_mixing_matrix(generate_graph(7, 0.5, 1))
    C = np.tile([1.0, -2.0, 3.0], (7, 1))
    np.testing.assert_allclose(mix(W, C), C)
    X = np.random.default_rng(0).standard_normal((7, 3))
    np.testing.assert_allclose(mix(W, X).mean(axis=0), X.mean(axis=0), atol=1e-14)


def test_average_project_examples():
    np.testing.assert_allclose(average_project(np.array([[0.0, 1.0], [2.0, 3.0]])), [[1, 2], [1, 2]])
    C = np.tile([4.0, 5.0], (3, 1))
    np.testing.assert_allclose(average_project(C), C)


def test_single_agent_matrix_allowed():
    W = MixingMatrix.from_array(np.ones((1, 1)))
    assert W.m == 1


def test_mixing_matrix_csv_round_trip(tmp_path):
    W = build_mixing_matrix(generate_graph(4, 0.5, 2))
    W.to_csv(tmp_path / "W.csv")
    rows = (tmp_path / "W.csv").read_text().splitlines()
    back = np.array([[float(v) for v in r.split(",")[1:]] for r in rows[1:5]])
    np.testing.assert_array_equal(back, W.W)
    assert rows[6].startswith("zeta,")
