import numpy as np
import pytest

from rcdarma.errors import AssumptionViolation, GraphGenerationError
from rcdarma.network import (
    Graph, WeightMatrix, complete_graph, erdos_renyi, laplacian_weights, metropolis_weights,
    path_graph, ring_graph, star_graph,
)


def test_edges_normalized_and_deduplicated():
    g = Graph(3, ((1, 0), (0, 1), (2, 1)))
    assert g.edges == ((0, 1), (1, 2))


@pytest.mark.parametrize("edges", [((0, 0),), ((0, 5),)])
def test_bad_edges_rejected(edges):
    with pytest.raises(ValueError):
        Graph(3, edges)


def test_connectivity():
    assert path_graph(5).is_connected
    assert not Graph(4, ((0, 1), (2, 3))).is_connected


def test_laplacian_rows_sum_to_zero():
    lap = ring_graph(6).laplacian()
    np.testing.assert_allclose(lap.sum(axis=1), 0)
    assert np.all(np.diag(lap) == 2)


def test_graph_json_round_trip():
    g = star_graph(5)
    assert Graph.from_json(g.to_json()) == g


def test_erdos_renyi_is_seeded_and_connected():
    a = erdos_renyi(40, 2 * np.log(40) / 40, 3)
    assert a == erdos_renyi(40, 2 * np.log(40) / 40, 3)
    assert a.is_connected


def test_erdos_renyi_gives_up():
    with pytest.raises(GraphGenerationError):
        erdos_renyi(30, 0.0, 1, max_tries=3)


def test_single_node_graph():
    assert laplacian_weights(Graph(1)).entries.tolist() == [[1.0]]


@pytest.mark.parametrize("rule", [laplacian_weights, metropolis_weights])
@pytest.mark.parametrize("graph", [complete_graph(5), path_graph(6), ring_graph(7), star_graph(6)])
def test_weight_rules_doubly_stochastic(rule, graph):
    w = rule(graph)
    np.testing.assert_allclose(w.entries.sum(axis=0), 1, atol=1e-12)
    np.testing.assert_allclose(w.entries.sum(axis=1), 1, atol=1e-12)
    assert w.consensus_gap < 1
    assert abs(w.spectrum[0] - 1) < 1e-12


def test_complete_graph_laplacian_weights():
    # Laplacian eigenvalues 0, 4, 4, 4 give W = I - L / 8
    w = laplacian_weights(complete_graph(4))
    np.testing.assert_allclose(w.entries, np.eye(4) - complete_graph(4).laplacian() / 8, atol=1e-12)
    assert w.consensus_gap == pytest.approx(0.5)


def test_powers_converge_to_average():
    w = metropolis_weights(ring_graph(8))
    wk = np.linalg.matrix_power(w.entries, 200)
    assert np.abs(wk - 1 / 8).max() < max(1e-8, 2 * w.consensus_gap**200)


def test_disconnected_graph_rejected():
    with pytest.raises(AssumptionViolation) as err:
        laplacian_weights(Graph(4, ((0, 1), (2, 3))))
    assert err.value.kind == "disconnected"


def test_bipartite_identity_free_matrix_rejected():
    # swap matrix on two nodes has eigenvalue -1
    with pytest.raises(AssumptionViolation) as err:
        WeightMatrix.from_entries([[0.0, 1.0], [1.0, 0.0]])
    assert err.value.kind == "weight_spectrum"


def test_non_stochastic_rejected():
    with pytest.raises(AssumptionViolation):
        WeightMatrix.from_entries([[0.5, 0.4], [0.4, 0.5]])


def test_sparsity_must_match_graph():
    with pytest.raises(AssumptionViolation):
        WeightMatrix.from_entries(np.full((3, 3), 1 / 3), path_graph(3))


def test_weights_json_round_trip():
    w = metropolis_weights(path_graph(4))
    np.testing.assert_allclose(WeightMatrix.from_json(w.to_json()).entries, w.entries)
