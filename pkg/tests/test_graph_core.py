import numpy as np
import pytest

from spcons import (
    Disconnected,
    EmptyInputSet,
    LeaderFollowerSystem,
    NonPositiveWeight,
    SelfLoop,
    WeightedGraph,
    build_graph,
    grounded_matrix,
    incidence,
    laplacian,
)
from spcons.generators import random_connected_system


def test_smallest_path():
    g = build_graph([(0, 1, 1.0)])
    assert g.n_nodes == 2 and g.n_edges == 1


def test_parallel_edges_kept_distinct():
    g = build_graph([(0, 1, 1.0), (0, 1, 2.0)])
    assert [e.id for e in g.edges] == [0, 1]
    assert [e.w for e in g.edges] == [1.0, 2.0]
    np.testing.assert_array_equal(laplacian(g), [[3.0, -3.0], [-3.0, 3.0]])


def test_triangle(triangle):
    assert triangle.is_connected()
    L = laplacian(triangle)
    assert np.trace(L) == 6.0
    np.testing.assert_array_equal(np.diag(L), [2, 2, 2])
    np.testing.assert_array_equal(L[~np.eye(3, dtype=bool)], -np.ones(6))


@pytest.mark.parametrize(
    "edges, exc",
    [([(0, 1, 0.0)], NonPositiveWeight), ([(0, 1, -1.0)], NonPositiveWeight), ([(2, 2, 1.0)], SelfLoop)],
)
def test_build_graph_rejects(edges, exc):
    with pytest.raises(exc):
        build_graph(edges)


def test_unit_edge_laplacian():
    np.testing.assert_array_equal(laplacian(build_graph([(0, 1, 1.0)])), [[1, -1], [-1, 1]])


def test_laplacian_linear_in_weights(triangle):
    np.testing.assert_array_equal(laplacian(triangle.with_weights(2 * triangle.weights)), 2 * laplacian(triangle))


def test_two_assembly_routes_agree(rng):
    for _ in range(20):
        g = random_connected_system(rng, 15, 30, 2).followers
        E = incidence(g)
        L = laplacian(g)
        np.testing.assert_allclose(L, E @ np.diag(g.weights) @ E.T, atol=1e-12, rtol=0)
        np.testing.assert_allclose(L.sum(axis=1), 0, atol=1e-12)
        assert np.linalg.eigvalsh(L).min() > -1e-10


def test_grounded_single_follower():
    sys = LeaderFollowerSystem(WeightedGraph([0], []), [0])
    np.testing.assert_array_equal(grounded_matrix(sys), [[-1.0]])


def test_grounded_path():
    # followers m=0, t=1, input t
    sys = LeaderFollowerSystem(build_graph([(0, 1, 1.0)]), [1])
    np.testing.assert_array_equal(grounded_matrix(sys), -np.array([[1, -1], [-1, 2]]))


def test_grounded_two_inputs(two_input_system):
    np.testing.assert_array_equal(grounded_matrix(two_input_system), -np.array([[2, -1], [-1, 2]]))


def test_grounded_errors():
    with pytest.raises(EmptyInputSet):
        grounded_matrix(LeaderFollowerSystem(build_graph([(0, 1, 1.0)]), []))
    with pytest.raises(Disconnected):
        grounded_matrix(LeaderFollowerSystem(build_graph([(0, 1, 1.0), (2, 3, 1.0)]), [0]))


def test_system_validation():
    g = build_graph([(0, 1, 1.0)])
    with pytest.raises(ValueError):
        LeaderFollowerSystem(g, [0, 0])
    with pytest.raises(ValueError):
        LeaderFollowerSystem(g, [5])


def test_grounded_matrix_negative_definite(rng):
    for n in (2, 10, 50):
        for _ in range(5):
            m = int(rng.integers(n - 1, 2 * n))
            sys = random_connected_system(rng, n, m, int(rng.integers(1, n + 1)))
            A = grounded_matrix(sys)
            np.testing.assert_allclose(A, A.T, atol=1e-12)
            assert np.linalg.eigvalsh(A).max() < 0


def test_rescaling_scales_follower_laplacian(rng):
    sys = random_connected_system(rng, 8, 12, 3)
    c = 3.7
    L = -grounded_matrix(sys) - sys.input_matrix() @ sys.input_matrix().T
    L2 = -grounded_matrix(sys.with_weights(c * sys.followers.weights)) - sys.input_matrix() @ sys.input_matrix().T
    np.testing.assert_allclose(L2, c * L, rtol=1e-12, atol=1e-12)


def test_weight_mutation_keeps_ids():
    g = build_graph([(0, 1, 1.0), (1, 2, 2.0)])
    g.set_weight(1, 5.0)
    assert [(e.id, e.w) for e in g.edges] == [(0, 1.0), (1, 5.0)]
    with pytest.raises(NonPositiveWeight):
        g.set_weights([1.0, 0.0])
    assert g.weights.tolist() == [1.0, 5.0]


def test_grounded_graph_adds_unit_leader_edges(two_input_system):
    g, ground = two_input_system.grounded_graph()
    assert ground == 2
    assert [tuple(e) for e in g.edges] == [(0, 0, 1, 1.0), (1, 0, 2, 1.0), (2, 1, 2, 1.0)]
