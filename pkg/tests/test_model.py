import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from graphlqr.model import (
    CostWeights,
    InteractionGraph,
    LtiModel,
    assemble_global,
    controllability_check,
    global_cost,
    laplacian,
    load_graph,
    make_graph,
)


def test_laplacian_edgeless():
    L = laplacian(make_graph("edgeless", 3))
    assert_array_equal(L, np.zeros((3, 3)))


def test_laplacian_path():
    L = laplacian(make_graph("path", 3))
    assert_array_equal(L, [[1, -1, 0], [-1, 2, -1], [0, -1, 1]])


def test_laplacian_complete():
    L = laplacian(make_graph("complete", 3))
    assert_array_equal(L, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_laplacian_row_sums_and_psd_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(25):
        N = int(rng.integers(1, 9))
        pairs = [(i, j) for i in range(N) for j in range(i + 1, N)]
        keep = [p for p in pairs if rng.random() < 0.4]
        L = laplacian(InteractionGraph(N, tuple(keep)))
        assert_allclose(L @ np.ones(N), 0.0, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(L)) >= -1e-10
        assert_array_equal(L, L.T)


def test_graph_validation():
    with pytest.raises(ValueError):
        InteractionGraph(3, ((0, 0),))  # self loop
    with pytest.raises(ValueError):
        InteractionGraph(3, ((0, 3),))  # out of range
    with pytest.raises(ValueError):
        InteractionGraph(0)
    # duplicate and reversed edges collapse to one undirected edge
    graph = InteractionGraph(3, ((1, 0), (0, 1)))
    assert graph.edges == ((0, 1),)
    assert graph.neighbors(0) == (1,)
    assert graph.neighbors(1) == (0,)
    assert graph.degree(2) == 0


def test_named_generators():
    assert make_graph("cycle", 4).edges == ((0, 1), (0, 3), (1, 2), (2, 3))
    assert make_graph("star", 4).edges == ((0, 1), (0, 2), (0, 3))
    assert make_graph("path", 2).edges == ((0, 1),)
    assert make_graph("cycle", 2).edges == ((0, 1),)
    assert make_graph("complete", 4).degree(0) == 3
    with pytest.raises(ValueError):
        make_graph("tree", 3)


def test_load_graph_edge_list(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("# a comment line\n0 1\n1 2   # trailing comment\n\n")
    graph = load_graph(path)
    assert graph.num_agents == 3
    assert graph.edges == ((0, 1), (1, 2))
    graph5 = load_graph(path, num_agents=5)
    assert graph5.num_agents == 5
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1 2\n")
    with pytest.raises(ValueError):
        load_graph(bad)


def test_lti_model_validation():
    with pytest.raises(ValueError):
        LtiModel([[1.0, 0.0]], [[1.0]])  # A not square
    with pytest.raises(ValueError):
        LtiModel([[1.0]], [[1.0], [0.0]])  # B row mismatch
    model = LtiModel([[0.5]], [[2.0]])
    assert (model.n, model.m) == (1, 1)
    with pytest.raises(ValueError):
        model.A[0, 0] = 3.0  # frozen


def test_cost_weights_validation():
    with pytest.raises(ValueError):
        CostWeights([[1.0, 0.5], [0.0, 1.0]], [[1.0]], 1.0)  # asymmetric Q
    with pytest.raises(ValueError):
        CostWeights([[1.0]], [[0.0]], 1.0)  # R not PD
    with pytest.raises(ValueError):
        CostWeights([[-1.0]], [[1.0]], 1.0)  # Q not PSD
    with pytest.raises(ValueError):
        CostWeights([[1.0]], [[1.0]], 0.0)  # gamma out of range
    with pytest.raises(ValueError):
        CostWeights([[1.0]], [[1.0]], 1.5)
    CostWeights(np.zeros((2, 2)), np.eye(2), 0.5)  # PSD zero Q is fine


def test_controllability_examples():
    assert controllability_check(LtiModel([[0.9]], [[1.0]]))
    assert not controllability_check(LtiModel(np.eye(2), [[1.0], [0.0]]))
    assert controllability_check(LtiModel([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]]))


def test_assemble_single_agent_is_identity_kron():
    model = LtiModel([[0.7]], [[1.3]])
    w = CostWeights([[2.0]], [[3.0]], 1.0)
    gp = assemble_global(model, w, make_graph("edgeless", 1))
    assert_array_equal(gp.Atilde, model.A)
    assert_array_equal(gp.Btilde, model.B)
    assert_array_equal(gp.Qtilde, w.Qbar)
    assert_array_equal(gp.Rtilde, w.Rbar)


def test_assemble_two_agents_single_edge():
    model = LtiModel(0.5 * np.eye(2), np.eye(2))
    w = CostWeights(np.eye(2), np.eye(2), 1.0)
    gp = assemble_global(model, w, make_graph("path", 2))
    expected = np.block(
        [[2 * np.eye(2), -np.eye(2)], [-np.eye(2), 2 * np.eye(2)]]
    )
    assert_array_equal(gp.Qtilde, expected)


def test_assemble_qtilde_psd_and_block_structure():
    rng = np.random.default_rng(3)
    model = LtiModel(rng.standard_normal((2, 2)) * 0.3, rng.standard_normal((2, 1)))
    Q = rng.standard_normal((2, 2))
    Q = Q @ Q.T  # random PSD
    w = CostWeights(Q, [[1.0]], 1.0)
    graph = InteractionGraph(3, ((0, 1), (1, 2), (0, 2)))
    gp = assemble_global(model, w, graph)
    assert np.min(np.linalg.eigvalsh(gp.Qtilde)) >= -1e-10
    # off-diagonal blocks of the dynamics are exactly zero
    n, m = model.n, model.m
    for i in range(3):
        for j in range(3):
            if i != j:
                assert_array_equal(gp.Atilde[i * n:(i + 1) * n, j * n:(j + 1) * n], 0.0)
                assert_array_equal(gp.Btilde[i * n:(i + 1) * n, j * m:(j + 1) * m], 0.0)


def _cost_by_sums(w, graph, xs, us):
    # Stage costs plus one disagreement term per undirected edge.
    total = sum(x @ w.Qbar @ x + u @ w.Rbar @ u for x, u in zip(xs, us))
    for i, j in graph.edges:
        d = xs[i] - xs[j]
        total += d @ w.Qbar @ d
    return total


def test_global_cost_trivial_cases():
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1.0)
    graph = make_graph("edgeless", 3)
    gp = assemble_global(model, w, graph)
    # identical states, no edges: just the sum of stage costs
    x = np.array([2.0, 2.0, 2.0])
    assert global_cost(gp, x, np.zeros(3)) == pytest.approx(3 * 4.0)
    assert global_cost(gp, np.zeros(3), np.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        global_cost(gp, np.zeros(2), np.zeros(3))


def test_global_cost_matches_explicit_sum():
    rng = np.random.default_rng(7)
    model = LtiModel(0.5 * np.eye(2), np.eye(2)[:, :1])
    Q = rng.standard_normal((2, 2))
    w = CostWeights(Q @ Q.T, [[1.5]], 1.0)
    graph = make_graph("path", 3)
    gp = assemble_global(model, w, graph)
    for _ in range(20):
        xs = rng.standard_normal((3, 2))
        us = rng.standard_normal((3, 1))
        via_kron = global_cost(gp, xs.ravel(), us.ravel())
        via_sums = _cost_by_sums(w, graph, xs, us)
        assert via_kron == pytest.approx(via_sums, rel=1e-10)
