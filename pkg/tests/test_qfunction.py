import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from graphlqr.model import CostWeights, LtiModel
from graphlqr.qfunction import (
    NotPositiveDefiniteError,
    build_q_blocks,
    gain_from_h,
    h_blocks,
    h_to_theta,
    num_quad_params,
    quad_basis,
    theta_to_h,
    true_h,
)
from graphlqr.riccati import solve_dare


def random_symmetric(rng, p):
    M = rng.standard_normal((p, p))
    return 0.5 * (M + M.T)


def test_quad_basis_examples():
    assert_array_equal(quad_basis([3.0, 2.0]), [9.0, 6.0, 4.0])
    assert_array_equal(quad_basis([5.0]), [25.0])
    assert quad_basis(np.ones(8)).size == 36
    assert num_quad_params(5 + 3) == 36


def test_h_to_theta_examples():
    assert_array_equal(h_to_theta(np.eye(2)), [1.0, 0.0, 1.0])
    assert_array_equal(h_to_theta([[2.0, 1.0], [1.0, 3.0]]), [2.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="not symmetric"):
        h_to_theta([[1.0, 0.5], [0.0, 1.0]])


def test_quadratic_form_identity():
    rng = np.random.default_rng(2)
    H = random_symmetric(rng, 8)
    theta = h_to_theta(H)
    for _ in range(100):
        z = rng.standard_normal(8)
        direct = z @ H @ z
        packed = quad_basis(z) @ theta
        assert abs(packed - direct) <= 1e-12 * max(1.0, abs(direct))


def test_theta_to_h_examples_and_roundtrip():
    assert_array_equal(theta_to_h([1.0, 0.0, 1.0]), np.eye(2))
    assert_array_equal(theta_to_h([2.0, 2.0, 3.0]), [[2.0, 1.0], [1.0, 3.0]])
    with pytest.raises(ValueError, match="triangular"):
        theta_to_h(np.zeros(4))
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        H = random_symmetric(rng, 8)
        worst = max(worst, float(np.max(np.abs(theta_to_h(h_to_theta(H)) - H))))
    assert worst == 0.0  # doubling/halving is exact in binary floating point


def test_true_h_zero_cost_to_go():
    model = LtiModel([[0.9, 0.1], [0.0, 0.8]], [[0.0], [1.0]])
    w = CostWeights(np.diag([1.0, 2.0]), [[3.0]], 1.0)
    H = true_h(model, w, np.zeros((2, 2)))
    expected = np.zeros((3, 3))
    expected[:2, :2] = w.Qbar
    expected[2, 2] = 3.0
    assert_array_equal(H, expected)


def test_true_h_scalar_oracle():
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1.0)
    sol = solve_dare(model, w)
    H = true_h(model, w, sol.P)
    p = (0.81 + np.sqrt(0.81**2 + 4.0)) / 2.0
    assert_allclose(H, [[1.0 + 0.81 * p, 0.9 * p], [0.9 * p, 1.0 + p]], atol=1e-9)


def test_true_h_myopic_limit():
    # gamma = 0 is outside the admissible discount range, so the myopic limit
    # is checked at a vanishing discount instead.
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1e-12)
    H = true_h(model, w, np.array([[5.0]]))
    assert_allclose(H, [[1.0, 0.0], [0.0, 1.0]], atol=1e-10)


def test_gain_from_h_examples():
    H = np.zeros((3, 3))
    H[:2, :2] = [[2.0, 0.5], [0.5, 1.0]]
    H[2, 2] = 1.0
    assert_array_equal(gain_from_h(H, 2), np.zeros((1, 2)))
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1.0)
    sol = solve_dare(model, w)
    K = gain_from_h(true_h(model, w, sol.P), 1)
    assert K[0, 0] == pytest.approx(-0.53766655853, abs=1e-9)
    singular = np.zeros((2, 2))
    singular[0, 0] = 1.0
    with pytest.raises(NotPositiveDefiniteError, match="not positive definite"):
        gain_from_h(singular, 1)


def test_gain_matches_dare_across_random_systems():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 4))
        m = int(rng.integers(1, 3))
        A = rng.standard_normal((n, n))
        radius = np.max(np.abs(np.linalg.eigvals(A)))
        if radius > 0:
            A *= 0.9 / radius
        B = rng.standard_normal((n, m))
        model = LtiModel(A, B)
        w = CostWeights(np.eye(n), np.eye(m), float(rng.choice([1.0, 0.9])))
        sol = solve_dare(model, w)
        K = gain_from_h(true_h(model, w, sol.P), n)
        assert_allclose(K, -sol.Kstar, atol=1e-9)


def test_h_blocks_partition():
    rng = np.random.default_rng(1)
    H = random_symmetric(rng, 5)
    H11, H12, H21, H22 = h_blocks(H, 3)
    assert H11.shape == (3, 3) and H12.shape == (3, 2)
    assert_array_equal(H21, H12.T)
    assert_array_equal(H22, H[3:, 3:])


def test_build_q_blocks_isolated_node():
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[2.0]], [[3.0]], 1.0)
    blocks = build_q_blocks(model, w, 0)
    assert_array_equal(blocks.q_matrix, [[2.0, 0.0], [0.0, 3.0]])
    assert_array_equal(blocks.h_matrix, blocks.q_matrix)


def test_build_q_blocks_single_neighbor_scalar():
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1.0)
    blocks = build_q_blocks(model, w, 1)
    assert_array_equal(
        blocks.q_matrix, [[2.0, 0.0, -1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 1.0]]
    )


def test_build_q_blocks_quadratic_form_matches_reward():
    rng = np.random.default_rng(9)
    n, m, degree = 2, 1, 2
    A = 0.5 * np.eye(n)
    model = LtiModel(A, rng.standard_normal((n, m)))
    Q = rng.standard_normal((n, n))
    w = CostWeights(Q @ Q.T, [[1.2]], 1.0)
    blocks = build_q_blocks(model, w, degree)
    assert blocks.q_matrix.shape == (n + m + degree * n,) * 2
    for _ in range(30):
        x = rng.standard_normal(n)
        u = rng.standard_normal(m)
        nbrs = rng.standard_normal((degree, n))
        y = np.concatenate([x, u, *nbrs])
        expected = x @ w.Qbar @ x + u @ w.Rbar @ u
        for xj in nbrs:
            d = x - xj
            expected += d @ w.Qbar @ d
        got = y @ blocks.q_matrix @ y
        assert got == pytest.approx(expected, rel=1e-12, abs=1e-12)
    # PSD: the coupled reward is a sum of squares
    assert np.min(np.linalg.eigvalsh(blocks.q_matrix)) >= -1e-10


def test_build_q_blocks_h_embeds_cost_to_go():
    model = LtiModel([[0.9]], [[1.0]])
    w = CostWeights([[1.0]], [[1.0]], 1.0)
    sol = solve_dare(model, w)
    blocks = build_q_blocks(model, w, 1, P=sol.P)
    core = true_h(model, w, sol.P)
    # leading 2x2 grid carries the P terms; top-left also keeps the (d+1)Q part
    assert blocks.h_matrix[0, 0] == pytest.approx(core[0, 0] + 1.0)
    assert blocks.h_matrix[0, 1] == pytest.approx(core[0, 1])
    assert blocks.h_matrix[1, 1] == pytest.approx(core[1, 1])
    # neighbor blocks are untouched
    assert_array_equal(blocks.h_matrix[2:, 2:], blocks.q_matrix[2:, 2:])
    with pytest.raises(ValueError):
        build_q_blocks(model, w, -1)
