"""Quadratic Q-function machinery.

A state-action value z'H z with z = [x; u] is linear in the packed parameter
vector theta: diagonal entries of the symmetric H as-is, off-diagonals doubled,
in row-major upper-triangle order.  With the companion basis of plain products
z_i z_j (i <= j) the identity quad_basis(z) . theta == z'H z holds exactly,
which is what lets recursive least squares estimate H from observed rewards.

Packing order (the serialization convention for all persisted parameter
vectors): for p = len(z), entry index advances as
(0,0), (0,1), ..., (0,p-1), (1,1), (1,2), ..., (p-1,p-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TOL_SYM, CostWeights, LtiModel


class NotPositiveDefiniteError(RuntimeError):
    """The H22 block is not positive definite; callers should skip the update."""


def num_quad_params(p: int) -> int:
    """Length of the packed parameterization for a p x p symmetric matrix."""
    return p * (p + 1) // 2


def quad_basis(z) -> np.ndarray:
    """Quadratic basis [z_i z_j for i <= j] in row-major upper-triangle order."""
    z = np.asarray(z, dtype=float).ravel()
    if z.size < 1:
        raise ValueError("z must have at least one entry")
    iu = np.triu_indices(z.size)
    return np.outer(z, z)[iu]


def h_to_theta(H, tol: float = TOL_SYM) -> np.ndarray:
    """Pack a symmetric H: diagonal as-is, off-diagonals doubled."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"H must be square, got shape {H.shape}")
    skew = float(np.max(np.abs(H - H.T)))
    if skew > tol * (1.0 + float(np.max(np.abs(H)))):
        raise ValueError(f"H is not symmetric (max |H - H'| = {skew:g})")
    p = H.shape[0]
    scaled = 2.0 * H
    scaled[np.diag_indices(p)] = np.diag(H)
    return scaled[np.triu_indices(p)]


def theta_to_h(theta) -> np.ndarray:
    """Unpack theta back to the symmetric H (exact inverse of h_to_theta)."""
    theta = np.asarray(theta, dtype=float).ravel()
    p = int((np.sqrt(8 * theta.size + 1) - 1) / 2 + 0.5)
    if num_quad_params(p) != theta.size:
        raise ValueError(
            f"theta length {theta.size} is not a triangular number p(p+1)/2"
        )
    upper = np.zeros((p, p))
    upper[np.triu_indices(p)] = theta
    return 0.5 * (upper + upper.T)


def true_h(model: LtiModel, weights: CostWeights, P) -> np.ndarray:
    """H implied by a cost-to-go matrix P:

    [[Q + g A'PA, g A'PB], [g B'PA, R + g B'PB]].
    """
    P = np.asarray(P, dtype=float)
    n, m = model.n, model.m
    if P.shape != (n, n):
        raise ValueError(f"P must be {n}x{n}, got shape {P.shape}")
    skew = float(np.max(np.abs(P - P.T)))
    if skew > TOL_SYM * (1.0 + float(np.max(np.abs(P)))):
        raise ValueError(f"P is not symmetric (max |P - P'| = {skew:g})")
    g = weights.gamma
    A, B = model.A, model.B
    H = np.empty((n + m, n + m))
    H[:n, :n] = weights.Qbar + g * (A.T @ P @ A)
    H[:n, n:] = g * (A.T @ P @ B)
    H[n:, :n] = H[:n, n:].T
    H[n:, n:] = weights.Rbar + g * (B.T @ P @ B)
    return H


def h_blocks(H, n: int):
    """Split H into (H11, H12, H21, H22) at the state/input boundary n."""
    H = np.asarray(H, dtype=float)
    return H[:n, :n], H[:n, n:], H[n:, :n], H[n:, n:]


def gain_from_h(H, n: int, tol_pd: float = 1e-10) -> np.ndarray:
    """Greedy gain -H22^-1 H21 for the learning convention u = K x.

    Raises NotPositiveDefiniteError when H22 is not positive definite, which
    callers treat as "skip this policy update".
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or not (0 < n < H.shape[0]):
        raise ValueError(f"H must be square with 0 < n < size, got shape {H.shape}")
    H21 = H[n:, :n]
    H22 = 0.5 * (H[n:, n:] + H[n:, n:].T)
    min_eig = float(np.min(np.linalg.eigvalsh(H22)))
    if min_eig <= tol_pd:
        raise NotPositiveDefiniteError(
            f"H22 is not positive definite (min eig {min_eig:g}); skipping gain update"
        )
    return -np.linalg.solve(H22, H21)


@dataclass
class DistributedQBlocks:
    """Per-agent reward matrix and its value-augmented counterpart.

    Both act on y = [x_self; u_self; x_nbr_1; ...; x_nbr_d], so they are
    (n + m + d n) square; ``h_matrix`` differs from ``q_matrix`` only in the
    leading (n + m) block grid, where the cost-to-go terms enter.
    """

    degree: int
    q_matrix: np.ndarray
    h_matrix: np.ndarray


def build_q_blocks(
    model: LtiModel, weights: CostWeights, degree: int, P=None
) -> DistributedQBlocks:
    """Assemble the coupled reward matrix for an agent with ``degree`` neighbors.

    y'Qy equals the agent stage cost plus one disagreement term per neighbor;
    with degree 0 it degenerates to blockdiag(Q, R).
    """
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    n, m = model.n, model.m
    size = n + m + degree * n
    Qmat = np.zeros((size, size))
    Qmat[:n, :n] = (degree + 1) * weights.Qbar
    Qmat[n : n + m, n : n + m] = weights.Rbar
    for j in range(degree):
        s = n + m + j * n
        Qmat[s : s + n, s : s + n] = weights.Qbar
        Qmat[:n, s : s + n] = -weights.Qbar
        Qmat[s : s + n, :n] = -weights.Qbar
    Hmat = Qmat.copy()
    if P is None:
        P = np.zeros((n, n))
    core = true_h(model, weights, P)
    Hmat[: n + m, : n + m] += core - _block_diag(weights.Qbar, weights.Rbar)
    return DistributedQBlocks(degree=degree, q_matrix=Qmat, h_matrix=Hmat)


def _block_diag(Q: np.ndarray, R: np.ndarray) -> np.ndarray:
    n, m = Q.shape[0], R.shape[0]
    out = np.zeros((n + m, n + m))
    out[:n, :n] = Q
    out[n:, n:] = R
    return out
