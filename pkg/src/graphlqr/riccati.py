"""Exact LQR ground truth via the discounted discrete algebraic Riccati equation.

Solves P = Q + g A'PA - g^2 A'PB (R + g B'PB)^-1 B'PA by fixed-point value
iteration from P0 = Q, and returns the optimal gain K* = g (R + g B'PB)^-1 B'PA
for the feedback law u = -K* x.  This solver is the oracle every learning test
is measured against, so its tolerance (1e-12 on the Frobenius residual) is far
tighter than any learning tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import CostWeights, LtiModel, controllability_check

DARE_TOL = 1e-12
DARE_MAX_ITER = 10**6


class RiccatiConvergenceError(RuntimeError):
    """Fixed-point iteration failed to reach the residual tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


@dataclass
class RiccatiSolution:
    P: np.ndarray
    Kstar: np.ndarray
    iterations: int
    residual: float


def _riccati_map(P, A, B, Q, R, gamma):
    APB = A.T @ P @ B
    G = R + gamma * (B.T @ P @ B)
    try:
        Pn = Q + gamma * (A.T @ P @ A) - gamma**2 * (APB @ np.linalg.solve(G, APB.T))
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "R + gamma B'PB is numerically singular in the Riccati recursion"
        ) from exc
    return 0.5 * (Pn + Pn.T)


def riccati_residual(model: LtiModel, weights: CostWeights, P) -> float:
    """Frobenius norm of P minus its image under the discounted Riccati map."""
    P = np.asarray(P, dtype=float)
    Pn = _riccati_map(P, model.A, model.B, weights.Qbar, weights.Rbar, weights.gamma)
    return float(np.linalg.norm(P - Pn, ord="fro"))


def solve_dare(
    model: LtiModel,
    weights: CostWeights,
    tol: float = DARE_TOL,
    max_iter: int = DARE_MAX_ITER,
) -> RiccatiSolution:
    """Solve the discounted DARE and return (P, K*).

    Value iteration is monotone and dependency-free; convergence requires the
    discounted pair (sqrt(g) A, sqrt(g) B) to be stabilizable, which holds for
    every controllable pair.
    """
    if weights.Qbar.shape[0] != model.n or weights.Rbar.shape[0] != model.m:
        raise ValueError("cost weights do not match the model dimensions")
    if not controllability_check(model):
        raise ValueError("(A, B) is not controllable; the DARE oracle needs it")
    A, B = model.A, model.B
    Q, R, gamma = weights.Qbar, weights.Rbar, weights.gamma
    P = Q.copy()
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        Pn = _riccati_map(P, A, B, Q, R, gamma)
        residual = float(np.linalg.norm(Pn - P, ord="fro"))
        if residual <= tol:
            G = R + gamma * (B.T @ P @ B)
            Kstar = gamma * np.linalg.solve(G, B.T @ P @ A)
            P.setflags(write=False)
            Kstar.setflags(write=False)
            return RiccatiSolution(P=P, Kstar=Kstar, iterations=iteration, residual=residual)
        P = Pn
    raise RiccatiConvergenceError(
        f"Riccati iteration did not converge after {max_iter} steps "
        f"(last residual {residual:g})",
        residual=residual,
    )


def closed_loop_spectral_radius(model: LtiModel, K) -> float:
    """Spectral radius of A - B K, i.e. the closed loop under u = -K x.

    For a gain stored in the learning convention u = K x, pass its negation:
    rho(A + B K) = closed_loop_spectral_radius(model, -K).
    """
    K = np.asarray(K, dtype=float)
    if K.shape != (model.m, model.n):
        raise ValueError(f"gain must be {model.m}x{model.n}, got shape {K.shape}")
    return float(np.max(np.abs(np.linalg.eigvals(model.A - model.B @ K))))
