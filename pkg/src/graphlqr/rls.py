"""Recursive least squares with covariance reset and excitation monitoring.

The estimator implements the standard no-forgetting recursion

    v = P phi,  s = 1 + phi'v,  g = v / s
    theta <- theta + g (target - phi'theta)
    P     <- P - g v', then symmetrized

and counts its own arithmetic so complexity comparisons can use exact
multiply-accumulate totals instead of wall clocks.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np


def per_update_ops(num_params: int) -> int:
    """Exact multiply-accumulate count of one RLS update: 3q^2 + 4q + 2.

    Breakdown: v = P phi (q^2), phi'v (q), g = v/s (q divisions), phi'theta (q),
    theta update (q), rank-one covariance downdate (q^2), symmetrization (q^2),
    plus the two scalar accumulations forming s and the innovation.
    """
    q = int(num_params)
    return 3 * q * q + 4 * q + 2


class RlsEstimator:
    """Single-target recursive least squares with unit forgetting."""

    def __init__(self, num_params: int, p0_scale: float = 1e3, theta0=None):
        q = int(num_params)
        if q < 1:
            raise ValueError(f"num_params must be >= 1, got {num_params}")
        if not p0_scale > 0.0:
            raise ValueError(f"p0_scale must be > 0, got {p0_scale}")
        if theta0 is None:
            self.theta = np.zeros(q)
        else:
            theta0 = np.asarray(theta0, dtype=float).ravel()
            if theta0.size != q:
                raise ValueError(
                    f"theta0 has length {theta0.size}, expected {q}"
                )
            if not np.all(np.isfinite(theta0)):
                raise ValueError("theta0 contains non-finite entries")
            self.theta = theta0.copy()
        self.covariance = p0_scale * np.eye(q)
        self.updates_seen = 0
        self.ops = 0

    @property
    def num_params(self) -> int:
        return self.theta.size

    def predict(self, phi) -> float:
        return float(np.asarray(phi, dtype=float).ravel() @ self.theta)

    def update(self, phi, target: float) -> None:
        phi = np.asarray(phi, dtype=float).ravel()
        if phi.size != self.num_params:
            raise ValueError(
                f"regressor has length {phi.size}, expected {self.num_params}"
            )
        target = float(target)
        if not (np.all(np.isfinite(phi)) and np.isfinite(target)):
            raise ValueError("non-finite regressor or target")
        P = self.covariance
        v = P @ phi
        s = 1.0 + float(phi @ v)
        if s <= 1e-12:
            raise RuntimeError(
                f"covariance lost positive definiteness (1 + phi'P phi = {s:g}); "
                "reset the covariance before continuing"
            )
        g = v / s
        innovation = target - float(phi @ self.theta)
        self.theta = self.theta + g * innovation
        P = P - np.outer(g, v)
        self.covariance = 0.5 * (P + P.T)
        self.updates_seen += 1
        self.ops += per_update_ops(self.num_params)

    def reset_covariance(self, p0_scale: float) -> None:
        """Set the covariance back to p0_scale * I; the estimate is preserved."""
        if not p0_scale > 0.0:
            raise ValueError(f"p0_scale must be > 0, got {p0_scale}")
        self.covariance = p0_scale * np.eye(self.num_params)


@dataclass
class PeStats:
    """Eigenvalue extremes of the windowed average regressor outer product."""

    alpha: float
    beta: float
    satisfied: bool


class PeMonitor:
    """Ring buffer of recent regressors for persistent-excitation checks."""

    def __init__(self, window: int):
        window = int(window)
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.window = window
        self._buffer = deque(maxlen=window)

    def __len__(self) -> int:
        return len(self._buffer)

    def push(self, phi) -> None:
        phi = np.asarray(phi, dtype=float).ravel()
        if self._buffer and phi.size != self._buffer[0].size:
            raise ValueError(
                f"regressor length changed from {self._buffer[0].size} to {phi.size}"
            )
        self._buffer.append(phi.copy())

    def check(self, pe_floor: float = 1e-8) -> PeStats:
        """Min/max eigenvalues of (1/M) sum phi phi' over the stored window.

        Computed from singular values of the stacked window, so a window
        shorter than the regressor dimension reports alpha = 0 exactly.
        """
        if len(self._buffer) < self.window:
            raise ValueError(
                f"need {self.window} samples for the excitation check, "
                f"have {len(self._buffer)}"
            )
        Phi = np.array(self._buffer)
        q = Phi.shape[1]
        sv = np.linalg.svd(Phi, compute_uv=False)
        eigs = sv**2 / self.window
        beta = float(eigs[0]) if eigs.size else 0.0
        alpha = float(eigs[-1]) if eigs.size >= q else 0.0
        return PeStats(alpha=alpha, beta=beta, satisfied=alpha >= pe_floor)
