# The quadratic Q-function parameterization that makes learning linear.
#
# z'Hz = quad_basis(z) . theta holds exactly when theta packs the symmetric H
# with doubled off-diagonals, so a least-squares estimator can recover H from
# scalar reward observations.  The greedy gain -H22^-1 H21 extracted from the
# true H matches the Riccati gain.

import numpy as np

from graphlqr import (
    CostWeights,
    LtiModel,
    build_q_blocks,
    gain_from_h,
    h_to_theta,
    quad_basis,
    solve_dare,
    theta_to_h,
    true_h,
)

rng = np.random.default_rng(1)

H = rng.standard_normal((4, 4))
H = 0.5 * (H + H.T)
theta = h_to_theta(H)
z = rng.standard_normal(4)
print(f"z'Hz          = {z @ H @ z:.12f}")
print(f"basis . theta = {quad_basis(z) @ theta:.12f}")
print(f"roundtrip exact: {np.array_equal(theta_to_h(theta), H)}")

model = LtiModel(A=[[0.9]], B=[[1.0]])
weights = CostWeights(Qbar=[[1.0]], Rbar=[[1.0]], gamma=1.0)
sol = solve_dare(model, weights)
H_true = true_h(model, weights, sol.P)
print(f"\ntrue H =\n{H_true}")
K = gain_from_h(H_true, n=1)
print(f"gain from H: {K[0, 0]:.8f}   (-K* = {-sol.Kstar[0, 0]:.8f})")

# The coupled per-agent reward matrix for two neighbors: the quadratic form
# in [x; u; x_nbr1; x_nbr2] equals stage cost plus the disagreement terms.
blocks = build_q_blocks(model, weights, degree=2)
print(f"\ncoupled reward matrix (degree 2):\n{blocks.q_matrix}")
y = rng.standard_normal(4)
explicit = y[0] ** 2 + y[1] ** 2 + (y[0] - y[2]) ** 2 + (y[0] - y[3]) ** 2
print(f"y'Qy = {y @ blocks.q_matrix @ y:.12f}  explicit = {explicit:.12f}")
