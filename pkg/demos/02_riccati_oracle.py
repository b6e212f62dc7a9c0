# The exact LQR oracle: discounted Riccati fixed point and optimal gain.
#
# For the scalar system a=0.9, b=1 with unit weights the cost-to-go solves
# p^2 - 0.81 p - 1 = 0, so the solver can be checked against the closed-form
# root.  The same solver handles the discounted problem via the equivalence
# with the (sqrt(g) A, sqrt(g) B) pair.

import numpy as np

from graphlqr import (
    CostWeights,
    LtiModel,
    closed_loop_spectral_radius,
    riccati_residual,
    solve_dare,
)

model = LtiModel(A=[[0.9]], B=[[1.0]])
weights = CostWeights(Qbar=[[1.0]], Rbar=[[1.0]], gamma=1.0)

sol = solve_dare(model, weights)
p_closed_form = (0.81 + np.sqrt(0.81**2 + 4.0)) / 2.0
print(f"P (solver)      = {sol.P[0, 0]:.12f}")
print(f"P (closed form) = {p_closed_form:.12f}")
print(f"K*              = {sol.Kstar[0, 0]:.12f}")
print(f"iterations      = {sol.iterations}, residual = {sol.residual:.2e}")
print(f"substitution residual = {riccati_residual(model, weights, sol.P):.2e}")
print(f"closed-loop radius rho(A - B K*) = "
      f"{closed_loop_spectral_radius(model, sol.Kstar):.6f}")

# Discounting: solving with gamma < 1 equals solving the scaled pair at gamma=1.
gamma = 0.85
discounted = solve_dare(model, CostWeights([[1.0]], [[1.0]], gamma))
scaled = solve_dare(
    LtiModel(np.sqrt(gamma) * model.A, np.sqrt(gamma) * model.B),
    CostWeights([[1.0]], [[1.0]], 1.0),
)
print(f"\ngamma={gamma}: P={discounted.P[0, 0]:.10f}  "
      f"scaled-pair P={scaled.P[0, 0]:.10f}  "
      f"difference={abs(discounted.P[0, 0] - scaled.P[0, 0]):.2e}")
