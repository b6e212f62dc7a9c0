# Build interaction graphs and assemble the networked LQR problem.
#
# Three scalar agents on a path graph pay their own stage cost plus a
# disagreement penalty against each neighbor; the Kronecker form
# (L + I) (x) Q reproduces the summed cost exactly.

import numpy as np

from graphlqr import (
    CostWeights,
    LtiModel,
    assemble_global,
    global_cost,
    laplacian,
    make_graph,
)

model = LtiModel(A=[[0.9]], B=[[1.0]])
weights = CostWeights(Qbar=[[1.0]], Rbar=[[1.0]], gamma=1.0)

for kind in ("path", "cycle", "complete", "star", "edgeless"):
    graph = make_graph(kind, 4)
    L = laplacian(graph)
    print(f"{kind:9s} edges={graph.edges} laplacian eigs="
          f"{np.round(np.linalg.eigvalsh(L), 3)}")

graph = make_graph("path", 3)
problem = assemble_global(model, weights, graph)
print("\nQ~ for the 3-agent path:")
print(problem.Qtilde)

# The quadratic form equals the explicit sum: stage costs plus one
# disagreement term per edge.
rng = np.random.default_rng(0)
x = rng.standard_normal(3)
u = rng.standard_normal(3)
via_kron = global_cost(problem, x, u)
via_sum = sum(x[i] ** 2 + u[i] ** 2 for i in range(3))
for i, j in graph.edges:
    via_sum += (x[i] - x[j]) ** 2
print(f"\ncost via Kronecker form: {via_kron:.12f}")
print(f"cost via explicit sums:  {via_sum:.12f}")
print(f"difference: {abs(via_kron - via_sum):.2e}")
