# Why learn distributed: the centralized estimator pays for N^2-times more
# parameters, and RLS cost is quadratic in the parameter count.
#
# Exact multiply-accumulate counts of the implemented recursion land within a
# couple percentage points of the asymptotic (N^3 - 1)/N^3 saving law; a small
# wall-clock comparison is printed for flavor but the counts carry the claim.

from graphlqr import (
    CostWeights,
    LearnerConfig,
    LtiModel,
    make_graph,
    saving_report,
    saving_table,
    wall_time_comparison,
)

print(saving_table((2, 3, 5, 8, 100)))
print()

print(f"{'N':>3s} {'q_central':>9s} {'q_dist':>6s} {'measured %':>10s} "
      f"{'predicted %':>11s}")
for N in (2, 3, 5, 8):
    r = saving_report(N, state_dim=5, input_dim=3, samples_per_iteration=50,
                      iterations=10)
    print(f"{N:3d} {r.q_central:9d} {r.q_distributed:6d} "
          f"{r.measured_saving_pct:10.2f} {r.predicted_saving_pct:11.2f}")

# Timing anecdote on a small scalar network (same samples on both sides).
model = LtiModel(A=[[0.9]], B=[[1.0]])
weights = CostWeights(Qbar=[[1.0]], Rbar=[[1.0]], gamma=1.0)
report = wall_time_comparison(
    model, weights, make_graph("path", 4), LearnerConfig(M=30, seed=0), iterations=3
)
print(f"\nN=4 scalar agents, M={report.samples_per_iteration}, 3 iterations:")
print(f"  distributed: {report.distributed.rls_ops:>9d} MACs, "
      f"{report.distributed.wall_time_s:.3f}s")
print(f"  centralized: {report.centralized.rls_ops:>9d} MACs, "
      f"{report.centralized.wall_time_s:.3f}s")
print(f"  ops ratio (dist/central): {report.ops_ratio:.4f}")
