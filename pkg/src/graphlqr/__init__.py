"""Distributed Q-learning policy iteration for cost-coupled identical LTI agents.

A network of agents with identical dynamics x+ = A x + B u, coupled only
through a graph-structured quadratic cost, learns the optimal LQR feedback of
each subsystem model-free: every agent runs recursive least squares on its own
reward stream and improves its gain greedily.  The package ships the exact
Riccati oracle the learners are verified against, a deterministic network
simulator, and op-count benchmarks for the centralized-vs-distributed
complexity saving.
"""

from .bench import (
    OpCountReport,
    WallTimeReport,
    count_rls_ops,
    predicted_saving_display,
    predicted_saving_pct,
    saving_report,
    saving_table,
    stacked_problem,
    wall_time_comparison,
)
from .experiment import (
    ConfigError,
    ExperimentConfig,
    build_config,
    emit_plot_data,
    generate_system,
    load_config,
    preset_config,
    run,
)
from .learner import (
    LearnRun,
    LearnerConfig,
    centralized_policy_iteration,
    distributed_policy_iteration,
    gain_error_series,
    reward_target,
)
from .model import (
    CostWeights,
    GlobalProblem,
    InteractionGraph,
    LtiModel,
    assemble_global,
    controllability_check,
    global_cost,
    laplacian,
    load_graph,
    make_graph,
)
from .qfunction import (
    DistributedQBlocks,
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
from .riccati import (
    RiccatiConvergenceError,
    RiccatiSolution,
    closed_loop_spectral_radius,
    riccati_residual,
    solve_dare,
)
from .rls import PeMonitor, PeStats, RlsEstimator, per_update_ops
from .sim import (
    ExcitationConfig,
    InstabilityError,
    NetworkState,
    consensus_gap,
    draw_excitation,
    initial_states,
    neighbor_states,
    step,
)

__version__ = "0.1.0"
