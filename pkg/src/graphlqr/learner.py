"""Policy-iteration engines for model-free LQR on a cost-coupled network.

Each outer iteration resets every agent's RLS covariance, rolls the network
forward M steps under u_i = K_i x_i + e (one shared excitation draw per step),
and regresses the observed reward target on phi = zbar_t - gamma zbar_{t+1}.
The basis at t+1 uses the policy action K_i x_{t+1}, not the excited action:
the Bellman identity r = z'Hz - gamma z+'Hz+ only holds along the policy, and
using the applied action would bias the regression.  After each window every
agent unpacks its H estimate and applies the greedy update K <- -H22^-1 H21,
carrying the parameter estimate into the next window.

The reward target seen by agent i is its own stage cost plus the discounted
next-step disagreement against its neighbors,

    xi_t = x'Qx + u'Ru + gamma * sum_j (x+_i - x+_j)'Q(x+_i - x+_j),

which is what remains of the coupled reward once the known neighbor blocks of
the coupled H are moved to the left-hand side.  The disagreement term decays
as the agents' gains agree, so every agent converges to the gain of its own
decoupled LQR problem.

The centralized engine is the same loop on a single-node network; running the
distributed engine on an edgeless one-agent graph reproduces it bit for bit.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .model import CostWeights, InteractionGraph, LtiModel, controllability_check, make_graph
from .qfunction import (
    NotPositiveDefiniteError,
    gain_from_h,
    num_quad_params,
    quad_basis,
    theta_to_h,
)
from .riccati import closed_loop_spectral_radius
from .rls import PeMonitor, RlsEstimator
from .sim import (
    BLOWUP_BOUND,
    ExcitationConfig,
    NetworkState,
    consensus_gap,
    draw_excitation,
    initial_states,
    step,
)


@dataclass
class LearnerConfig:
    """Knobs for one policy-iteration run.

    ``M`` defaults to 3x the per-agent parameter count; the engines refuse
    anything below the parameter count (fewer samples than unknowns per
    window).  ``K0``/``theta0`` accept a single value shared by all agents or
    one per agent; gains follow the learning convention u = K x + e, so a
    stabilizing K0 means rho(A + B K0) < 1 and the zero default is accepted
    exactly when A itself is stable.
    """

    M: int | None = None
    K_max: int = 100
    min_iterations: int = 1
    stop_tol: float = 1e-6
    p0_scale: float = 1e3
    excitation: ExcitationConfig = field(default_factory=ExcitationConfig)
    K0: np.ndarray | None = None
    theta0: np.ndarray | None = None
    x0: np.ndarray | None = None
    init_state_std: float = 1.0
    seed: int = 0
    pe_floor: float = 1e-8
    blowup_bound: float = BLOWUP_BOUND
    log_trajectories: bool = False

    def __post_init__(self):
        if self.K_max < 1:
            raise ValueError(f"K_max must be >= 1, got {self.K_max}")
        if not self.stop_tol > 0.0:
            raise ValueError(f"stop_tol must be > 0, got {self.stop_tol}")
        if not self.p0_scale > 0.0:
            raise ValueError(f"p0_scale must be > 0, got {self.p0_scale}")
        if self.min_iterations < 1:
            raise ValueError(f"min_iterations must be >= 1, got {self.min_iterations}")


@dataclass
class LearnRun:
    """Full trace of a policy-iteration run.

    History arrays are indexed by iteration with slot 0 holding the initial
    condition, so ``gains[k]`` is the gain in force after update k.
    """

    num_agents: int
    state_dim: int
    input_dim: int
    samples_per_iteration: int
    gains: np.ndarray                 # (k_used + 1, N, m, n)
    thetas: np.ndarray                # (k_used + 1, N, q)
    gain_spread: np.ndarray           # (k_used + 1,) max pairwise ||K_i - K_j||_F
    gain_step: np.ndarray             # (k_used,) max_i ||K_k - K_{k-1}||_F
    theta_delta: np.ndarray           # (k_used, N)
    pe_alpha: np.ndarray              # (k_used, N)
    pe_beta: np.ndarray               # (k_used, N)
    consensus_gap_mean: np.ndarray    # (k_used,) mean gap over each window
    skipped_updates: list             # (iteration, agent) pairs
    pe_violations: list               # (iteration, agent) pairs
    iterations_used: int
    converged: bool
    wall_time_s: float
    iteration_time_s: np.ndarray      # (k_used,)
    rls_ops: int
    trajectory_t: np.ndarray | None = None       # (steps,)
    trajectory_states: np.ndarray | None = None  # (steps, N, n)
    trajectory_inputs: np.ndarray | None = None  # (steps, N, m)

    @property
    def final_gains(self) -> np.ndarray:
        return self.gains[-1]


def reward_target(x, u, x_next, neighbor_x_next, weights: CostWeights) -> float:
    """Per-agent regression target: stage cost plus discounted next-step coupling."""
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    x_next = np.asarray(x_next, dtype=float).ravel()
    n = weights.Qbar.shape[0]
    if x.size != n or x_next.size != n or u.size != weights.Rbar.shape[0]:
        raise ValueError("state/input dimensions do not match the cost weights")
    value = float(x @ weights.Qbar @ x + u @ weights.Rbar @ u)
    coupling = 0.0
    for xj in neighbor_x_next:
        xj = np.asarray(xj, dtype=float).ravel()
        if xj.size != n:
            raise ValueError(
                f"neighbor state has length {xj.size}, expected {n}"
            )
        d = x_next - xj
        coupling += float(d @ weights.Qbar @ d)
    return value + weights.gamma * coupling


def _pairwise_gain_spread(gains: np.ndarray) -> float:
    N = gains.shape[0]
    if N == 1:
        return 0.0
    spread = 0.0
    for i in range(N):
        for j in range(i + 1, N):
            spread = max(spread, float(np.linalg.norm(gains[i] - gains[j])))
    return spread


def _resolve_per_agent(value, shape_one, num_agents, name):
    """Broadcast a shared or per-agent array to shape (N, *shape_one)."""
    if value is None:
        return np.zeros((num_agents, *shape_one))
    arr = np.asarray(value, dtype=float)
    if arr.shape == tuple(shape_one):
        return np.broadcast_to(arr, (num_agents, *shape_one)).copy()
    if arr.shape == (num_agents, *shape_one):
        return arr.copy()
    raise ValueError(
        f"{name} must have shape {tuple(shape_one)} or {(num_agents, *shape_one)}, "
        f"got {arr.shape}"
    )


def distributed_policy_iteration(
    model: LtiModel,
    weights: CostWeights,
    graph: InteractionGraph,
    config: LearnerConfig,
) -> LearnRun:
    """Run the distributed Q-learning policy iteration on the given network."""
    t_run = time.perf_counter()
    n, m = model.n, model.m
    N = graph.num_agents
    if weights.Qbar.shape[0] != n or weights.Rbar.shape[0] != m:
        raise ValueError("cost weights do not match the model dimensions")
    if not controllability_check(model):
        raise ValueError("(A, B) is not controllable")
    q = num_quad_params(n + m)
    M = 3 * q if config.M is None else int(config.M)
    if M < q:
        raise ValueError(
            f"M = {M} is below the per-agent parameter count {q}; "
            "each window needs at least as many samples as unknowns"
        )
    gamma = weights.gamma

    gains = _resolve_per_agent(config.K0, (m, n), N, "K0")
    for i in range(N):
        rho = closed_loop_spectral_radius(model, -gains[i])
        if rho >= 1.0:
            raise ValueError(
                f"initial gain for agent {i} is not stabilizing "
                f"(closed-loop spectral radius {rho:.6f})"
            )
    thetas = _resolve_per_agent(config.theta0, (q,), N, "theta0")
    estimators = [
        RlsEstimator(q, p0_scale=config.p0_scale, theta0=thetas[i]) for i in range(N)
    ]

    excitation = config.excitation
    if excitation.seed is None:
        excitation = replace(excitation, seed=config.seed)
    if config.x0 is not None:
        x0 = np.asarray(config.x0, dtype=float)
        if x0.shape != (N, n):
            raise ValueError(f"x0 must be ({N}, {n}), got shape {x0.shape}")
    else:
        x0 = initial_states(N, n, config.seed, config.init_state_std)
    net = NetworkState(t=0, states=x0)
    neighbor_lists = [graph.neighbors(i) for i in range(N)]

    gain_history = [gains.copy()]
    theta_history = [np.array([est.theta for est in estimators])]
    spread_history = [_pairwise_gain_spread(gains)]
    gain_step, theta_delta, pe_alpha, pe_beta = [], [], [], []
    gap_means, iter_times = [], []
    skipped, pe_violations = [], []
    traj_t, traj_x, traj_u = [], [], []
    converged = False
    iterations_used = 0

    for k in range(1, config.K_max + 1):
        t_iter = time.perf_counter()
        for est in estimators:
            est.reset_covariance(config.p0_scale)
        monitors = [PeMonitor(M) for _ in range(N)]
        theta_before = np.array([est.theta for est in estimators])
        gap_accum = 0.0

        for _ in range(M):
            e = draw_excitation(excitation, net.t, m, N)
            u = np.einsum("aij,aj->ai", gains, net.states) + e
            if config.log_trajectories:
                traj_t.append(net.t)
                traj_x.append(net.states.copy())
                traj_u.append(u.copy())
            nxt = step(net, model, u, config.blowup_bound)
            for i in range(N):
                xi = reward_target(
                    net.states[i],
                    u[i],
                    nxt.states[i],
                    [nxt.states[j] for j in neighbor_lists[i]],
                    weights,
                )
                z_now = np.concatenate((net.states[i], u[i]))
                z_next = np.concatenate((nxt.states[i], gains[i] @ nxt.states[i]))
                phi = quad_basis(z_now) - gamma * quad_basis(z_next)
                estimators[i].update(phi, xi)
                monitors[i].push(phi)
            gap_accum += consensus_gap(nxt)
            net = nxt

        new_gains = gains.copy()
        for i in range(N):
            H = theta_to_h(estimators[i].theta)
            try:
                new_gains[i] = gain_from_h(H, n)
            except NotPositiveDefiniteError:
                skipped.append((k, i))
        alphas, betas = np.empty(N), np.empty(N)
        for i in range(N):
            stats = monitors[i].check(config.pe_floor)
            alphas[i], betas[i] = stats.alpha, stats.beta
            if not stats.satisfied:
                pe_violations.append((k, i))

        theta_after = np.array([est.theta for est in estimators])
        theta_delta.append(np.linalg.norm(theta_after - theta_before, axis=1))
        step_size = float(
            np.max(np.linalg.norm(new_gains - gains, axis=(1, 2)))
        )
        gain_step.append(step_size)
        gains = new_gains
        gain_history.append(gains.copy())
        theta_history.append(theta_after)
        spread_history.append(_pairwise_gain_spread(gains))
        pe_alpha.append(alphas)
        pe_beta.append(betas)
        gap_means.append(gap_accum / M)
        iter_times.append(time.perf_counter() - t_iter)
        iterations_used = k
        if k >= config.min_iterations and step_size < config.stop_tol:
            converged = True
            break

    if skipped:
        warnings.warn(
            f"{len(skipped)} policy updates skipped (H22 not positive definite): "
            f"first at iteration {skipped[0][0]}, agent {skipped[0][1]}",
            RuntimeWarning,
            stacklevel=2,
        )
    if pe_violations:
        warnings.warn(
            f"persistent-excitation floor violated in {len(pe_violations)} "
            f"agent-iterations (first at iteration {pe_violations[0][0]}, "
            f"agent {pe_violations[0][1]})",
            RuntimeWarning,
            stacklevel=2,
        )

    return LearnRun(
        num_agents=N,
        state_dim=n,
        input_dim=m,
        samples_per_iteration=M,
        gains=np.array(gain_history),
        thetas=np.array(theta_history),
        gain_spread=np.array(spread_history),
        gain_step=np.array(gain_step),
        theta_delta=np.array(theta_delta),
        pe_alpha=np.array(pe_alpha),
        pe_beta=np.array(pe_beta),
        consensus_gap_mean=np.array(gap_means),
        skipped_updates=skipped,
        pe_violations=pe_violations,
        iterations_used=iterations_used,
        converged=converged,
        wall_time_s=time.perf_counter() - t_run,
        iteration_time_s=np.array(iter_times),
        rls_ops=sum(est.ops for est in estimators),
        trajectory_t=np.array(traj_t) if config.log_trajectories else None,
        trajectory_states=np.array(traj_x) if config.log_trajectories else None,
        trajectory_inputs=np.array(traj_u) if config.log_trajectories else None,
    )


def centralized_policy_iteration(
    model: LtiModel, weights: CostWeights, config: LearnerConfig
) -> LearnRun:
    """Single-system Q-learning policy iteration (the classic baseline).

    With one agent the reward target loses its coupling term and the
    distributed loop reduces exactly to the centralized recursion, so this is
    the same engine on a one-node edgeless graph.
    """
    return distributed_policy_iteration(model, weights, make_graph("edgeless", 1), config)


def gain_error_series(run: LearnRun, reference) -> np.ndarray:
    """Frobenius gain error per (iteration, agent) against a reference gain."""
    ref = np.asarray(reference, dtype=float)
    if ref.shape != (run.input_dim, run.state_dim):
        raise ValueError(
            f"reference gain must be {run.input_dim}x{run.state_dim}, "
            f"got shape {ref.shape}"
        )
    return np.linalg.norm(run.gains - ref, axis=(2, 3))
