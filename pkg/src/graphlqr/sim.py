"""Deterministic, seedable multi-agent LTI simulation.

Agents never interact through the dynamics; every agent advances
independently under x+ = A x + B u in one synchronous step.  Excitation is a
pure function of (seed, time step), so trajectories are bit-reproducible and
the shared-excitation mode hands every agent the identical realization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import InteractionGraph, LtiModel

BLOWUP_BOUND = 1e12


class InstabilityError(RuntimeError):
    """A state norm crossed the blow-up bound (diverging closed loop)."""

    def __init__(self, agent: int, step: int, norm: float):
        super().__init__(
            f"instability detected: agent {agent} reached state norm {norm:.3e} "
            f"at step {step}"
        )
        self.agent = agent
        self.step = step


@dataclass
class ExcitationConfig:
    """Gaussian exploration noise added to every agent's feedback action."""

    std: float = 1.0
    shared_across_agents: bool = True
    seed: int | None = None
    kind: str = "gaussian"

    def __post_init__(self):
        self.std = float(self.std)
        if not self.std > 0.0:
            raise ValueError(f"excitation std must be > 0, got {self.std}")
        if self.kind != "gaussian":
            raise ValueError(f"unsupported excitation kind {self.kind!r}")


def draw_excitation(
    config: ExcitationConfig, t: int, input_dim: int, num_agents: int = 1
) -> np.ndarray:
    """Excitation for step ``t`` as a (num_agents, input_dim) array.

    Deterministic in (seed, t); in shared mode all rows are the identical
    realization.
    """
    if config.seed is None:
        raise ValueError("excitation seed is unset; provide ExcitationConfig.seed")
    rng = np.random.default_rng(
        np.random.SeedSequence(int(config.seed), spawn_key=(int(t),))
    )
    if config.shared_across_agents:
        e = rng.standard_normal(input_dim) * config.std
        return np.tile(e, (num_agents, 1))
    return rng.standard_normal((num_agents, input_dim)) * config.std


def initial_states(
    num_agents: int, state_dim: int, seed: int, std: float = 1.0
) -> np.ndarray:
    """Seeded i.i.d. Gaussian initial states, one row per agent."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    return rng.standard_normal((num_agents, state_dim)) * std


@dataclass
class NetworkState:
    """Synchronous network snapshot: time step and one state row per agent."""

    t: int
    states: np.ndarray

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        if self.states.ndim != 2:
            raise ValueError(
                f"states must be (num_agents, n), got shape {self.states.shape}"
            )
        self.states.setflags(write=False)

    @property
    def num_agents(self) -> int:
        return self.states.shape[0]


def step(
    net: NetworkState,
    model: LtiModel,
    inputs,
    blowup_bound: float = BLOWUP_BOUND,
) -> NetworkState:
    """Advance every agent one step under its own input; t increments by 1."""
    U = np.asarray(inputs, dtype=float)
    if U.shape != (net.num_agents, model.m):
        raise ValueError(
            f"inputs must be ({net.num_agents}, {model.m}), got shape {U.shape}"
        )
    nxt = net.states @ model.A.T + U @ model.B.T
    norms = np.linalg.norm(nxt, axis=1)
    bad = ~np.isfinite(norms) | (norms > blowup_bound)
    if np.any(bad):
        agent = int(np.argmax(bad))
        raise InstabilityError(agent, net.t + 1, float(norms[agent]))
    return NetworkState(t=net.t + 1, states=nxt)


def neighbor_states(net: NetworkState, graph: InteractionGraph, agent: int) -> list:
    """States of the agent's neighbors, in ascending neighbor-index order."""
    return [net.states[j] for j in graph.neighbors(agent)]


def consensus_gap(net: NetworkState) -> float:
    """Largest pairwise state distance max_{i,j} ||x_i - x_j||_2 (0 for N = 1)."""
    X = net.states
    if X.shape[0] == 1:
        return 0.0
    diffs = X[:, None, :] - X[None, :, :]
    return float(np.max(np.linalg.norm(diffs, axis=2)))
