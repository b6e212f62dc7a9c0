"""Problem data for a network of identical discrete-time LTI agents.

Each agent evolves independently as x+ = A x + B u.  Agents are coupled only
through the cost: besides its own stage cost x'Q x + u'R u, an agent pays a
disagreement penalty (x_i - x_j)' Q (x_i - x_j) against every neighbor in an
undirected interaction graph.  ``assemble_global`` packs the N-agent problem
into Kronecker block form with state weight (L + I_N) (x) Q, where L is the
graph Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

# Absolute slack for symmetry / semidefiniteness checks.
TOL_SYM = 1e-10
# Relative singular-value threshold for numerical rank.
TOL_RANK = 1e-9

GRAPH_KINDS = ("path", "cycle", "complete", "star", "edgeless")


def _as_matrix(value, name: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _check_symmetric(M: np.ndarray, name: str, tol: float = TOL_SYM) -> None:
    skew = float(np.max(np.abs(M - M.T))) if M.size else 0.0
    scale = 1.0 + float(np.max(np.abs(M))) if M.size else 1.0
    if skew > tol * scale:
        raise ValueError(f"{name} is not symmetric (max |M - M'| = {skew:g})")


@dataclass
class LtiModel:
    """Identical agent dynamics x+ = A x + B u."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.A = _freeze(_as_matrix(self.A, "A"))
        self.B = _freeze(_as_matrix(self.B, "B"))
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise ValueError(f"A must be square, got shape {self.A.shape}")
        if self.B.shape[0] != n:
            raise ValueError(
                f"B must have {n} rows to match A, got shape {self.B.shape}"
            )

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass
class CostWeights:
    """Stage-cost weights and discount: x'Q x + u'R u, discount gamma."""

    Qbar: np.ndarray
    Rbar: np.ndarray
    gamma: float = 1.0

    def __post_init__(self):
        self.Qbar = _freeze(_as_matrix(self.Qbar, "Qbar"))
        self.Rbar = _freeze(_as_matrix(self.Rbar, "Rbar"))
        self.gamma = float(self.gamma)
        if self.Qbar.shape[0] != self.Qbar.shape[1]:
            raise ValueError(f"Qbar must be square, got shape {self.Qbar.shape}")
        if self.Rbar.shape[0] != self.Rbar.shape[1]:
            raise ValueError(f"Rbar must be square, got shape {self.Rbar.shape}")
        _check_symmetric(self.Qbar, "Qbar")
        _check_symmetric(self.Rbar, "Rbar")
        q_min = float(np.min(np.linalg.eigvalsh(0.5 * (self.Qbar + self.Qbar.T))))
        if q_min < -TOL_SYM:
            raise ValueError(f"Qbar must be positive semidefinite (min eig {q_min:g})")
        r_min = float(np.min(np.linalg.eigvalsh(0.5 * (self.Rbar + self.Rbar.T))))
        if r_min <= 0.0:
            raise ValueError(f"Rbar must be positive definite (min eig {r_min:g})")
        if not (0.0 < self.gamma <= 1.0):
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")


@dataclass
class InteractionGraph:
    """Undirected, unweighted agent topology."""

    num_agents: int
    edges: tuple = ()
    _neighbors: tuple = field(init=False, repr=False)

    def __post_init__(self):
        N = int(self.num_agents)
        if N < 1:
            raise ValueError(f"num_agents must be >= 1, got {N}")
        self.num_agents = N
        normalized = set()
        for edge in self.edges:
            i, j = int(edge[0]), int(edge[1])
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) is not allowed")
            if not (0 <= i < N and 0 <= j < N):
                raise ValueError(f"edge ({i}, {j}) out of range for {N} agents")
            normalized.add((min(i, j), max(i, j)))
        self.edges = tuple(sorted(normalized))
        nbrs = [[] for _ in range(N)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        self._neighbors = tuple(tuple(sorted(v)) for v in nbrs)

    def neighbors(self, agent: int) -> tuple:
        """Neighbor indices of ``agent`` in ascending order."""
        return self._neighbors[agent]

    def degree(self, agent: int) -> int:
        return len(self._neighbors[agent])


def make_graph(kind: str, num_agents: int) -> InteractionGraph:
    """Build one of the named topologies: path, cycle, complete, star, edgeless."""
    N = int(num_agents)
    if kind not in GRAPH_KINDS:
        raise ValueError(f"unknown graph kind {kind!r}, expected one of {GRAPH_KINDS}")
    if N < 1:
        raise ValueError(f"num_agents must be >= 1, got {N}")
    if kind == "edgeless" or N == 1:
        edges = []
    elif kind == "path":
        edges = [(i, i + 1) for i in range(N - 1)]
    elif kind == "cycle":
        edges = [(i, i + 1) for i in range(N - 1)] + [(N - 1, 0)]
    elif kind == "complete":
        edges = [(i, j) for i in range(N) for j in range(i + 1, N)]
    else:  # star, hub at node 0
        edges = [(0, i) for i in range(1, N)]
    return InteractionGraph(N, tuple(edges))


def load_graph(path, num_agents: int | None = None) -> InteractionGraph:
    """Read an edge list: one "i j" pair per line, 0-indexed, '#' comments allowed.

    When ``num_agents`` is omitted it is inferred as max index + 1.
    """
    path = Path(path)
    edges = []
    max_index = -1
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i j', got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: non-integer agent index in {raw!r}") from exc
        edges.append((i, j))
        max_index = max(max_index, i, j)
    if num_agents is None:
        num_agents = max_index + 1 if max_index >= 0 else 1
    return InteractionGraph(num_agents, tuple(edges))


def laplacian(graph: InteractionGraph) -> np.ndarray:
    """Graph Laplacian L = D - Adj; symmetric PSD with zero row sums."""
    N = graph.num_agents
    L = np.zeros((N, N))
    for i, j in graph.edges:
        L[i, i] += 1.0
        L[j, j] += 1.0
        L[i, j] -= 1.0
        L[j, i] -= 1.0
    return L


def controllability_check(model: LtiModel, tol: float = TOL_RANK) -> bool:
    """True iff [B AB ... A^(n-1)B] has full row rank (rank via singular values)."""
    n, m = model.n, model.m
    blocks = np.empty((n, n * m))
    block = model.B
    for i in range(n):
        blocks[:, i * m : (i + 1) * m] = block
        block = model.A @ block
    sv = np.linalg.svd(blocks, compute_uv=False)
    if sv[0] == 0.0:
        return False
    return int(np.sum(sv > tol * sv[0])) == n


@dataclass
class GlobalProblem:
    """Kronecker-assembled N-agent LQR problem."""

    Atilde: np.ndarray
    Btilde: np.ndarray
    Qtilde: np.ndarray
    Rtilde: np.ndarray
    num_agents: int
    n: int
    m: int

    def __post_init__(self):
        for name in ("Atilde", "Btilde", "Qtilde", "Rtilde"):
            setattr(self, name, _freeze(np.asarray(getattr(self, name), dtype=float)))


def assemble_global(
    model: LtiModel, weights: CostWeights, graph: InteractionGraph
) -> GlobalProblem:
    """Stack the network: A~ = I (x) A, B~ = I (x) B, Q~ = (L + I) (x) Q, R~ = I (x) R."""
    if weights.Qbar.shape[0] != model.n:
        raise ValueError(
            f"Qbar is {weights.Qbar.shape[0]}x{weights.Qbar.shape[0]} "
            f"but the state dimension is {model.n}"
        )
    if weights.Rbar.shape[0] != model.m:
        raise ValueError(
            f"Rbar is {weights.Rbar.shape[0]}x{weights.Rbar.shape[0]} "
            f"but the input dimension is {model.m}"
        )
    N = graph.num_agents
    eye = np.eye(N)
    L = laplacian(graph)
    return GlobalProblem(
        Atilde=np.kron(eye, model.A),
        Btilde=np.kron(eye, model.B),
        Qtilde=np.kron(L + eye, weights.Qbar),
        Rtilde=np.kron(eye, weights.Rbar),
        num_agents=N,
        n=model.n,
        m=model.m,
    )


def global_cost(problem: GlobalProblem, x, u) -> float:
    """One-step network cost x'Q~x + u'R~u on stacked state and input vectors.

    Equals the sum of per-agent stage costs plus one disagreement term
    (x_i - x_j)'Q(x_i - x_j) per undirected edge.
    """
    x = np.asarray(x, dtype=float).ravel()
    u = np.asarray(u, dtype=float).ravel()
    if x.size != problem.Qtilde.shape[0]:
        raise ValueError(
            f"stacked state has length {x.size}, expected {problem.Qtilde.shape[0]}"
        )
    if u.size != problem.Rtilde.shape[0]:
        raise ValueError(
            f"stacked input has length {u.size}, expected {problem.Rtilde.shape[0]}"
        )
    return float(x @ problem.Qtilde @ x + u @ problem.Rtilde @ u)
