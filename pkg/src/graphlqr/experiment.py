"""Experiment runner: JSON configs, presets, artifact persistence.

A run writes ``summary.json`` (config echo plus outcomes), ``iterations.csv``
(per-iteration, per-agent diagnostics), ``plotdata.csv`` (tidy long format for
plotting), optionally ``trajectories.csv``, and ``bench.csv`` in bench mode.
The config echoed into the summary re-validates and reproduces the identical
run: same seed, byte-identical CSV bodies.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bench import (
    DEFAULT_MAX_CENTRAL_DIM,
    saving_report,
    saving_table,
    stacked_problem,
    wall_time_comparison,
)
from .learner import (
    LearnerConfig,
    LearnRun,
    centralized_policy_iteration,
    distributed_policy_iteration,
    gain_error_series,
)
from .model import (
    GRAPH_KINDS,
    CostWeights,
    InteractionGraph,
    LtiModel,
    controllability_check,
    load_graph,
    make_graph,
)
from .qfunction import num_quad_params
from .riccati import solve_dare
from .sim import ExcitationConfig

MODES = ("distributed", "centralized", "both", "bench")

LEARNER_DEFAULTS = {
    "M": None,
    "K_max": 100,
    "min_iterations": 1,
    "stop_tol": 1e-6,
    "p0_scale": 1e3,
    "excitation_std": 1.0,
    "shared_excitation": True,
    "init_state_std": 1.0,
}

BENCH_DEFAULTS = {
    "N_list": [2, 3, 5, 8, 100],
    "M": 50,
    "iterations": 10,
    "wall_time": True,
    "wall_time_iterations": 2,
}


class ConfigError(ValueError):
    """Invalid experiment configuration; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n  - " + "\n  - ".join(self.errors))


@dataclass
class ExperimentConfig:
    raw: dict
    mode: str
    seed: int
    out_dir: str
    trajectories: bool
    max_central_dim: int
    model: LtiModel | None
    weights: CostWeights | None
    graph: InteractionGraph | None
    learner: LearnerConfig | None
    bench: dict | None
    system_generated: bool


def generate_system(
    seed: int, n: int, m: int, spectral_radius_target: float = 0.9
) -> tuple[np.ndarray, np.ndarray]:
    """Seeded random stable controllable pair (A, B) with rho(A) at the target."""
    if not (0.0 < spectral_radius_target < 1.0):
        raise ValueError(
            f"spectral_radius_target must lie in (0, 1), got {spectral_radius_target}"
        )
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    for attempt in range(100):
        rng = np.random.default_rng(
            np.random.SeedSequence(int(seed), spawn_key=(attempt,))
        )
        A = rng.standard_normal((n, n))
        radius = float(np.max(np.abs(np.linalg.eigvals(A))))
        if radius == 0.0:
            continue
        A *= spectral_radius_target / radius
        B = rng.standard_normal((n, m))
        if controllability_check(LtiModel(A, B)):
            return A, B
    raise RuntimeError(
        f"could not generate a controllable ({n}, {m}) system from seed {seed} "
        "after 100 attempts"
    )


def preset_config(name: str) -> dict:
    """Built-in experiment configurations."""
    if name == "scalar3":
        return {
            "mode": "distributed",
            "seed": 1,
            "system": {"A": [[0.9]], "B": [[1.0]]},
            "weights": {"Q": [[1.0]], "R": [[1.0]], "gamma": 1.0},
            "graph": {"kind": "path", "num_agents": 3},
            "learner": {"M": 30, "K_max": 25, "stop_tol": 1e-6,
                        "p0_scale": 1e3, "excitation_std": 1.0},
        }
    if name == "uav6":
        return {
            "mode": "distributed",
            "seed": 1,
            "system": {"generator": {"seed": 7, "n": 5, "m": 3,
                                     "spectral_radius": 0.9}},
            "weights": {"Q": "identity", "R": "identity", "gamma": 1.0},
            "graph": {"kind": "path", "num_agents": 6},
            "learner": {"M": 50, "K_max": 40, "stop_tol": 1e-6,
                        "p0_scale": 1e3, "excitation_std": 1.0},
        }
    raise KeyError(f"unknown preset {name!r}; available: scalar3, uav6")


PRESET_NAMES = ("scalar3", "uav6")


def _check_section(raw, key, allowed, errors):
    section = raw.get(key)
    if section is None:
        return {}
    if not isinstance(section, dict):
        errors.append(f"{key}: must be an object")
        return {}
    for sub in section:
        if sub not in allowed:
            errors.append(f"{key}.{sub}: unknown field")
    return section


def _resolve_weight(spec, dim, name, errors):
    if isinstance(spec, str):
        if spec == "identity":
            return np.eye(dim)
        errors.append(f"weights.{name}: unknown keyword {spec!r} (use 'identity')")
        return None
    try:
        return np.array(spec, dtype=float)
    except (TypeError, ValueError):
        errors.append(f"weights.{name}: not a numeric matrix")
        return None


def build_config(raw: dict) -> ExperimentConfig:
    """Validate a raw configuration dict, collecting every violation."""
    errors: list[str] = []
    if not isinstance(raw, dict):
        raise ConfigError(["configuration must be a JSON object"])
    known_top = {"mode", "seed", "out_dir", "trajectories", "max_central_dim",
                 "system", "weights", "graph", "learner", "bench"}
    for key in raw:
        if key not in known_top:
            errors.append(f"{key}: unknown field")

    mode = raw.get("mode", "distributed")
    if mode not in MODES:
        errors.append(f"mode: must be one of {MODES}, got {mode!r}")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append(f"seed: must be a non-negative integer, got {seed!r}")
        seed = 0
    out_dir = raw.get("out_dir", "graphlqr_runs")
    if not isinstance(out_dir, str) or not out_dir:
        errors.append("out_dir: must be a non-empty string")
        out_dir = "graphlqr_runs"
    trajectories = bool(raw.get("trajectories", False))
    max_central_dim = raw.get("max_central_dim", DEFAULT_MAX_CENTRAL_DIM)
    if not isinstance(max_central_dim, int) or max_central_dim < 1:
        errors.append(f"max_central_dim: must be a positive integer, got {max_central_dim!r}")
        max_central_dim = DEFAULT_MAX_CENTRAL_DIM

    # System.
    model = None
    system_generated = False
    system = _check_section(raw, "system", {"A", "B", "generator"}, errors)
    if not system:
        errors.append("system: required (inline A/B or a generator spec)")
    elif "generator" in system:
        gen = system["generator"]
        allowed = {"seed", "n", "m", "spectral_radius"}
        if not isinstance(gen, dict) or any(k not in allowed for k in gen):
            errors.append(f"system.generator: expected fields {sorted(allowed)}")
        else:
            try:
                A, B = generate_system(
                    int(gen.get("seed", 0)),
                    int(gen.get("n", 0)),
                    int(gen.get("m", 0)),
                    float(gen.get("spectral_radius", 0.9)),
                )
                model = LtiModel(A, B)
                system_generated = True
            except (ValueError, RuntimeError) as exc:
                errors.append(f"system.generator: {exc}")
    elif "A" in system and "B" in system:
        try:
            model = LtiModel(np.array(system["A"], dtype=float),
                             np.array(system["B"], dtype=float))
        except (TypeError, ValueError) as exc:
            errors.append(f"system: {exc}")
    else:
        errors.append("system: provide both A and B, or a generator spec")
    if model is not None and not controllability_check(model):
        errors.append("system: (A, B) is not controllable")

    # Weights.
    weights = None
    wsec = _check_section(raw, "weights", {"Q", "R", "gamma"}, errors)
    if model is not None:
        Q = _resolve_weight(wsec.get("Q", "identity"), model.n, "Q", errors)
        R = _resolve_weight(wsec.get("R", "identity"), model.m, "R", errors)
        gamma = wsec.get("gamma", 1.0)
        if Q is not None and R is not None:
            try:
                weights = CostWeights(Q, R, float(gamma))
            except (TypeError, ValueError) as exc:
                errors.append(f"weights: {exc}")
        if weights is not None and (
            weights.Qbar.shape[0] != model.n or weights.Rbar.shape[0] != model.m
        ):
            errors.append(
                f"weights: Q must be {model.n}x{model.n} and R {model.m}x{model.m}"
            )
            weights = None

    # Graph (not needed in bench mode, where N is swept).
    graph = None
    gsec = _check_section(raw, "graph", {"kind", "num_agents", "edges", "file"}, errors)
    graph_echo = None
    if mode != "bench" or gsec:
        if not gsec:
            if mode != "bench":
                errors.append("graph: required for learning modes")
        elif "file" in gsec:
            try:
                graph = load_graph(gsec["file"], gsec.get("num_agents"))
            except (OSError, ValueError) as exc:
                errors.append(f"graph.file: {exc}")
        elif "edges" in gsec:
            try:
                graph = InteractionGraph(int(gsec.get("num_agents", 0)),
                                         tuple(tuple(e) for e in gsec["edges"]))
            except (TypeError, ValueError) as exc:
                errors.append(f"graph: {exc}")
        elif "kind" in gsec:
            kind = gsec["kind"]
            if kind not in GRAPH_KINDS:
                errors.append(f"graph.kind: must be one of {GRAPH_KINDS}, got {kind!r}")
            else:
                try:
                    graph = make_graph(kind, int(gsec.get("num_agents", 0)))
                except (TypeError, ValueError) as exc:
                    errors.append(f"graph: {exc}")
        else:
            errors.append("graph: provide kind, edges, or file")
    if graph is not None:
        graph_echo = {
            "num_agents": graph.num_agents,
            "edges": [list(e) for e in graph.edges],
        }

    # Learner.
    lsec = _check_section(raw, "learner", set(LEARNER_DEFAULTS), errors)
    lvals = dict(LEARNER_DEFAULTS)
    lvals.update(lsec)
    learner = None
    try:
        excitation = ExcitationConfig(
            std=float(lvals["excitation_std"]),
            shared_across_agents=bool(lvals["shared_excitation"]),
            seed=None,
        )
        learner = LearnerConfig(
            M=None if lvals["M"] is None else int(lvals["M"]),
            K_max=int(lvals["K_max"]),
            min_iterations=int(lvals["min_iterations"]),
            stop_tol=float(lvals["stop_tol"]),
            p0_scale=float(lvals["p0_scale"]),
            excitation=excitation,
            init_state_std=float(lvals["init_state_std"]),
            seed=seed,
            log_trajectories=trajectories,
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"learner: {exc}")
    if learner is not None and model is not None and learner.M is not None:
        q = num_quad_params(model.n + model.m)
        if learner.M < q:
            errors.append(
                f"learner.M: {learner.M} is below the per-agent parameter count {q}"
            )

    # Bench section.
    bsec = _check_section(raw, "bench", set(BENCH_DEFAULTS), errors)
    bench = dict(BENCH_DEFAULTS)
    bench.update(bsec)
    if not (isinstance(bench["N_list"], list) and bench["N_list"]
            and all(isinstance(N, int) and N >= 1 for N in bench["N_list"])):
        errors.append("bench.N_list: must be a non-empty list of positive integers")
    if isinstance(bench["M"], list):
        if len(bench["M"]) != len(bench["N_list"]):
            errors.append("bench.M: per-N list must match N_list in length")
    elif not (isinstance(bench["M"], int) and bench["M"] >= 1):
        errors.append("bench.M: must be a positive integer or a per-N list")
    if not (isinstance(bench["iterations"], int) and bench["iterations"] >= 1):
        errors.append("bench.iterations: must be a positive integer")

    # Mode-specific feasibility.
    if (mode == "centralized" and model is not None and graph is not None
            and graph.num_agents * (model.n + model.m) > max_central_dim):
        errors.append(
            f"mode=centralized needs N(n+m) <= max_central_dim "
            f"({graph.num_agents * (model.n + model.m)} > {max_central_dim}); "
            "raise --max-central-dim to force it"
        )

    if errors:
        raise ConfigError(errors)

    # Normalized echo: re-validating it reproduces the identical run.
    echo = {
        "mode": mode,
        "seed": seed,
        "out_dir": out_dir,
        "trajectories": trajectories,
        "max_central_dim": max_central_dim,
        "system": (
            {"generator": dict(system["generator"])}
            if system_generated
            else {"A": model.A.tolist(), "B": model.B.tolist()}
        ),
        "weights": {
            "Q": weights.Qbar.tolist(),
            "R": weights.Rbar.tolist(),
            "gamma": weights.gamma,
        },
        "learner": {key: lvals[key] for key in LEARNER_DEFAULTS},
        "bench": bench,
    }
    if graph_echo is not None:
        echo["graph"] = graph_echo

    return ExperimentConfig(
        raw=echo,
        mode=mode,
        seed=seed,
        out_dir=out_dir,
        trajectories=trajectories,
        max_central_dim=max_central_dim,
        model=model,
        weights=weights,
        graph=graph,
        learner=learner,
        bench=bench,
        system_generated=system_generated,
    )


def load_config(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def write_iterations_csv(path, run: LearnRun, reference_gain) -> None:
    errors = gain_error_series(run, reference_gain)
    lines = ["k,agent,gain_error,gain_spread,pe_alpha,theta_delta"]
    for k in range(1, run.iterations_used + 1):
        for agent in range(run.num_agents):
            lines.append(
                f"{k},{agent},{_fmt(errors[k, agent])},{_fmt(run.gain_spread[k])},"
                f"{_fmt(run.pe_alpha[k - 1, agent])},{_fmt(run.theta_delta[k - 1, agent])}"
            )
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectories_csv(path, run: LearnRun) -> None:
    if run.trajectory_t is None:
        raise ValueError("run has no trajectory log; enable trajectories")
    n, m = run.state_dim, run.input_dim
    header = (
        "t,agent,"
        + ",".join(f"x{i}" for i in range(n))
        + ","
        + ",".join(f"u{i}" for i in range(m))
    )
    lines = [header]
    for idx, t in enumerate(run.trajectory_t):
        for agent in range(run.num_agents):
            xs = ",".join(_fmt(v) for v in run.trajectory_states[idx, agent])
            us = ",".join(_fmt(v) for v in run.trajectory_inputs[idx, agent])
            lines.append(f"{int(t)},{agent},{xs},{us}")
    Path(path).write_text("\n".join(lines) + "\n")


def emit_plot_data(run_dir) -> Path:
    """Tidy long-format CSV (k, agent, metric, value) from run artifacts.

    Covers gain error, gain spread, consensus gap and the excitation floor
    statistic; network-level metrics leave the agent column empty.
    """
    run_dir = Path(run_dir)
    summary_path = run_dir / "summary.json"
    iterations_path = run_dir / "iterations.csv"
    if not summary_path.exists() or not iterations_path.exists():
        raise FileNotFoundError(
            f"missing run artifacts in {run_dir} (need summary.json and iterations.csv)"
        )
    summary = json.loads(summary_path.read_text())
    lines = ["k,agent,metric,value"]
    rows = iterations_path.read_text().splitlines()[1:]
    seen_spread = set()
    for row in rows:
        k, agent, gain_error, gain_spread, pe_alpha, _ = row.split(",")
        lines.append(f"{k},{agent},gain_error,{gain_error}")
        lines.append(f"{k},{agent},pe_alpha,{pe_alpha}")
        if k not in seen_spread:
            lines.append(f"{k},,gain_spread,{gain_spread}")
            seen_spread.add(k)
    engine = "distributed" if "distributed" in summary.get("runs", {}) else "centralized"
    gaps = summary.get("runs", {}).get(engine, {}).get("consensus_gap_mean", [])
    for k, gap in enumerate(gaps, start=1):
        lines.append(f"{k},,consensus_gap,{_fmt(gap)}")
    out = run_dir / "plotdata.csv"
    out.write_text("\n".join(lines) + "\n")
    return out


def _run_summary(run: LearnRun, reference_gain) -> dict:
    errors = gain_error_series(run, reference_gain)
    return {
        "reference_gain": np.asarray(reference_gain).tolist(),
        "iterations_used": run.iterations_used,
        "converged": run.converged,
        "samples_per_iteration": run.samples_per_iteration,
        "final_gains": run.final_gains.tolist(),
        "gain_error_final": errors[run.iterations_used].tolist(),
        "gain_spread_final": float(run.gain_spread[run.iterations_used]),
        "gain_spread_first": float(run.gain_spread[1]) if run.iterations_used else 0.0,
        "consensus_gap_mean": run.consensus_gap_mean.tolist(),
        "wall_time_s": run.wall_time_s,
        "rls_ops": run.rls_ops,
        "skipped_updates": [list(x) for x in run.skipped_updates],
        "pe_violations": [list(x) for x in run.pe_violations],
    }


def _write_bench_csv(path, reports) -> None:
    lines = [
        "N,n,m,q_central,q_dist,ops_central,ops_dist,"
        "saving_measured_pct,saving_predicted_pct"
    ]
    for r in reports:
        lines.append(
            f"{r.num_agents},{r.state_dim},{r.input_dim},{r.q_central},"
            f"{r.q_distributed},{r.centralized_ops},{r.distributed_ops},"
            f"{_fmt(r.measured_saving_pct)},{_fmt(r.predicted_saving_pct)}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def run(config: ExperimentConfig, out_dir=None) -> dict:
    """Execute the configured experiment and write its artifacts."""
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"config": config.raw, "runs": {}, "notices": [], "artifacts": {}}
    if config.model is not None:
        summary["system"] = {
            "A": config.model.A.tolist(),
            "B": config.model.B.tolist(),
            "n": config.model.n,
            "m": config.model.m,
            "generated": config.system_generated,
        }

    if config.mode == "bench":
        _run_bench(config, out, summary)
    else:
        if config.mode in ("distributed", "both"):
            _run_engine(config, out, summary, "distributed")
        if config.mode in ("centralized", "both"):
            _run_engine(config, out, summary, "centralized")

    summary_path = out / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    summary["artifacts"]["summary"] = str(summary_path)

    if config.mode != "bench" and summary["runs"]:
        emit_plot_data(out)
        summary["artifacts"]["plotdata"] = str(out / "plotdata.csv")
    return summary


def _run_engine(config: ExperimentConfig, out: Path, summary: dict, engine: str) -> None:
    model, weights, graph = config.model, config.weights, config.graph
    N = graph.num_agents
    if engine == "distributed":
        oracle = solve_dare(model, weights)
        reference = -oracle.Kstar
        run_ = distributed_policy_iteration(model, weights, graph, config.learner)
        csv_name, traj_name = "iterations.csv", "trajectories.csv"
    else:
        central_dim = N * (model.n + model.m)
        if central_dim > config.max_central_dim:
            summary["notices"].append(
                f"centralized engine skipped: stacked dimension {central_dim} "
                f"exceeds max_central_dim {config.max_central_dim}"
            )
            return
        stacked_model, stacked_weights = stacked_problem(model, weights, graph)
        q_central = num_quad_params(stacked_model.n + stacked_model.m)
        cfg = config.learner
        M = 3 * num_quad_params(model.n + model.m) if cfg.M is None else cfg.M
        if M < q_central:
            cfg = replace(cfg, M=q_central)
            summary["notices"].append(
                f"centralized sample count raised to the stacked parameter "
                f"count {q_central}"
            )
        oracle = solve_dare(stacked_model, stacked_weights)
        reference = -oracle.Kstar
        run_ = centralized_policy_iteration(stacked_model, stacked_weights, cfg)
        csv_name = "iterations.csv" if config.mode == "centralized" else "iterations_central.csv"
        traj_name = "trajectories.csv" if config.mode == "centralized" else "trajectories_central.csv"

    summary["runs"][engine] = _run_summary(run_, reference)
    csv_path = out / csv_name
    write_iterations_csv(csv_path, run_, reference)
    summary["artifacts"][f"iterations_{engine}"] = str(csv_path)
    if config.trajectories:
        traj_path = out / traj_name
        write_trajectories_csv(traj_path, run_)
        summary["artifacts"][f"trajectories_{engine}"] = str(traj_path)


def _run_bench(config: ExperimentConfig, out: Path, summary: dict) -> None:
    bench = config.bench
    n, m = config.model.n, config.model.m
    N_list = bench["N_list"]
    M_list = bench["M"] if isinstance(bench["M"], list) else [bench["M"]] * len(N_list)
    reports = [
        saving_report(N, n, m, M, bench["iterations"])
        for N, M in zip(N_list, M_list)
    ]
    _write_bench_csv(out / "bench.csv", reports)
    summary["artifacts"]["bench"] = str(out / "bench.csv")
    table = saving_table(N_list)
    summary["bench"] = {
        "table": table,
        "rows": [
            {
                "N": r.num_agents,
                "q_central": r.q_central,
                "q_dist": r.q_distributed,
                "ops_central": r.centralized_ops,
                "ops_dist": r.distributed_ops,
                "saving_measured_pct": r.measured_saving_pct,
                "saving_predicted_pct": r.predicted_saving_pct,
            }
            for r in reports
        ],
        "wall_time": [],
    }

    if bench["wall_time"]:
        # Graph topology does not affect op counts; timings use a chain.
        for N, M in zip(N_list, M_list):
            if N * (n + m) > config.max_central_dim:
                summary["notices"].append(
                    f"wall-time comparison skipped for N={N}: stacked dimension "
                    f"{N * (n + m)} exceeds max_central_dim {config.max_central_dim}"
                )
                continue
            cfg = replace(config.learner, M=M)
            report = wall_time_comparison(
                config.model,
                config.weights,
                make_graph("path", N),
                cfg,
                iterations=bench["wall_time_iterations"],
                max_central_dim=config.max_central_dim,
            )
            summary["bench"]["wall_time"].append(
                {
                    "N": N,
                    "samples_per_iteration": report.samples_per_iteration,
                    "distributed_s": report.distributed.wall_time_s,
                    "centralized_s": (
                        report.centralized.wall_time_s if report.centralized else None
                    ),
                    "distributed_ops": report.distributed.rls_ops,
                    "centralized_ops": (
                        report.centralized.rls_ops if report.centralized else None
                    ),
                }
            )
