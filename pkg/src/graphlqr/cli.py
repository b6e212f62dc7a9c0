"""Command-line experiment runner.

Exit codes: 0 on success, 2 for configuration errors, 3 for runtime failures.
"""

from __future__ import annotations

import argparse
import sys

from .experiment import (
    MODES,
    PRESET_NAMES,
    ConfigError,
    build_config,
    load_config,
    preset_config,
    run,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphlqr",
        description=(
            "Distributed Q-learning policy iteration for cost-coupled identical "
            "LTI agents: run learning experiments and complexity benchmarks."
        ),
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", metavar="PATH", help="JSON experiment config")
    source.add_argument(
        "--preset", choices=PRESET_NAMES, help="built-in experiment configuration"
    )
    parser.add_argument("--mode", choices=MODES, help="override the config mode")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out", metavar="DIR", help="output directory for artifacts")
    parser.add_argument(
        "--trajectories",
        action="store_true",
        help="also write per-step state/input logs (heavy)",
    )
    parser.add_argument(
        "--max-central-dim",
        type=int,
        metavar="D",
        help="skip the centralized engine when N(n+m) exceeds D",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = preset_config(args.preset) if args.preset else load_config(args.config)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load configuration: {exc}", file=sys.stderr)
        return 2

    if args.mode is not None:
        raw["mode"] = args.mode
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["out_dir"] = args.out
    if args.trajectories:
        raw["trajectories"] = True
    if args.max_central_dim is not None:
        raw["max_central_dim"] = args.max_central_dim

    try:
        config = build_config(raw)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        summary = run(config)
    except Exception as exc:  # noqa: BLE001 - map every runtime failure to exit 3
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3

    for notice in summary["notices"]:
        print(f"notice: {notice}")
    if "bench" in summary:
        print(summary["bench"]["table"])
    for engine, result in summary["runs"].items():
        err = max(result["gain_error_final"]) if result["gain_error_final"] else 0.0
        print(
            f"{engine}: {result['iterations_used']} iterations, "
            f"converged={result['converged']}, max gain error {err:.3e}, "
            f"{result['wall_time_s']:.2f}s"
        )
    print(f"artifacts written to {config.out_dir if args.out is None else args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
