"""Command-line scenario runner.

Exit codes: 0 on success, 2 for configuration errors (including unknown
scenario names), 3 when a run's invariant suite fails.
"""

from __future__ import annotations

import argparse
import sys

from .core import RealityConditionError
from .observables import ConsistencyError
from .scenarios import (BUILTIN_SCENARIOS, ConfigError, InvariantFailure,
                        load_scenario, run_scenario, validate_scenario)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="majorana-eqs",
        description="Run embedding-quantum-simulator scenarios and write "
                    "their figure data as CSV/JSON.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario and write result files")
    run.add_argument("scenario", help="built-in scenario name or config path")
    run.add_argument("--seed", type=int, default=None,
                     help="override the tomography base seed")
    run.add_argument("--out-dir", default=".", help="output directory")
    run.add_argument("--grid-points", type=int, default=None,
                     help="override the momentum grid point count (odd)")
    run.add_argument("--shots", type=int, default=None,
                     help="override/enable tomography with this shot count")

    sub.add_parser("list", help="list the built-in scenarios")

    val = sub.add_parser("validate", help="parse and check a scenario "
                                          "without running it")
    val.add_argument("scenario", help="built-in scenario name or config path")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "list":
        for name in BUILTIN_SCENARIOS:
            print(name)
        return EXIT_OK

    if args.command == "validate":
        try:
            validate_scenario(load_scenario(args.scenario))
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"{args.scenario}: ok")
        return EXIT_OK

    try:
        manifest = run_scenario(args.scenario, out_dir=args.out_dir,
                                seed=args.seed, grid_points=args.grid_points,
                                shots=args.shots)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InvariantFailure, RealityConditionError, ConsistencyError) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    for name in manifest["outputs"]:
        print(name)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
