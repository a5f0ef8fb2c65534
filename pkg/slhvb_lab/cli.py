import argparse
import importlib.metadata
import sys


def _add_output_args(parser):
    parser.add_argument("--out", type=str, help="Write the report here instead of stdout")
    parser.add_argument(
        "--format",
        type=str,
        default="csv",
        choices=["csv", "json"],
        help="Report format",
    )


def _int_list(text: str):
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="SLHVB Lab: short-lifetime bandit simulations and DID analysis"
    )
    try:
        version = importlib.metadata.version("slhvb_lab")
    except importlib.metadata.PackageNotFoundError:
        version = "unknown"
    parser.add_argument("--version", action="version", version=version)
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Enable verbose output"
    )
    parser.add_argument(
        "--debug", "-d", action="store_true", help="Enable debug logging"
    )

    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # Simulate command
    simulate_parser = subparsers.add_parser(
        "simulate", help="Run every replication of one experiment config"
    )
    simulate_parser.add_argument(
        "--config", type=str, required=True, help="Experiment config (JSON or YAML)"
    )
    simulate_parser.add_argument("--seed", type=int, help="Override the base seed")
    simulate_parser.add_argument(
        "--parallelism", type=int, default=1, help="Worker processes"
    )
    simulate_parser.add_argument(
        "--round-log", type=str, help="Also write per-round logs to this file"
    )
    _add_output_args(simulate_parser)

    # Sweep command
    sweep_parser = subparsers.add_parser(
        "sweep", help="Vary one parameter of a base config"
    )
    sweep_parser.add_argument(
        "--config", type=str, required=True, help="Sweep spec (axis, values, base)"
    )
    sweep_parser.add_argument("--seed", type=int, help="Override the base seed")
    sweep_parser.add_argument(
        "--parallelism", type=int, default=1, help="Worker processes"
    )
    _add_output_args(sweep_parser)

    # Grid command
    grid_parser = subparsers.add_parser("grid", help="Print an exploration grid")
    grid_parser.add_argument(
        "--kind",
        type=str,
        default="revised",
        choices=["revised", "revised_normalized", "minimax", "geometric"],
    )
    grid_parser.add_argument("--level", type=int, required=True, help="Grid level")
    grid_parser.add_argument("--n", type=int, required=True, help="Plays per round")
    grid_parser.add_argument("--k", type=int, help="Arms per round (revised grids)")
    grid_parser.add_argument(
        "--log-factor", action="store_true", help="Scale by powers of ln n"
    )
    _add_output_args(grid_parser)

    # Fit-prior command
    fit_parser = subparsers.add_parser(
        "fit-prior", help="Beta parameters matching a mean and variance"
    )
    fit_parser.add_argument("mean", type=float)
    fit_parser.add_argument("variance", type=float)

    # DID analysis commands
    did_parser = subparsers.add_parser(
        "did", help="Difference-in-differences regression"
    )
    did_parser.add_argument(
        "--input", type=str, required=True, help="Rows (t, i, y) or a 4-row cell summary"
    )
    _add_output_args(did_parser)

    ztest_parser = subparsers.add_parser("ztest", help="One-sided Z-test of DID > 0")
    ztest_parser.add_argument("--input", type=str, required=True)

    bootstrap_parser = subparsers.add_parser(
        "bootstrap", help="Bootstrap Z-test of DID > 0 on raw rows"
    )
    bootstrap_parser.add_argument("--input", type=str, required=True)
    bootstrap_parser.add_argument("--draws", type=int, default=1000)
    bootstrap_parser.add_argument(
        "--resample-size", type=int, help="Values per resample (default: cell size)"
    )
    bootstrap_parser.add_argument("--seed", type=int, default=0)

    # Scenario command
    scenario_parser = subparsers.add_parser("scenario", help="Run a named preset")
    scenario_parser.add_argument("name", nargs="?", help="Scenario name")
    scenario_parser.add_argument(
        "--list", action="store_true", help="List available scenarios"
    )
    scenario_parser.add_argument("--out-dir", type=str, default="results")
    scenario_parser.add_argument("--replications", type=int)
    scenario_parser.add_argument("--horizon", type=int)
    scenario_parser.add_argument(
        "--n-values", type=_int_list, help="Comma-separated n grid"
    )
    scenario_parser.add_argument(
        "--k-values", type=_int_list, help="Comma-separated k grid"
    )
    scenario_parser.add_argument(
        "--levels", type=_int_list, help="Comma-separated levels"
    )
    scenario_parser.add_argument("--parallelism", type=int, default=1)
    scenario_parser.add_argument("--seed", type=int, default=0)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging based on flags
    import logging

    if args.debug:
        logging.basicConfig(
            level=logging.DEBUG,
            format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        )
        print("🐛 Debug logging enabled", file=sys.stderr)
    elif args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s: %(message)s")
        print("📢 Verbose output enabled", file=sys.stderr)
    else:
        logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")

    if args.command == "simulate":
        from slhvb_lab.handlers.simulate import handle_simulate
        handle_simulate(args)

    elif args.command == "sweep":
        from slhvb_lab.handlers.simulate import handle_sweep
        handle_sweep(args)

    elif args.command == "scenario":
        from slhvb_lab.handlers.simulate import handle_scenario
        handle_scenario(args)

    elif args.command == "grid":
        from slhvb_lab.handlers.tools import handle_grid
        handle_grid(args)

    elif args.command == "fit-prior":
        from slhvb_lab.handlers.tools import handle_fit_prior
        handle_fit_prior(args)

    elif args.command == "did":
        from slhvb_lab.handlers.analysis import handle_did
        handle_did(args)

    elif args.command == "ztest":
        from slhvb_lab.handlers.analysis import handle_ztest
        handle_ztest(args)

    elif args.command == "bootstrap":
        from slhvb_lab.handlers.analysis import handle_bootstrap
        handle_bootstrap(args)

    else:
        parser.print_help()


if __name__ == "__main__":
    main()
