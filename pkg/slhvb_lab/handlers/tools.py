"""Handlers for tool subcommands: grid, fit-prior."""
import sys

import pandas as pd

from slhvb_lab.console import error, success


def handle_grid(args) -> None:
    from slhvb_lab.core.grids import build_grid
    from slhvb_lab.harness.report import write_report

    try:
        grid = build_grid(args.kind, args.level, args.n, args.k, args.log_factor)
        df = pd.DataFrame(
            {"i": range(len(grid.fractions)), "epsilon_i": list(grid.fractions)}
        )
        text = write_report(df, args.out, args.format)
    except (ValueError, OSError) as e:
        error(f"Grid failed: {e}")
        sys.exit(1)
    if args.out is None:
        sys.stdout.write(text)
    else:
        success(f"Grid written to {args.out}")


def handle_fit_prior(args) -> None:
    from slhvb_lab.core.prior import fit_beta_moments
    from slhvb_lab.errors import InfeasibleMoments

    try:
        params = fit_beta_moments(args.mean, args.variance)
    except InfeasibleMoments as e:
        error(f"No Beta prior matches: {e}")
        sys.exit(1)
    sys.stdout.write(
        pd.DataFrame([{"alpha": params.alpha, "beta": params.beta}]).to_csv(
            index=False, float_format="%.12g"
        )
    )
