"""Handlers for analysis subcommands: did, ztest, bootstrap."""
import sys

import pandas as pd

from slhvb_lab.console import error, info, success, warning


def _load(path):
    from slhvb_lab.analysis.did import read_analysis_csv

    try:
        return read_analysis_csv(path)
    except (OSError, ValueError, KeyError, pd.errors.ParserError) as e:
        error(f"Failed to read {path}: {e}")
        sys.exit(1)


def _write_row(row: dict) -> None:
    sys.stdout.write(pd.DataFrame([row]).to_csv(index=False, float_format="%.9g"))


def handle_did(args) -> None:
    from slhvb_lab.analysis.did import (
        ObservationTable,
        did_from_cells,
        did_ols,
        lift_percentages,
    )
    from slhvb_lab.errors import SlhvbError
    from slhvb_lab.harness.report import write_report

    data = _load(args.input)
    try:
        fit = did_ols(data) if isinstance(data, ObservationTable) else did_from_cells(data)
        text = write_report(fit.to_frame(), args.out, args.format)
    except (SlhvbError, OSError) as e:
        error(f"DID regression failed: {e}")
        sys.exit(1)

    if args.out is None:
        sys.stdout.write(text)
    else:
        success(f"Coefficients written to {args.out}")
    try:
        info(f"Lift: {100.0 * lift_percentages(fit):.2f}%")
    except SlhvbError as e:
        warning(f"Lift undefined: {e}")


def handle_ztest(args) -> None:
    from slhvb_lab.analysis.did import ObservationTable, cell_stats
    from slhvb_lab.analysis.significance import did_z_test
    from slhvb_lab.errors import SlhvbError

    data = _load(args.input)
    try:
        cells = cell_stats(data) if isinstance(data, ObservationTable) else data
        z, p = did_z_test(cells)
    except SlhvbError as e:
        error(f"Z-test failed: {e}")
        sys.exit(1)
    _write_row({"z": z, "p_value": p})


def handle_bootstrap(args) -> None:
    import numpy as np

    from slhvb_lab.analysis.did import CELLS, ObservationTable
    from slhvb_lab.analysis.significance import bootstrap_did, samples_from_table
    from slhvb_lab.errors import SlhvbError

    data = _load(args.input)
    if not isinstance(data, ObservationTable):
        error("Bootstrap needs raw (t, i, y) rows, not a cell summary")
        sys.exit(1)

    samples = samples_from_table(data)
    size = args.resample_size or min(len(samples[key]) for key in CELLS)
    try:
        z, p = bootstrap_did(samples, args.draws, size, np.random.default_rng(args.seed))
    except (SlhvbError, ValueError) as e:
        error(f"Bootstrap failed: {e}")
        sys.exit(1)
    _write_row({"z": z, "p_value": p, "draws": args.draws, "resample_size": size})
