"""Two-by-two difference-in-differences analysis and significance tests."""

from slhvb_lab.analysis.did import (
    CellStats,
    DidFit,
    ObservationTable,
    cell_stats,
    did_from_cells,
    did_ols,
    lift_percentages,
)
from slhvb_lab.analysis.significance import bootstrap_did, did_z_test

__all__ = [
    "CellStats",
    "DidFit",
    "ObservationTable",
    "cell_stats",
    "did_from_cells",
    "did_ols",
    "lift_percentages",
    "bootstrap_did",
    "did_z_test",
]
