"""CSV and JSON reports of episode summaries and round logs."""

import logging
from pathlib import Path
from typing import List, Literal, Optional, Sequence, Union

import pandas as pd

from slhvb_lab.core.metrics import EpisodeSummary, RoundLog

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
ReportFormat = Literal["csv", "json"]

SUMMARY_COLUMNS = [
    "replication",
    "seed",
    "rounds",
    "mean_loss",
    "ci",
    "mean_external",
    "mean_internal",
    "mean_reward",
    "oracle_reward",
    "pct_of_oracle",
    "warnings",
    "config_digest",
]


def summaries_frame(summaries: Sequence[EpisodeSummary]) -> pd.DataFrame:
    df = pd.DataFrame([s.to_dict() for s in summaries])
    if df.empty:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)
    df = df.rename(columns={"loss_ci_halfwidth": "ci"})
    return df[SUMMARY_COLUMNS]


def round_logs_frame(logs_by_replication: Sequence[Sequence[RoundLog]]) -> pd.DataFrame:
    """Flatten per-replication round logs, one column per pulled age."""
    rows = []
    for replication, logs in enumerate(logs_by_replication):
        for log in logs:
            row = {
                "replication": replication,
                "round": log.round,
                "loss": log.loss,
                "external": log.external_component,
                "internal": log.internal_component,
                "reward": log.reward,
                "oracle_mean": log.oracle_mean,
            }
            for age, count in enumerate(log.pulls_by_age):
                row[f"pulls_age_{age}"] = count
            rows.append(row)
    return pd.DataFrame(rows)


def render(df: pd.DataFrame, fmt: ReportFormat = "csv") -> str:
    if fmt == "csv":
        return df.to_csv(index=False, float_format=FLOAT_FORMAT)
    if fmt == "json":
        return df.to_json(orient="records", indent=2)
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(
    df: pd.DataFrame,
    path: Optional[Union[str, Path]] = None,
    fmt: ReportFormat = "csv",
) -> str:
    """Render ``df`` and write it to ``path`` when given; returns the text."""
    text = render(df, fmt)
    if path is not None:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text)
        except OSError as e:
            logger.error(f"Failed to write report {path}: {e}")
            raise
        logger.info(f"💾 Wrote {len(df)} rows to {path}")
    return text


def write_many(frames: dict, out_dir: Union[str, Path]) -> List[Path]:
    """Write ``{file name: frame}`` as CSV files under ``out_dir``."""
    out_dir = Path(out_dir)
    written = []
    for name, df in frames.items():
        path = out_dir / name
        write_report(df, path, "csv")
        written.append(path)
    return written
