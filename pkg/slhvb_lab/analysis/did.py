"""Difference-in-differences regression on a 2x2 pre/post x control/treatment design."""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import statsmodels.formula.api as smf
from scipy import stats

from slhvb_lab.errors import DegenerateVariance, RankDeficient, ZeroBaseline

logger = logging.getLogger(__name__)

TERMS = ("intercept", "post", "treatment", "post:treatment")
CI_Z = 1.96

Group = Literal["control", "treatment"]
Period = Literal["pre", "post"]
CELLS: Tuple[Tuple[str, str], ...] = (
    ("control", "pre"),
    ("treatment", "pre"),
    ("control", "post"),
    ("treatment", "post"),
)


@dataclass(frozen=True)
class CellStats:
    group: Group
    period: Period
    count: int
    mean: float
    se_mean: float

    def __post_init__(self):
        if self.group not in ("control", "treatment"):
            raise ValueError(f"unknown group {self.group!r}")
        if self.period not in ("pre", "post"):
            raise ValueError(f"unknown period {self.period!r}")
        if self.count < 1:
            raise ValueError(f"count must be positive, got {self.count}")
        if not self.se_mean > 0:
            raise DegenerateVariance(f"cell {self.group}/{self.period} has se_mean 0")


@dataclass
class ObservationTable:
    """Rows (t, i, y): t = 1 after the change, i = 1 for the treatment group."""

    t: np.ndarray
    i: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=int)
        self.i = np.asarray(self.i, dtype=int)
        self.y = np.asarray(self.y, dtype=float)
        if not len(self.t) == len(self.i) == len(self.y):
            raise ValueError("t, i and y must have the same length")
        if np.any(~np.isin(self.t, (0, 1))) or np.any(~np.isin(self.i, (0, 1))):
            raise ValueError("t and i must be 0/1 indicators")

    @classmethod
    def from_frame(cls, df: pd.DataFrame) -> "ObservationTable":
        missing = {"t", "i", "y"} - set(df.columns)
        if missing:
            raise ValueError(f"observation table is missing columns {sorted(missing)}")
        return cls(t=df["t"].to_numpy(), i=df["i"].to_numpy(), y=df["y"].to_numpy())

    @classmethod
    def from_cell_means(cls, means: Dict[Tuple[str, str], float]) -> "ObservationTable":
        """One row per cell holding that cell's mean."""
        rows = [
            (int(period == "post"), int(group == "treatment"), means[(group, period)])
            for group, period in CELLS
        ]
        t, i, y = zip(*rows)
        return cls(t=np.array(t), i=np.array(i), y=np.array(y))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t, "i": self.i, "y": self.y})

    def cell(self, group: str, period: str) -> np.ndarray:
        mask = (self.i == int(group == "treatment")) & (self.t == int(period == "post"))
        return self.y[mask]

    def __len__(self) -> int:
        return len(self.y)


@dataclass
class DidFit:
    """Coefficients in TERMS order with normal-approximation inference.

    Standard errors are NaN when the fit leaves no residual degrees of freedom.
    """

    beta: List[float]
    se: List[float]
    t_stat: List[float] = field(default_factory=list)
    p_value: List[float] = field(default_factory=list)
    ci95: List[Tuple[float, float]] = field(default_factory=list)

    @classmethod
    def from_estimates(cls, beta: Sequence[float], se: Sequence[float]) -> "DidFit":
        beta = [float(b) for b in beta]
        se = [float(s) for s in se]
        t_stat, p_value, ci95 = [], [], []
        for b, s in zip(beta, se):
            t = b / s if s > 0 else math.nan
            t_stat.append(t)
            p_value.append(float(2.0 * stats.norm.sf(abs(t))) if s > 0 else math.nan)
            ci95.append((b - CI_Z * s, b + CI_Z * s))
        return cls(beta=beta, se=se, t_stat=t_stat, p_value=p_value, ci95=ci95)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "term": TERMS,
                "beta": self.beta,
                "se": self.se,
                "t_stat": self.t_stat,
                "p_value": self.p_value,
                "ci_low": [c[0] for c in self.ci95],
                "ci_high": [c[1] for c in self.ci95],
            }
        )


def did_ols(table: ObservationTable) -> DidFit:
    """OLS of y on (1, t, i, t*i) with homoskedastic standard errors.

    Raises:
        RankDeficient: if a (t, i) cell is empty.
    """
    for group, period in CELLS:
        if table.cell(group, period).size == 0:
            raise RankDeficient(f"cell {group}/{period} has no rows")

    result = smf.ols("y ~ t + i + t:i", data=table.to_frame()).fit()
    beta = [float(result.params[name]) for name in ("Intercept", "t", "i", "t:i")]
    if result.df_resid < 1:
        logger.warning("DID fit has no residual degrees of freedom; SEs undefined")
        se = [math.nan] * 4
    else:
        se = [float(result.bse[name]) for name in ("Intercept", "t", "i", "t:i")]
    return DidFit.from_estimates(beta, se)


def cell_stats(table: ObservationTable) -> List[CellStats]:
    """Count, mean and standard error of the mean for each of the four cells."""
    cells = []
    for group, period in CELLS:
        values = table.cell(group, period)
        if values.size < 2:
            raise DegenerateVariance(f"cell {group}/{period} needs at least two rows")
        cells.append(
            CellStats(
                group=group,
                period=period,
                count=int(values.size),
                mean=float(np.mean(values)),
                se_mean=float(np.std(values, ddof=1) / math.sqrt(values.size)),
            )
        )
    return cells


def cells_by_key(cells: Sequence[CellStats]) -> Dict[Tuple[str, str], CellStats]:
    keyed = {(c.group, c.period): c for c in cells}
    missing = [key for key in CELLS if key not in keyed]
    if missing or len(cells) != 4:
        raise RankDeficient(f"need exactly the four cells, missing {missing}")
    return keyed


def did_from_cells(cells: Sequence[CellStats]) -> DidFit:
    """Saturated DID estimates from cell summaries; SEs add cell SEs in quadrature."""
    c = cells_by_key(cells)
    m = {key: cell.mean for key, cell in c.items()}
    s2 = {key: cell.se_mean**2 for key, cell in c.items()}
    cp, tp, cq, tq = CELLS
    beta = [
        m[cp],
        m[cq] - m[cp],
        m[tp] - m[cp],
        (m[tq] - m[cq]) - (m[tp] - m[cp]),
    ]
    se = [
        math.sqrt(s2[cp]),
        math.sqrt(s2[cp] + s2[cq]),
        math.sqrt(s2[cp] + s2[tp]),
        math.sqrt(sum(s2.values())),
    ]
    return DidFit.from_estimates(beta, se)


def lift_percentages(fit: DidFit) -> float:
    """beta3 / (beta0 + beta1), returned as a fraction."""
    baseline = fit.beta[0] + fit.beta[1]
    if baseline == 0:
        raise ZeroBaseline("beta0 + beta1 is zero")
    return fit.beta[3] / baseline


def read_analysis_csv(path: Union[str, Path]) -> Union[ObservationTable, List[CellStats]]:
    """Load raw (t, i, y) rows or a four-row (group, period, count, mean, se) summary."""
    df = pd.read_csv(path)
    if {"group", "period", "mean", "se"} <= set(df.columns):
        if "count" not in df.columns:
            df["count"] = 1
        return [
            CellStats(
                group=str(row["group"]),
                period=str(row["period"]),
                count=int(row["count"]),
                mean=float(row["mean"]),
                se_mean=float(row["se"]),
            )
            for row in df.to_dict("records")
        ]
    return ObservationTable.from_frame(df)
