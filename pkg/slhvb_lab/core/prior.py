"""Prior distributions over arm mean rewards."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import stats

from slhvb_lab.errors import DensityUnbounded, InfeasibleMoments, ZeroGap

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 10_000
MASS_TOLERANCE = 1e-9


class PriorSpec(BaseModel):
    """
    Bounded-density prior on [0, 1] from which arm means are drawn.

    Attributes:
        family: ``uniform``, ``truncated_beta`` or ``piecewise_constant``.
        alpha, beta: Beta shape parameters (``truncated_beta`` only).
        lo, hi: Truncation interval (``truncated_beta`` only).
        breakpoints, densities: Step density (``piecewise_constant`` only).
        declared_bounds: Optional (C1, C2) the density must stay within.
    """

    model_config = ConfigDict(frozen=True)

    family: Literal["uniform", "truncated_beta", "piecewise_constant"] = "uniform"
    alpha: Optional[float] = Field(default=None, gt=0, description="Beta alpha")
    beta: Optional[float] = Field(default=None, gt=0, description="Beta beta")
    lo: float = Field(default=0.0, ge=0.0, le=1.0, description="Truncation lower end")
    hi: float = Field(default=1.0, ge=0.0, le=1.0, description="Truncation upper end")
    breakpoints: Optional[Tuple[float, ...]] = Field(
        default=None, description="Increasing breakpoints in [0, 1]"
    )
    densities: Optional[Tuple[float, ...]] = Field(
        default=None, description="Density on each breakpoint interval"
    )
    declared_bounds: Optional[Tuple[float, float]] = Field(
        default=None, description="Declared (C1, C2) density bounds"
    )

    @model_validator(mode="after")
    def check_family(self):
        if self.family == "truncated_beta":
            if self.alpha is None or self.beta is None:
                raise ValueError("truncated_beta requires alpha and beta")
            if not self.lo < self.hi:
                raise ValueError("truncated_beta requires lo < hi")
        elif self.family == "piecewise_constant":
            self._check_piecewise()

        if self.declared_bounds is not None:
            c1, c2 = self.declared_bounds
            if not 0 < c1 <= c2:
                raise ValueError("declared_bounds must satisfy 0 < C1 <= C2")
            low, high = density_range(self, DEFAULT_GRID_POINTS)
            if low < c1 - MASS_TOLERANCE or high > c2 + MASS_TOLERANCE:
                raise ValueError(
                    f"density range [{low:.6g}, {high:.6g}] violates declared "
                    f"bounds [{c1}, {c2}]"
                )
        return self

    def _check_piecewise(self) -> None:
        if self.breakpoints is None or self.densities is None:
            raise ValueError("piecewise_constant requires breakpoints and densities")
        bp = np.asarray(self.breakpoints, dtype=float)
        dens = np.asarray(self.densities, dtype=float)
        if len(bp) < 2 or len(dens) != len(bp) - 1:
            raise ValueError("need len(densities) == len(breakpoints) - 1 >= 1")
        if bp[0] < 0.0 or bp[-1] > 1.0 or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing inside [0, 1]")
        if np.any(dens < 0):
            raise ValueError("densities must be nonnegative")
        mass = float(np.sum(dens * np.diff(bp)))
        if abs(mass - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"piecewise density integrates to {mass!r}, not 1")

    @property
    def support(self) -> Tuple[float, float]:
        if self.family == "truncated_beta":
            return self.lo, self.hi
        if self.family == "piecewise_constant":
            return self.breakpoints[0], self.breakpoints[-1]
        return 0.0, 1.0

    @property
    def truncation_mass(self) -> float:
        """Beta mass inside [lo, hi]; 1 for the other families."""
        if self.family != "truncated_beta":
            return 1.0
        dist = stats.beta(self.alpha, self.beta)
        return float(dist.cdf(self.hi) - dist.cdf(self.lo))


@dataclass(frozen=True)
class BetaParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"Beta parameters must be positive, got {self}")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        total = self.alpha + self.beta
        return self.alpha * self.beta / (total * total * (total + 1.0))


def density(p: PriorSpec, x):
    """Evaluate the prior density at ``x`` (scalar or array); 0 off the support."""
    xs = np.asarray(x, dtype=float)
    lo, hi = p.support
    inside = (xs >= lo) & (xs <= hi)

    if p.family == "uniform":
        values = np.where(inside, 1.0, 0.0)
    elif p.family == "truncated_beta":
        raw = stats.beta.pdf(np.clip(xs, 0.0, 1.0), p.alpha, p.beta)
        values = np.where(inside, raw / p.truncation_mass, 0.0)
    else:
        bp = np.asarray(p.breakpoints, dtype=float)
        dens = np.asarray(p.densities, dtype=float)
        idx = np.clip(np.searchsorted(bp, xs, side="right") - 1, 0, len(dens) - 1)
        values = np.where(inside, dens[idx], 0.0)

    if values.ndim == 0:
        return float(values)
    return values


def density_range(p: PriorSpec, grid_points: int) -> Tuple[float, float]:
    lo, hi = p.support
    values = density(p, np.linspace(lo, hi, grid_points))
    return float(np.min(values)), float(np.max(values))


def validate_bounded_density(
    p: PriorSpec, grid_points: int = DEFAULT_GRID_POINTS
) -> Tuple[float, float]:
    """Return (C1, C2), the density extremes over an even grid on the support.

    Raises:
        DensityUnbounded: if the density touches zero anywhere on the grid.
    """
    if grid_points < 100:
        raise ValueError(f"grid_points must be at least 100, got {grid_points}")
    c1, c2 = density_range(p, grid_points)
    if c1 <= 0.0:
        raise DensityUnbounded(
            f"{p.family} prior has zero density on its support; truncate it"
        )
    logger.debug(f"Prior {p.family} bounded in [{c1:.6g}, {c2:.6g}]")
    return c1, c2


def sample_means(p: PriorSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` iid arm means from the prior."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")

    if p.family == "uniform":
        return rng.random(count)

    if p.family == "truncated_beta":
        dist = stats.beta(p.alpha, p.beta)
        u = rng.uniform(dist.cdf(p.lo), dist.cdf(p.hi), size=count)
        return np.clip(dist.ppf(u), p.lo, p.hi)

    bp = np.asarray(p.breakpoints, dtype=float)
    widths = np.diff(bp)
    masses = np.asarray(p.densities, dtype=float) * widths
    idx = rng.choice(len(masses), size=count, p=masses / masses.sum())
    return bp[idx] + rng.random(count) * widths[idx]


def fit_beta_moments(mean: float, variance: float) -> BetaParams:
    """Method-of-moments Beta fit.

    Raises:
        InfeasibleMoments: unless 0 < mean < 1 and 0 < variance < mean(1 - mean).
    """
    if not 0.0 < mean < 1.0:
        raise InfeasibleMoments(f"mean must lie in (0, 1), got {mean!r}")
    if not variance > 0.0:
        raise InfeasibleMoments(f"variance must be positive, got {variance!r}")
    ceiling = mean * (1.0 - mean)
    if variance >= ceiling:
        raise InfeasibleMoments(
            f"variance {variance!r} must be below mean(1-mean) = {ceiling!r}"
        )
    alpha = mean * (ceiling / variance - 1.0)
    beta = (1.0 - mean) / mean * alpha
    return BetaParams(alpha=alpha, beta=beta)


def gap_reciprocal(values: Sequence[float]) -> float:
    """1 / (largest - second largest) of a fixed set of means."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two values")
    top2 = np.partition(arr, arr.size - 2)[-2:]
    gap = float(top2[1] - top2[0])
    if gap <= 0.0:
        raise ZeroGap(f"two largest values are tied at {top2[1]!r}")
    return 1.0 / gap


def gap_reciprocal_sample(p: PriorSpec, m: int, rng: np.random.Generator) -> float:
    """Draw ``m`` means from ``p`` and return the reciprocal top-two gap."""
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    return gap_reciprocal(sample_means(p, m, rng))


@dataclass
class GapReciprocalRun:
    """Outcome of a long run of gap-reciprocal draws."""

    m: int
    draws: np.ndarray
    zero_gaps: int = 0
    checkpoint_means: List[Tuple[int, float]] = field(default_factory=list)

    def running_mean(self, count: int) -> float:
        return float(np.mean(self.draws[:count]))

    def tail_probability(self, y: float) -> float:
        return float(np.mean(self.draws >= y))


def run_gap_reciprocal(
    p: PriorSpec,
    m: int,
    draws: int,
    rng: np.random.Generator,
    checkpoints: Optional[Sequence[int]] = None,
    chunk: int = 100_000,
) -> GapReciprocalRun:
    """Vectorized Monte Carlo of :func:`gap_reciprocal_sample`.

    Tied maxima are counted in ``zero_gaps`` and dropped instead of aborting.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    collected = []
    zero_gaps = 0
    remaining = draws
    while remaining > 0:
        size = min(chunk, remaining)
        top2 = np.sort(sample_means(p, size * m, rng).reshape(size, m), axis=1)[:, -2:]
        gaps = top2[:, 1] - top2[:, 0]
        tied = gaps <= 0.0
        zero_gaps += int(np.count_nonzero(tied))
        collected.append(1.0 / gaps[~tied])
        remaining -= size

    if zero_gaps:
        logger.warning(f"⚠️  {zero_gaps} zero gaps recorded over {draws} draws")

    run = GapReciprocalRun(m=m, draws=np.concatenate(collected), zero_gaps=zero_gaps)
    for n_draws in checkpoints or ():
        if n_draws <= len(run.draws):
            run.checkpoint_means.append((n_draws, run.running_mean(n_draws)))
    return run


def log_tail_slope(run: GapReciprocalRun, y_low: float, y_high: float) -> float:
    """Slope of log P[1/gap >= y] between two levels; -1 is the c/y rate."""
    p_low = run.tail_probability(y_low)
    p_high = run.tail_probability(y_high)
    if p_low <= 0 or p_high <= 0:
        return -math.inf
    return math.log(p_high / p_low) / math.log(y_high / y_low)
