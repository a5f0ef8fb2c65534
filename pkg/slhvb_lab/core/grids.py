"""Exploration grids, threshold exponents and the Hybrid (level, k') plan."""

import logging
import math
from fractions import Fraction
from typing import Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from slhvb_lab.errors import GridInfeasible

logger = logging.getLogger(__name__)

MAX_LEVEL = 64
SUM_TOLERANCE = 1e-12
UNBOUNDED = math.inf

GridKind = Literal["revised", "minimax", "geometric", "revised_normalized"]


class GridSpec(BaseModel):
    """Batch-size fractions (eps_0, ..., eps_l) that sum to one."""

    model_config = ConfigDict(frozen=True)

    level_l: int = Field(..., ge=1, le=MAX_LEVEL, description="Number of eliminations")
    fractions: Tuple[float, ...] = Field(..., description="eps_0 .. eps_l")

    @model_validator(mode="after")
    def check_fractions(self):
        if len(self.fractions) != self.level_l + 1:
            raise ValueError(
                f"level {self.level_l} needs {self.level_l + 1} fractions, "
                f"got {len(self.fractions)}"
            )
        if any(not 0.0 < f < 1.0 for f in self.fractions):
            raise ValueError("every fraction must lie strictly inside (0, 1)")
        total = math.fsum(self.fractions)
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"fractions sum to {total!r}, not 1")
        return self


class AdaptivityPlan(BaseModel):
    """Level, resampling size and grid handed to the induced policy."""

    model_config = ConfigDict(frozen=True)

    level_l: int = Field(..., ge=1, le=MAX_LEVEL)
    resample_k_prime: int = Field(..., ge=1)
    grid: GridSpec

    @model_validator(mode="after")
    def check_level(self):
        if self.grid.level_l != self.level_l:
            raise ValueError("grid level does not match plan level")
        return self


def _check_level(level: int) -> None:
    if not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"level must be in [1, {MAX_LEVEL}], got {level}")


def revised_geometric_grid(
    level: int, k: int, n: int, with_log_factor: bool = False
) -> GridSpec:
    """eps_i = (k/n)^((l-i)/(l+2)) for i < l; eps_l takes what is left.

    With ``with_log_factor`` each eps_i of that grid is then multiplied by
    (ln n)^((l-i)/(l+2)) (eps_l by 1) and the vector is renormalized to sum 1.
    Feasibility is decided on the unscaled head.

    Raises:
        GridInfeasible: if k >= n or the first l fractions reach 1.
    """
    _check_level(level)
    if not 1 <= k < n:
        raise GridInfeasible(f"revised grid needs 1 <= k < n, got k={k}, n={n}")
    ratio = k / n
    exponents = [(level - i) / (level + 2) for i in range(level)]
    head = [ratio**e for e in exponents]
    partial = math.fsum(head)
    if partial >= 1.0:
        raise GridInfeasible(
            f"revised grid at level {level} for k/n={ratio:.6g} is infeasible "
            f"(first {level} fractions sum to {partial:.6g})"
        )
    fractions = head + [1.0 - partial]
    if with_log_factor:
        log_n = math.log(n)
        scaled = [eps * log_n**e for eps, e in zip(head, exponents)] + [fractions[-1]]
        total = math.fsum(scaled)
        fractions = [f / total for f in scaled]
        # absorb rounding so the sum check holds exactly
        fractions[-1] = 1.0 - math.fsum(fractions[:-1])
    return GridSpec(level_l=level, fractions=tuple(fractions))


def revised_normalized_grid(level: int, k: int, n: int) -> GridSpec:
    """Weights (k/n)^((l-i)/(l+2)) for i = 0..l, normalized to sum 1."""
    _check_level(level)
    if k < 1 or n < 1:
        raise GridInfeasible(f"need positive k and n, got k={k}, n={n}")
    log_ratio = math.log(k / n)
    logs = np.array([(level - i) / (level + 2) * log_ratio for i in range(level + 1)])
    weights = np.exp(logs - logs.max())
    return GridSpec(level_l=level, fractions=tuple((weights / weights.sum()).tolist()))


def minimax_grid(level: int, n: int) -> GridSpec:
    """Minimax grid as fractions of n.

    Cumulative points u_i = a^(2 - 2^-i) with a = n^(1 / (2 - 2^-l)), so u_l = n.
    Differences are formed through expm1 to stay positive at high levels.
    """
    _check_level(level)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    log_n = math.log(n)
    denom = 2.0 - 2.0**-level

    def log_point(i: int) -> float:
        # log(u_i / n)
        return -(2.0**-i - 2.0**-level) / denom * log_n

    fractions = [math.exp(log_point(0))]
    for i in range(1, level + 1):
        step = 2.0**-i / denom * log_n
        fractions.append(math.exp(log_point(i - 1)) * math.expm1(step))
    return GridSpec(level_l=level, fractions=tuple(fractions))


def geometric_grid(level: int, n: int) -> GridSpec:
    """Weights b^(i+1) with b = n^(1/l), normalized."""
    _check_level(level)
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    logs = np.array([(i + 1) / level * math.log(n) for i in range(level + 1)])
    weights = np.exp(logs - logs.max())
    return GridSpec(level_l=level, fractions=tuple((weights / weights.sum()).tolist()))


def build_grid(
    kind: GridKind,
    level: int,
    n: int,
    k: Optional[int] = None,
    with_log_factor: bool = False,
) -> GridSpec:
    if kind == "minimax":
        return minimax_grid(level, n)
    if kind == "geometric":
        return geometric_grid(level, n)
    if k is None:
        raise ValueError(f"{kind} grid needs k")
    if kind == "revised":
        return revised_geometric_grid(level, k, n, with_log_factor=with_log_factor)
    if kind == "revised_normalized":
        return revised_normalized_grid(level, k, n)
    raise ValueError(f"unknown grid kind: {kind}")


def threshold_exponent(level: int) -> Fraction:
    """theta_l = (l - 1) / (2l + 1)."""
    if level < 1:
        raise ValueError(f"level must be positive, got {level}")
    return Fraction(level - 1, 2 * level + 1)


def _as_fraction(rho: float) -> Fraction:
    return Fraction(rho).limit_denominator(10**9)


def max_feasible_level(rho: float) -> Union[int, float]:
    """floor((1 + rho) / (1 - 2 rho)) for rho < 1/2, else UNBOUNDED."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    r = _as_fraction(rho)
    if r >= Fraction(1, 2):
        return UNBOUNDED
    return math.floor((1 + r) / (1 - 2 * r))


def infer_rho(n: int, k: int) -> float:
    if n < 2:
        raise ValueError(f"rho is undefined for n={n}")
    return math.log(k) / math.log(n)


def hybrid_plan(
    rho: Optional[float],
    w: int,
    n: int,
    k: int,
    with_log_factor: bool = False,
) -> AdaptivityPlan:
    """Choose (l, k') from the arrival exponent and lifetime.

    ``rho=None`` infers ln k / ln n. When several levels qualify in the middle
    regime the smallest one is used.
    """
    if w < 1:
        raise ValueError(f"w must be positive, got {w}")
    if rho is None:
        rho = infer_rho(n, k)
    elif rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    elif abs(k - round(n**rho)) > 1:
        raise ValueError(f"rho={rho} is inconsistent with k={k}, n={n}")

    r = _as_fraction(rho)
    top = Fraction(w, 2 * w + 2)

    if r < Fraction(1, 5):
        level, k_prime = 1, k
    elif r < top:
        level = next(
            (
                lv
                for lv in range(1, w + 1)
                if threshold_exponent(lv) <= r < Fraction(lv, 2 * lv + 2)
            ),
            None,
        )
        if level is None:
            raise GridInfeasible(f"no level <= {w} covers rho={rho}")
        k_prime = k
    else:
        level = w
        k_prime = max(1, min(k, round(n ** (w / (2 * w + 2)))))

    grid = revised_geometric_grid(level, k_prime, n, with_log_factor=with_log_factor)
    logger.debug(f"Hybrid plan for rho={rho:.4g}, w={w}: level={level}, k'={k_prime}")
    return AdaptivityPlan(level_l=level, resample_k_prime=k_prime, grid=grid)


def level_plan(
    level: int,
    n: int,
    k: int,
    k_prime: Optional[int] = None,
    grid_kind: GridKind = "revised",
    with_log_factor: bool = False,
) -> AdaptivityPlan:
    """Plan for an induced BSE policy at a fixed level."""
    k_prime = k if k_prime is None else k_prime
    grid = build_grid(grid_kind, level, n, k_prime, with_log_factor=with_log_factor)
    return AdaptivityPlan(level_l=level, resample_k_prime=k_prime, grid=grid)
