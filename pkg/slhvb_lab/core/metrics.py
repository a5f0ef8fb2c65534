"""Loss accounting: per-round loss, decomposition, averages and exponent fits."""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Mapping, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from slhvb_lab.core.environment import ArmPool, RoundOutcome
from slhvb_lab.errors import NonPositiveLoss, TooFewRounds

logger = logging.getLogger(__name__)

Z_975 = float(stats.norm.ppf(0.975))


@dataclass(frozen=True)
class RoundLog:
    round: int
    loss: float
    external_component: float
    internal_component: float
    pulls_by_age: Tuple[int, ...]
    reward: float
    oracle_mean: float


@dataclass(frozen=True)
class EpisodeSummary:
    """Steady-state statistics of one replication.

    ``mean_loss`` averages ``RoundLog.loss`` over the rounds after burn-in.
    """

    config_digest: str
    replication: int
    seed: int
    rounds: int
    mean_loss: float
    loss_ci_halfwidth: float
    mean_external: float
    mean_internal: float
    mean_reward: float
    oracle_reward: float
    pct_of_oracle: float
    warnings: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def round_loss(outcome: RoundOutcome, n: int) -> float:
    """(1/n) * sum_a pulls(a) * (mu*_t - mu_a)."""
    total = sum(
        count * (outcome.oracle_mean - outcome.arm_means[arm_id])
        for arm_id, count in outcome.pulls.items()
    )
    return max(0.0, total / n)


def external_internal_split(
    pool: ArmPool, allocation: Mapping[int, int], level: int
) -> Tuple[float, float]:
    """Split a round's loss into cross-cohort and within-cohort parts.

    External is the largest shortfall of a window cohort's best mean against the
    window's best. The maximum runs over cohort ages 0..w, so the cohort that
    arrived this round counts too, not only ages 1..w; that keeps the round's
    loss at or below external + internal. Internal sums each pull's gap to the
    best mean of its own cohort.

    Raises:
        ValueError: if an arm older than ``level`` was pulled.
    """
    by_age = pool.cohort_by_age()
    if not by_age:
        return 0.0, 0.0
    window_best = max(c.best_mean for c in by_age.values())
    external = max(window_best - c.best_mean for c in by_age.values())

    n = sum(allocation.values())
    internal = 0.0
    for arm_id, count in allocation.items():
        if not count:
            continue
        age = pool.age(arm_id)
        if age > level:
            raise ValueError(f"arm {arm_id} of age {age} exceeds level {level}")
        internal += count * (by_age[age].best_mean - pool.mu(arm_id))
    return external, (internal / n if n else 0.0)


def build_round_log(
    pool: ArmPool, outcome: RoundOutcome, level: int, n: int
) -> RoundLog:
    external, internal = external_internal_split(pool, outcome.pulls, level)
    by_age = [0] * (level + 1)
    for arm_id, count in outcome.pulls.items():
        by_age[pool.age(arm_id)] += count
    return RoundLog(
        round=outcome.round,
        loss=round_loss(outcome, n),
        external_component=external,
        internal_component=internal,
        pulls_by_age=tuple(by_age),
        reward=outcome.total_reward / n,
        oracle_mean=outcome.oracle_mean,
    )


def _steady_state(logs: Sequence[RoundLog], burn_in: int) -> Sequence[RoundLog]:
    if len(logs) <= burn_in:
        raise TooFewRounds(f"{len(logs)} rounds logged, burn-in is {burn_in}")
    return logs[burn_in:]


def halfwidth(values: Sequence[float]) -> float:
    """Normal-quantile 95% half-width of the mean; 0 for fewer than two values."""
    if len(values) < 2:
        return 0.0
    return Z_975 * float(np.std(values, ddof=1)) / math.sqrt(len(values))


def average_loss(
    logs: Union[Sequence[RoundLog], Sequence[Sequence[RoundLog]]], burn_in: int
) -> Tuple[float, float]:
    """Mean loss after burn-in, with an across-replication 95% half-width.

    ``logs`` is one replication's logs or a list of per-replication lists.
    """
    if burn_in < 0:
        raise ValueError(f"burn_in must be nonnegative, got {burn_in}")
    if logs and isinstance(logs[0], RoundLog):
        replications = [logs]
    else:
        replications = list(logs)
    if not replications:
        raise TooFewRounds("no replications given")

    means = [
        float(np.mean([log.loss for log in _steady_state(rep, burn_in)]))
        for rep in replications
    ]
    return float(np.mean(means)), halfwidth(means)


def summarize_episode(
    logs: Sequence[RoundLog],
    burn_in: int,
    config_digest: str,
    replication: int,
    seed: int,
    warnings: int = 0,
) -> EpisodeSummary:
    steady = _steady_state(logs, burn_in)
    losses = [log.loss for log in steady]
    reward = float(np.mean([log.reward for log in steady]))
    oracle = float(np.mean([log.oracle_mean for log in steady]))
    return EpisodeSummary(
        config_digest=config_digest,
        replication=replication,
        seed=seed,
        rounds=len(logs),
        mean_loss=float(np.mean(losses)),
        loss_ci_halfwidth=halfwidth(losses),
        mean_external=float(np.mean([log.external_component for log in steady])),
        mean_internal=float(np.mean([log.internal_component for log in steady])),
        mean_reward=reward,
        oracle_reward=oracle,
        pct_of_oracle=100.0 * reward / oracle if oracle > 0 else 0.0,
        warnings=warnings,
    )


def fit_loss_exponent(points: Sequence[Tuple[float, float]]) -> float:
    """Least-squares slope of ln(loss) against ln(n)."""
    if len(points) < 3:
        raise ValueError(f"need at least 3 points, got {len(points)}")
    ns = np.array([p[0] for p in points], dtype=float)
    losses = np.array([p[1] for p in points], dtype=float)
    if np.any(losses <= 0):
        raise NonPositiveLoss(f"losses must be positive, got {losses.tolist()}")
    return float(stats.linregress(np.log(ns), np.log(losses)).slope)
