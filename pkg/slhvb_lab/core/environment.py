"""SLHVB environment: cohort arrivals, expiry, rewards and play."""

import logging
from dataclasses import dataclass, field
from typing import Dict, Literal, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from slhvb_lab.core.prior import PriorSpec, sample_means
from slhvb_lab.errors import EmptyPool, UnavailableArm, WrongTotal

logger = logging.getLogger(__name__)

RewardModel = Literal["bernoulli", "point_mass"]


class EnvConfig(BaseModel):
    """
    Parameters of one SLHVB process.

    Attributes:
        n: Plays per round.
        k: Arms arriving per round.
        w: Lifetime; a cohort is playable at ages 0..w.
        horizon_t: Number of rounds.
        prior: Distribution of arm means.
        reward_model: ``bernoulli`` or ``point_mass``.
        base_seed: Root of every replication seed.
    """

    n: int = Field(..., ge=1, description="Plays per round")
    k: int = Field(..., ge=1, description="Arrivals per round")
    w: int = Field(..., ge=1, description="Arm lifetime in rounds")
    horizon_t: int = Field(..., ge=1, description="Number of rounds")
    prior: PriorSpec = Field(default_factory=PriorSpec)
    reward_model: RewardModel = "bernoulli"
    base_seed: int = Field(default=0, ge=0, lt=2**64, description="64-bit base seed")


@dataclass(frozen=True)
class Arm:
    id: int
    birth_round: int
    mu: float


@dataclass(frozen=True, eq=False)
class Cohort:
    """Arms born in the same round, stored column-wise."""

    birth_round: int
    ids: np.ndarray
    mus: np.ndarray

    @property
    def arms(self) -> Tuple[Arm, ...]:
        return tuple(
            Arm(int(i), self.birth_round, float(mu)) for i, mu in zip(self.ids, self.mus)
        )

    @property
    def best_mean(self) -> float:
        return float(np.max(self.mus))

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True, eq=False)
class ArmPool:
    """Sliding window of cohorts born in rounds current_round - w .. current_round.

    ``current_round`` is -1 before the first arrival.
    """

    cohorts: Tuple[Cohort, ...] = ()
    current_round: int = -1
    next_id: int = 0
    _lookup: Dict[int, Tuple[int, float]] = field(
        default_factory=dict, init=False, repr=False
    )

    def __post_init__(self):
        for cohort in self.cohorts:
            for arm_id, mu in zip(cohort.ids.tolist(), cohort.mus.tolist()):
                self._lookup[arm_id] = (cohort.birth_round, mu)

    @property
    def arm_ids(self) -> np.ndarray:
        if not self.cohorts:
            return np.empty(0, dtype=np.int64)
        return np.concatenate([c.ids for c in self.cohorts])

    @property
    def arm_means(self) -> np.ndarray:
        if not self.cohorts:
            return np.empty(0, dtype=float)
        return np.concatenate([c.mus for c in self.cohorts])

    @property
    def newest(self) -> Optional[Cohort]:
        if self.cohorts and self.cohorts[-1].birth_round == self.current_round:
            return self.cohorts[-1]
        return None

    def __contains__(self, arm_id) -> bool:
        return int(arm_id) in self._lookup

    def mu(self, arm_id: int) -> float:
        return self._lookup[int(arm_id)][1]

    def age(self, arm_id: int) -> int:
        return self.current_round - self._lookup[int(arm_id)][0]

    def cohort_by_age(self) -> Dict[int, Cohort]:
        return {self.current_round - c.birth_round: c for c in self.cohorts}


@dataclass
class RoundOutcome:
    """Realized result of one round of play."""

    round: int
    pulls: Dict[int, int]
    rewards: Dict[int, np.ndarray]
    oracle_mean: float
    arm_means: Dict[int, float]

    @property
    def total_reward(self) -> float:
        return float(sum(float(np.sum(r)) for r in self.rewards.values()))


def advance_round(
    pool: ArmPool,
    config: EnvConfig,
    rng: np.random.Generator,
    means: Optional[Sequence[float]] = None,
) -> ArmPool:
    """Add the next cohort and drop cohorts older than ``w`` rounds.

    ``means`` overrides the prior draw for scripted instances.
    """
    t = pool.current_round + 1
    if means is None:
        mus = sample_means(config.prior, config.k, rng)
    else:
        mus = np.asarray(means, dtype=float)
        if mus.ndim != 1 or mus.size < 1:
            raise ValueError("scripted means must be a non-empty 1-d sequence")
        if np.any((mus < 0) | (mus > 1)):
            raise ValueError("scripted means must lie in [0, 1]")
    ids = np.arange(pool.next_id, pool.next_id + len(mus), dtype=np.int64)
    kept = tuple(c for c in pool.cohorts if c.birth_round >= t - config.w)
    return ArmPool(
        cohorts=kept + (Cohort(birth_round=t, ids=ids, mus=mus),),
        current_round=t,
        next_id=pool.next_id + len(mus),
    )


def oracle_best(pool: ArmPool) -> Tuple[Arm, float]:
    """Best available arm by true mean, ties broken by smallest id."""
    ids = pool.arm_ids
    if ids.size == 0:
        raise EmptyPool("no arms are available")
    mus = pool.arm_means
    best = float(np.max(mus))
    arm_id = int(np.min(ids[mus == best]))
    return Arm(arm_id, pool.current_round - pool.age(arm_id), best), best


def draw_rewards(
    mus: np.ndarray, model: RewardModel, rng: np.random.Generator
) -> np.ndarray:
    mus = np.asarray(mus, dtype=float)
    if model == "point_mass":
        return mus.copy()
    return (rng.random(mus.shape) < mus).astype(float)


def draw_reward(arm: Arm, model: RewardModel, rng: np.random.Generator) -> float:
    return float(draw_rewards(np.array([arm.mu]), model, rng)[0])


def play(
    pool: ArmPool,
    allocation: Mapping[int, int],
    config: EnvConfig,
    rng: np.random.Generator,
) -> RoundOutcome:
    """Realize one reward per pull of ``allocation``.

    Raises:
        UnavailableArm: if an id is not in the window.
        WrongTotal: if counts do not sum to ``config.n``.
    """
    pulls: Dict[int, int] = {}
    for arm_id, count in allocation.items():
        if int(arm_id) not in pool:
            raise UnavailableArm(f"arm {arm_id} is not available in round {pool.current_round}")
        if count < 0:
            raise WrongTotal(f"negative pull count {count} for arm {arm_id}")
        if count:
            pulls[int(arm_id)] = int(count)

    total = sum(pulls.values())
    if total != config.n:
        raise WrongTotal(f"allocation totals {total}, expected {config.n}")

    ids = sorted(pulls)
    counts = np.array([pulls[i] for i in ids], dtype=np.int64)
    mus = np.array([pool.mu(i) for i in ids], dtype=float)
    realized = draw_rewards(np.repeat(mus, counts), config.reward_model, rng)
    chunks = np.split(realized, np.cumsum(counts)[:-1])

    _, oracle_mean = oracle_best(pool)
    return RoundOutcome(
        round=pool.current_round,
        pulls={i: pulls[i] for i in ids},
        rewards=dict(zip(ids, chunks)),
        oracle_mean=oracle_mean,
        arm_means=dict(zip(ids, mus.tolist())),
    )
