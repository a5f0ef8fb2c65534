"""Batched Successive Elimination (BSE) as a step-by-step state machine."""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Mapping, Optional, Sequence

import numpy as np

from slhvb_lab.core.environment import RewardModel, draw_rewards
from slhvb_lab.core.grids import GridSpec
from slhvb_lab.errors import (
    BadKPrime,
    PhaseExhausted,
    RewardMismatch,
    WrongTotal,
    ZeroPulls,
)

logger = logging.getLogger(__name__)

FinalPick = Literal["first", "empirical_best"]
DEFAULT_RADIUS_CONSTANT = 3.0


def floor_share(fraction: float, budget: int) -> int:
    """floor(fraction * budget), tolerant of representation error just below an integer."""
    return int(math.floor(fraction * budget + 1e-9))


@dataclass
class BseState:
    """
    Elimination state for one batched bandit instance.

    Arrays are aligned with ``resampled`` (sorted arm ids). ``phase`` runs from
    0 to ``level``; it is ``level + 1`` once the final batch was observed.
    """

    grid: GridSpec
    budget_n: int
    n_env: int
    resampled: np.ndarray
    survivors: np.ndarray
    pulls: np.ndarray
    sums: np.ndarray
    phase: int = 0
    terminated_early: bool = False
    pending: Optional[Dict[int, int]] = None
    spent: int = 0
    final_pick: FinalPick = "empirical_best"
    cumulative_means: bool = False
    radius_constant: float = DEFAULT_RADIUS_CONSTANT
    skipped_phases: List[int] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def level(self) -> int:
        return self.grid.level_l

    @property
    def done(self) -> bool:
        return self.phase > self.level

    def index_of(self, arm_ids) -> np.ndarray:
        return np.searchsorted(self.resampled, np.asarray(arm_ids, dtype=np.int64))

    def cumulative_mean(self, arm_ids) -> np.ndarray:
        idx = self.index_of(arm_ids)
        pulls = self.pulls[idx]
        return np.where(pulls > 0, self.sums[idx] / np.maximum(pulls, 1), -np.inf)


def bse_init(
    arm_ids: Sequence[int],
    grid: GridSpec,
    k_prime: int,
    n_env: int,
    budget_n: int,
    rng: np.random.Generator,
    final_pick: FinalPick = "empirical_best",
    cumulative_means: bool = False,
    radius_constant: float = DEFAULT_RADIUS_CONSTANT,
) -> BseState:
    """Resample k' of the arms uniformly at random and start at phase 0."""
    ids = np.asarray(arm_ids, dtype=np.int64)
    if not 1 <= k_prime <= len(ids):
        raise BadKPrime(f"k'={k_prime} must lie in [1, {len(ids)}]")
    if budget_n < 1:
        raise ValueError(f"budget_n must be positive, got {budget_n}")
    if len(np.unique(ids)) != len(ids):
        raise ValueError("arm ids must be unique")

    if k_prime == len(ids):
        chosen = np.sort(ids)
    else:
        chosen = np.sort(rng.choice(ids, size=k_prime, replace=False))
    return BseState(
        grid=grid,
        budget_n=budget_n,
        n_env=n_env,
        resampled=chosen,
        survivors=chosen.copy(),
        pulls=np.zeros(k_prime, dtype=np.int64),
        sums=np.zeros(k_prime, dtype=float),
        terminated_early=k_prime == 1,
        final_pick=final_pick,
        cumulative_means=cumulative_means,
        radius_constant=radius_constant,
    )


def confidence_radius(
    n_i: int, n_env: int, constant: float = DEFAULT_RADIUS_CONSTANT
) -> float:
    """constant * n_i^(-1/2) * (ln n_env)^(1/2)."""
    if n_i <= 0:
        raise ZeroPulls("confidence radius needs at least one pull")
    if n_env < 2:
        raise ValueError(f"n_env must be at least 2, got {n_env}")
    return constant * math.sqrt(math.log(n_env) / n_i)


def bse_leader(state: BseState) -> int:
    """Survivor with the best cumulative mean, ties by smallest id."""
    means = state.cumulative_mean(state.survivors)
    return int(state.survivors[int(np.argmax(means))])


def _final_arm(state: BseState) -> int:
    if state.final_pick == "first":
        return int(state.survivors[0])
    return bse_leader(state)


def bse_next_batch(
    state: BseState, final_pulls: Optional[int] = None
) -> Dict[int, int]:
    """Emit the pull counts for the current phase.

    ``final_pulls`` replaces budget_n - spent in the final phase; the pipelined
    policy uses it to absorb the round's remainder.

    Raises:
        PhaseExhausted: if the phase was already emitted or BSE has finished.
    """
    if state.done:
        raise PhaseExhausted("all phases have been played")
    if state.pending is not None:
        raise PhaseExhausted(f"phase {state.phase} was already emitted")

    eps = state.grid.fractions[state.phase]
    if state.phase == state.level:
        count = state.budget_n - state.spent if final_pulls is None else final_pulls
        batch = {_final_arm(state): count} if count > 0 else {}
    elif state.terminated_early:
        count = floor_share(eps, state.budget_n)
        batch = {int(state.survivors[0]): count} if count > 0 else {}
    else:
        per_arm = floor_share(eps, state.budget_n) // len(state.survivors)
        if per_arm == 0:
            message = (
                f"phase {state.phase} skipped: floor(eps*n/|S|) = 0 "
                f"for eps={eps:.4g}, n={state.budget_n}, |S|={len(state.survivors)}"
            )
            logger.debug(message)
            state.skipped_phases.append(state.phase)
            state.warnings.append(message)
            batch = {}
        else:
            batch = {int(a): per_arm for a in state.survivors}

    state.pending = batch
    return dict(batch)


def _record(state: BseState, arm_id: int, values: np.ndarray) -> None:
    idx = int(state.index_of([arm_id])[0])
    state.pulls[idx] += len(values)
    state.sums[idx] += float(np.sum(values))


def bse_observe(
    state: BseState, rewards: Mapping[int, Sequence[float]]
) -> BseState:
    """Absorb the rewards of the pending batch, eliminate, and advance a phase.

    Raises:
        RewardMismatch: if rewards do not cover exactly the emitted batch.
    """
    if state.pending is None:
        raise RewardMismatch("no batch is pending")
    batch = state.pending
    observed = {int(a): np.asarray(r, dtype=float) for a, r in rewards.items() if len(r)}
    if set(observed) != set(batch) or any(
        len(observed[a]) != batch[a] for a in batch
    ):
        raise RewardMismatch(
            f"rewards {sorted((a, len(r)) for a, r in observed.items())} "
            f"do not match batch {sorted(batch.items())}"
        )

    for arm_id, values in observed.items():
        _record(state, arm_id, values)
    state.spent += sum(batch.values())

    eliminating = (
        state.phase < state.level and not state.terminated_early and len(batch) > 0
    )
    if eliminating:
        survivors = state.survivors
        if state.cumulative_means:
            means = state.cumulative_mean(survivors)
        else:
            means = np.array([float(np.mean(observed[int(a)])) for a in survivors])
        n_i = batch[int(survivors[0])]
        radius = confidence_radius(n_i, state.n_env, state.radius_constant)
        keep = np.abs(means - np.max(means)) <= radius
        state.survivors = survivors[keep]
        if len(state.survivors) < len(survivors):
            logger.debug(
                f"phase {state.phase}: kept {len(state.survivors)}/{len(survivors)} "
                f"(radius={radius:.4g})"
            )

    state.phase += 1
    state.pending = None
    if len(state.survivors) == 1 and state.phase < state.level:
        state.terminated_early = True
    return state


def bse_record_extra(
    state: BseState, arm_id: int, rewards: Sequence[float]
) -> BseState:
    """Fold pulls made outside the batch schedule into cumulative statistics."""
    values = np.asarray(rewards, dtype=float)
    if int(arm_id) not in set(state.resampled.tolist()):
        raise RewardMismatch(f"arm {arm_id} is not part of this instance")
    if len(values):
        _record(state, int(arm_id), values)
    return state


@dataclass
class BatchedRun:
    state: BseState
    pull_history: Dict[int, int]
    regret: float


def run_batched_bandit(
    means: Mapping[int, float],
    grid: GridSpec,
    k_prime: int,
    n_env: int,
    budget_n: int,
    reward_model: RewardModel,
    rng: np.random.Generator,
    final_pick: FinalPick = "empirical_best",
    cumulative_means: bool = False,
    radius_constant: float = DEFAULT_RADIUS_CONSTANT,
) -> BatchedRun:
    """Run BSE end to end on a fixed instance."""
    state = bse_init(
        list(means),
        grid,
        k_prime,
        n_env,
        budget_n,
        rng,
        final_pick=final_pick,
        cumulative_means=cumulative_means,
        radius_constant=radius_constant,
    )
    history = {int(a): 0 for a in means}
    while not state.done:
        batch = bse_next_batch(state)
        rewards = {}
        for arm_id, count in batch.items():
            rewards[arm_id] = draw_rewards(
                np.full(count, means[arm_id]), reward_model, rng
            )
            history[arm_id] += count
        bse_observe(state, rewards)
    return BatchedRun(
        state=state,
        pull_history=history,
        regret=bb_regret(history, means, budget_n),
    )


def bb_regret(
    pull_history: Mapping[int, int], mus: Mapping[int, float], budget_n: int
) -> float:
    """(1 / budget_n) * sum_a (max mu - mu_a) * N_a."""
    total = sum(pull_history.values())
    if total != budget_n:
        raise WrongTotal(f"pulls total {total}, expected {budget_n}")
    best = max(mus.values())
    return sum((best - mus[a]) * c for a, c in pull_history.items()) / budget_n
