"""SLHVB policies: pipelined induced BSE, Hybrid, Randomized BSE and baselines."""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from slhvb_lab.core.batched import (
    DEFAULT_RADIUS_CONSTANT,
    BseState,
    FinalPick,
    bse_init,
    bse_leader,
    bse_next_batch,
    bse_observe,
    bse_record_extra,
)
from slhvb_lab.core.environment import Arm, ArmPool, RoundOutcome, oracle_best
from slhvb_lab.core.grids import AdaptivityPlan, hybrid_plan
from slhvb_lab.core.prior import BetaParams, fit_beta_moments
from slhvb_lab.errors import BadKPrime, InfeasibleMoments, NoCards

logger = logging.getLogger(__name__)

Allocation = Dict[int, int]


# ---------------------------------------------------------------------------
# Induced (pipelined) BSE
# ---------------------------------------------------------------------------


@dataclass
class _Route:
    batch: Dict[int, int]
    extras: Dict[int, int]


@dataclass
class InducedPolicyState:
    """One BSE instance per live cohort; the cohort of age j plays phase j."""

    plan: AdaptivityPlan
    cohort_states: Dict[int, BseState] = field(default_factory=dict)
    round: int = -1
    final_pick: FinalPick = "empirical_best"
    cumulative_means: bool = False
    radius_constant: float = DEFAULT_RADIUS_CONSTANT
    routes: Dict[int, _Route] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def level(self) -> int:
        return self.plan.level_l


def _spread_remainder(
    remainder: int, weights: Sequence[Tuple[int, float]]
) -> Dict[int, int]:
    """Split ``remainder`` over cohorts in proportion to their weights.

    Flooring leftovers go to the cohort listed last (the oldest).
    """
    total = math.fsum(w for _, w in weights)
    shares = {birth: int(math.floor(remainder * w / total)) for birth, w in weights}
    oldest = weights[-1][0]
    shares[oldest] += remainder - sum(shares.values())
    return shares


def induced_allocate(
    state: InducedPolicyState,
    new_cohort: Sequence[int],
    n: int,
    rng: np.random.Generator,
) -> Allocation:
    """Start BSE on the new cohort and emit every live cohort's batch.

    Cohort ages 0..l-1 play their exploration phase; the age-l cohort takes what
    is left of the round. Before the pipeline fills up, the missing share goes to
    each live cohort's empirical leader in proportion to its grid weight.
    """
    plan = state.plan
    k_prime = plan.resample_k_prime
    if k_prime > len(new_cohort):
        raise BadKPrime(f"k'={k_prime} exceeds cohort size {len(new_cohort)}")

    state.round += 1
    state.cohort_states[state.round] = bse_init(
        new_cohort,
        plan.grid,
        k_prime,
        n_env=n,
        budget_n=n,
        rng=rng,
        final_pick=state.final_pick,
        cumulative_means=state.cumulative_means,
        radius_constant=state.radius_constant,
    )

    live = sorted(state.cohort_states.items(), reverse=True)  # youngest first
    routes: Dict[int, _Route] = {}
    used = 0
    final_birth = None
    for birth, bse in live:
        age = state.round - birth
        if age == state.level:
            final_birth = birth
            continue
        batch = bse_next_batch(bse)
        routes[birth] = _Route(batch=batch, extras={})
        used += sum(batch.values())

    if final_birth is not None:
        bse = state.cohort_states[final_birth]
        batch = bse_next_batch(bse, final_pulls=n - used)
        routes[final_birth] = _Route(batch=batch, extras={})
        used += sum(batch.values())
    elif n > used:
        weights = [
            (birth, state.plan.grid.fractions[state.round - birth])
            for birth, _ in live
        ]
        for birth, extra in _spread_remainder(n - used, weights).items():
            if extra > 0:
                leader = bse_leader(state.cohort_states[birth])
                routes[birth].extras[leader] = extra
        used = n

    state.routes = routes
    allocation: Allocation = {}
    for route in routes.values():
        for source in (route.batch, route.extras):
            for arm_id, count in source.items():
                allocation[arm_id] = allocation.get(arm_id, 0) + count
    return allocation


def induced_observe(
    state: InducedPolicyState, outcome: RoundOutcome
) -> InducedPolicyState:
    """Feed each cohort's rewards to its BSE state and retire finished cohorts."""
    for birth, route in state.routes.items():
        bse = state.cohort_states[birth]
        batch_rewards = {}
        for arm_id, count in route.batch.items():
            batch_rewards[arm_id] = outcome.rewards[arm_id][:count]
        bse_observe(bse, batch_rewards)
        for arm_id, count in route.extras.items():
            offset = route.batch.get(arm_id, 0)
            bse_record_extra(bse, arm_id, outcome.rewards[arm_id][offset : offset + count])

    for birth in [b for b in state.cohort_states if state.round - b >= state.level]:
        retired = state.cohort_states.pop(birth)
        if retired.warnings:
            state.warnings.extend(retired.warnings)
    state.routes = {}
    return state


class InducedBsePolicy:
    """Induced BSE policy driven by an :class:`AdaptivityPlan`."""

    def __init__(
        self,
        plan: AdaptivityPlan,
        n: int,
        final_pick: FinalPick = "empirical_best",
        cumulative_means: bool = False,
        radius_constant: float = DEFAULT_RADIUS_CONSTANT,
    ):
        self.n = n
        self.state = InducedPolicyState(
            plan=plan,
            final_pick=final_pick,
            cumulative_means=cumulative_means,
            radius_constant=radius_constant,
        )

    @property
    def plan(self) -> AdaptivityPlan:
        return self.state.plan

    @property
    def level(self) -> int:
        return self.state.level

    @property
    def warnings(self) -> List[str]:
        return self.state.warnings

    def allocate(self, pool: ArmPool, rng: np.random.Generator) -> Allocation:
        cohort = pool.newest
        if cohort is None:
            raise ValueError(f"round {pool.current_round} has no arriving cohort")
        return induced_allocate(self.state, cohort.ids.tolist(), self.n, rng)

    def observe(self, outcome: RoundOutcome) -> None:
        induced_observe(self.state, outcome)


def make_hybrid(
    rho: Optional[float],
    w: int,
    n: int,
    k: int,
    with_log_factor: bool = False,
    **bse_options,
) -> InducedBsePolicy:
    """Hybrid policy: pick (l, k') from (rho, w) and run induced BSE."""
    plan = hybrid_plan(rho, w, n, k, with_log_factor=with_log_factor)
    logger.info(
        f"Hybrid policy: level={plan.level_l}, k'={plan.resample_k_prime}, "
        f"grid={[round(f, 6) for f in plan.grid.fractions]}"
    )
    return InducedBsePolicy(plan, n, **bse_options)


# ---------------------------------------------------------------------------
# Randomized BSE (Thompson sampling with explore / exploit queues)
# ---------------------------------------------------------------------------

FLAT_PRIOR = BetaParams(alpha=1.0, beta=1.0)


@dataclass(frozen=True)
class BetaPosterior:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"posterior parameters must be positive, got {self}")

    def update(self, pulls: float, successes: float) -> "BetaPosterior":
        if successes < 0 or successes > pulls:
            raise ValueError(f"need 0 <= successes <= pulls, got {successes}/{pulls}")
        return BetaPosterior(self.alpha + successes, self.beta + pulls - successes)

    @property
    def pseudo_count(self) -> float:
        return self.alpha + self.beta


Predictor = Callable[[Arm, int], Sequence[float]]


class NoisyPredictor:
    """Stand-in for a learned click model: mu plus Gaussian noise, clipped to (0, 1)."""

    def __init__(self, sigma: float, rng: np.random.Generator, clip: float = 1e-6):
        if sigma < 0:
            raise ValueError(f"sigma must be nonnegative, got {sigma}")
        self.sigma = sigma
        self.rng = rng
        self.clip = clip

    def __call__(self, card: Arm, m: int) -> np.ndarray:
        draws = card.mu + self.sigma * self.rng.standard_normal(m)
        return np.clip(draws, self.clip, 1.0 - self.clip)


@dataclass
class RandomizedBseState:
    explore_prob_eps: float
    well_explored_threshold_theta: float
    predictor: Optional[Predictor] = None
    m: int = 500
    posteriors: Dict[int, BetaPosterior] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)


def set_prior(
    state: RandomizedBseState, card: Arm
) -> BetaPosterior:
    """Beta prior for a new card from ``m`` predictor samples, or the flat prior."""
    if state.predictor is None:
        return BetaPosterior(FLAT_PRIOR.alpha, FLAT_PRIOR.beta)
    samples = np.asarray(state.predictor(card, state.m), dtype=float)
    try:
        params = fit_beta_moments(float(np.mean(samples)), float(np.var(samples, ddof=1)))
    except InfeasibleMoments as e:
        message = f"card {card.id}: {e}; using Beta(1, 1)"
        logger.debug(message)
        state.warnings.append(message)
        params = FLAT_PRIOR
    return BetaPosterior(params.alpha, params.beta)


def rbse_begin_round(
    state: RandomizedBseState,
    new_cards: Sequence[Arm],
    expired: Sequence[int],
    interactions: Mapping[int, Tuple[float, float]],
) -> RandomizedBseState:
    """Drop expired cards, fold in last round's (pulls, successes), seed new cards."""
    for card_id in expired:
        state.posteriors.pop(int(card_id), None)
    for card_id, (pulls, successes) in interactions.items():
        posterior = state.posteriors.get(int(card_id))
        if posterior is None:
            continue
        if pulls:
            state.posteriors[int(card_id)] = posterior.update(pulls, successes)
    for card in new_cards:
        state.posteriors[card.id] = set_prior(state, card)
    return state


def rbse_allocate(
    state: RandomizedBseState, slots: int, rng: np.random.Generator
) -> List[int]:
    """Fill ``slots`` with distinct cards for one request.

    Each card gets one Thompson score. With probability eps a slot takes the
    next under-explored card, otherwise the next well-explored one; an empty
    queue hands over to the other.
    """
    if not state.posteriors:
        raise NoCards("no cards are available")
    ids = np.array(sorted(state.posteriors), dtype=np.int64)
    alphas = np.array([state.posteriors[i].alpha for i in ids.tolist()])
    betas = np.array([state.posteriors[i].beta for i in ids.tolist()])
    scores = rng.beta(alphas, betas)

    order = np.lexsort((ids, -scores))
    well = (alphas + betas > state.well_explored_threshold_theta)[order]
    well_queue = ids[order][well].tolist()
    under_queue = ids[order][~well].tolist()

    explore = rng.random(slots) < state.explore_prob_eps
    chosen: List[int] = []
    wi = ui = 0
    for flag in explore.tolist():
        if flag and ui < len(under_queue):
            chosen.append(under_queue[ui])
            ui += 1
        elif wi < len(well_queue):
            chosen.append(well_queue[wi])
            wi += 1
        elif ui < len(under_queue):
            chosen.append(under_queue[ui])
            ui += 1
        else:
            break
    return chosen


class RandomizedBsePolicy:
    """Serves each round as requests of ``cards_per_user`` distinct cards."""

    def __init__(
        self,
        n: int,
        level: int,
        epsilon: float = 0.1,
        theta: float = 100.0,
        m: int = 500,
        predictor_noise_sigma: Optional[float] = 0.05,
        cards_per_user: int = 4,
        predictor_rng: Optional[np.random.Generator] = None,
    ):
        self.n = n
        self.level = level
        self.cards_per_user = cards_per_user
        predictor = None
        if predictor_noise_sigma is not None:
            predictor = NoisyPredictor(
                predictor_noise_sigma, predictor_rng or np.random.default_rng()
            )
        self.state = RandomizedBseState(
            explore_prob_eps=epsilon,
            well_explored_threshold_theta=theta,
            predictor=predictor,
            m=m,
        )
        self._interactions: Dict[int, Tuple[float, float]] = {}

    @property
    def warnings(self) -> List[str]:
        return self.state.warnings

    def allocate(self, pool: ArmPool, rng: np.random.Generator) -> Allocation:
        cohort = pool.newest
        new_cards = list(cohort.arms) if cohort is not None else []
        expired = [
            card_id
            for card_id in self.state.posteriors
            if card_id not in pool or pool.age(card_id) > self.level
        ]
        rbse_begin_round(self.state, new_cards, expired, self._interactions)
        self._interactions = {}

        allocation: Allocation = {}
        remaining = self.n
        while remaining > 0:
            request = min(self.cards_per_user, remaining)
            for card_id in rbse_allocate(self.state, request, rng):
                allocation[card_id] = allocation.get(card_id, 0) + 1
                remaining -= 1
        return allocation

    def observe(self, outcome: RoundOutcome) -> None:
        self._interactions = {
            arm_id: (float(outcome.pulls[arm_id]), float(np.sum(rewards)))
            for arm_id, rewards in outcome.rewards.items()
        }


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def baseline_oracle_greedy(pool: ArmPool, n: int) -> Allocation:
    arm, _ = oracle_best(pool)
    return {arm.id: n}


def baseline_uniform_random(
    pool: ArmPool, n: int, rng: np.random.Generator
) -> Allocation:
    ids = pool.arm_ids
    counts = np.bincount(rng.integers(0, len(ids), size=n), minlength=len(ids))
    return {int(a): int(c) for a, c in zip(ids, counts) if c}


class OracleGreedyPolicy:
    def __init__(self, n: int, level: int):
        self.n = n
        self.level = level
        self.warnings: List[str] = []

    def allocate(self, pool: ArmPool, rng: np.random.Generator) -> Allocation:
        return baseline_oracle_greedy(pool, self.n)

    def observe(self, outcome: RoundOutcome) -> None:
        pass


class UniformRandomPolicy:
    def __init__(self, n: int, level: int):
        self.n = n
        self.level = level
        self.warnings: List[str] = []

    def allocate(self, pool: ArmPool, rng: np.random.Generator) -> Allocation:
        return baseline_uniform_random(pool, self.n, rng)

    def observe(self, outcome: RoundOutcome) -> None:
        pass


# ---------------------------------------------------------------------------
# Worst-case instance pair
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WorstCaseStream:
    """One-arm-per-round script: 1/2 on even rounds, ``high`` on odd rounds."""

    high: float

    def __call__(self, t: int) -> np.ndarray:
        return np.array([0.5 if t % 2 == 0 else self.high])


@dataclass(frozen=True)
class WorstCasePair:
    w: int
    instance_a: WorstCaseStream = WorstCaseStream(high=1.0)
    instance_b: WorstCaseStream = WorstCaseStream(high=0.0)


def worst_case_pair(w: int) -> WorstCasePair:
    """Two k=1 instances that agree on the first arm and differ on the second."""
    if w < 1:
        raise ValueError(f"w must be positive, got {w}")
    return WorstCasePair(w=w)
