"""Tests for induced BSE, Hybrid, Randomized BSE and the baselines."""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from slhvb_lab.core.environment import Arm, ArmPool, EnvConfig, advance_round, play
from slhvb_lab.core.grids import AdaptivityPlan, GridSpec, level_plan
from slhvb_lab.core.metrics import build_round_log
from slhvb_lab.core.policies import (
    BetaPosterior,
    InducedBsePolicy,
    InducedPolicyState,
    NoisyPredictor,
    OracleGreedyPolicy,
    RandomizedBsePolicy,
    RandomizedBseState,
    UniformRandomPolicy,
    baseline_oracle_greedy,
    baseline_uniform_random,
    induced_allocate,
    induced_observe,
    make_hybrid,
    rbse_allocate,
    rbse_begin_round,
    set_prior,
    worst_case_pair,
)
from slhvb_lab.errors import BadKPrime, GridInfeasible, NoCards


def _drive(policy, config, rounds, seed=0, means=None):
    """Run ``rounds`` rounds and return the round logs."""
    rng = np.random.default_rng(seed)
    pool = ArmPool()
    logs = []
    for _ in range(rounds):
        pool = advance_round(pool, config, rng, means=means)
        allocation = policy.allocate(pool, rng)
        assert sum(allocation.values()) == config.n
        outcome = play(pool, allocation, config, rng)
        policy.observe(outcome)
        logs.append(build_round_log(pool, outcome, policy.level, config.n))
    return logs


def test_steady_state_split_by_age():
    """With identical means each age plays its grid share: 10 / 100 / 890."""
    config = EnvConfig(n=1000, k=5, w=2, horizon_t=10, reward_model="point_mass")
    plan = AdaptivityPlan(
        level_l=2,
        resample_k_prime=5,
        grid=GridSpec(level_l=2, fractions=(0.01, 0.1, 0.89)),
    )
    logs = _drive(InducedBsePolicy(plan, config.n), config, 8, means=[0.5] * 5)
    assert logs[0].pulls_by_age == (1000, 0, 0)
    for log in logs[2:]:
        assert log.pulls_by_age == (10, 100, 890)
        assert log.loss == 0.0


def test_warm_up_remainder_goes_by_grid_weight():
    config = EnvConfig(n=1000, k=5, w=2, horizon_t=10, reward_model="point_mass")
    plan = AdaptivityPlan(
        level_l=2,
        resample_k_prime=5,
        grid=GridSpec(level_l=2, fractions=(0.01, 0.1, 0.89)),
    )
    logs = _drive(InducedBsePolicy(plan, config.n), config, 2, means=[0.5] * 5)
    # 890 left over: floor(890 * 1/11) = 80 to age 0, the rest to age 1.
    assert logs[1].pulls_by_age == (90, 910, 0)


def test_induced_policy_finds_the_best_arm():
    config = EnvConfig(n=4096, k=4, w=1, horizon_t=10, reward_model="point_mass")
    plan = level_plan(1, config.n, config.k)
    logs = _drive(
        InducedBsePolicy(plan, config.n, radius_constant=0.05),
        config,
        6,
        means=[0.1, 0.9, 0.2, 0.3],
    )
    assert logs[-1].internal_component < 0.1


def test_make_hybrid_levels():
    assert make_hybrid(0.5, 4, 2**12, 64).level == 4
    assert make_hybrid(0.1, 3, 10_000, 3).level == 1


def test_beta_posterior_conjugacy():
    assert BetaPosterior(1, 1).update(10, 3) == BetaPosterior(4, 8)
    with pytest.raises(ValueError):
        BetaPosterior(1, 1).update(3, 4)


@given(
    st.integers(min_value=1, max_value=50),
    st.integers(min_value=1, max_value=50),
    st.lists(
        st.tuples(st.integers(0, 100), st.integers(0, 100)), min_size=1, max_size=20
    ),
)
def test_beta_posterior_integer_updates(alpha, beta, batches):
    """Updates add successes to alpha and failures to beta exactly."""
    posterior = BetaPosterior(alpha, beta)
    successes = failures = 0
    for s, f in batches:
        posterior = posterior.update(s + f, s)
        successes += s
        failures += f
    assert posterior == BetaPosterior(alpha + successes, beta + failures)


def test_set_prior_cold_and_warm(rng):
    card = Arm(id=3, birth_round=0, mu=0.3)
    cold = RandomizedBseState(explore_prob_eps=0.1, well_explored_threshold_theta=100)
    assert set_prior(cold, card) == BetaPosterior(1.0, 1.0)

    warm = RandomizedBseState(
        explore_prob_eps=0.1,
        well_explored_threshold_theta=100,
        predictor=NoisyPredictor(0.05, rng),
    )
    prior = set_prior(warm, card)
    assert prior.alpha / prior.pseudo_count == pytest.approx(0.3, abs=0.01)
    assert not warm.warnings


def test_set_prior_falls_back_on_zero_variance():
    state = RandomizedBseState(
        explore_prob_eps=0.1,
        well_explored_threshold_theta=100,
        predictor=lambda card, m: np.full(m, card.mu),
    )
    assert set_prior(state, Arm(0, 0, 0.4)) == BetaPosterior(1.0, 1.0)
    assert len(state.warnings) == 1


def test_rbse_allocate_requires_cards(rng):
    state = RandomizedBseState(explore_prob_eps=0.1, well_explored_threshold_theta=100)
    with pytest.raises(NoCards):
        rbse_allocate(state, 4, rng)


def test_rbse_explore_fraction(rng):
    """About eps of the slots go to under-explored cards."""
    state = RandomizedBseState(explore_prob_eps=0.3, well_explored_threshold_theta=100)
    for card_id in range(10):
        state.posteriors[card_id] = BetaPosterior(60.0, 60.0)
    for card_id in range(10, 20):
        state.posteriors[card_id] = BetaPosterior(1.0, 1.0)

    explored = total = 0
    for _ in range(10_000):
        chosen = rbse_allocate(state, 4, rng)
        assert len(set(chosen)) == 4
        explored += sum(card_id >= 10 for card_id in chosen)
        total += len(chosen)
    assert abs(explored / total - 0.3) < 0.02


def test_rbse_falls_through_to_other_queue(rng):
    state = RandomizedBseState(explore_prob_eps=1.0, well_explored_threshold_theta=100)
    state.posteriors[0] = BetaPosterior(60.0, 60.0)
    state.posteriors[1] = BetaPosterior(1.0, 1.0)
    assert sorted(rbse_allocate(state, 4, rng)) == [0, 1]


def test_randomized_policy_respects_level():
    config = EnvConfig(n=40, k=3, w=3, horizon_t=10)
    policy = RandomizedBsePolicy(config.n, level=1, predictor_rng=np.random.default_rng(1))
    logs = _drive(policy, config, 8)
    for log in logs:
        assert sum(log.pulls_by_age) == config.n
        assert len(log.pulls_by_age) == 2


def test_baselines(rng):
    config = EnvConfig(n=50, k=4, w=1, horizon_t=5)
    pool = advance_round(ArmPool(), config, rng, means=[0.2, 0.8, 0.5])
    assert baseline_oracle_greedy(pool, 50) == {1: 50}
    assert sum(baseline_uniform_random(pool, 50, rng).values()) == 50
    logs = _drive(OracleGreedyPolicy(config.n, level=1), config, 5)
    assert all(log.loss == 0.0 for log in logs)


def test_worst_case_pair():
    pair = worst_case_pair(3)
    assert pair.instance_a(0).tolist() == [0.5] == pair.instance_b(0).tolist()
    assert pair.instance_a(1).tolist() == [1.0]
    assert pair.instance_b(1).tolist() == [0.0]
    with pytest.raises(ValueError):
        worst_case_pair(0)


POLICY_KINDS = ["induced", "hybrid", "randomized", "oracle", "uniform"]


def _policy(kind, config, level, rng):
    if kind == "induced":
        plan = level_plan(level, config.n, config.k, grid_kind="revised_normalized")
        return InducedBsePolicy(plan, config.n)
    if kind == "hybrid":
        return make_hybrid(None, config.w, config.n, config.k)
    if kind == "randomized":
        return RandomizedBsePolicy(
            config.n, level=level, m=20, cards_per_user=3, predictor_rng=rng
        )
    if kind == "oracle":
        return OracleGreedyPolicy(config.n, level=config.w)
    return UniformRandomPolicy(config.n, level=config.w)


@settings(max_examples=100, deadline=None)
@given(
    kind=st.sampled_from(POLICY_KINDS),
    n=st.integers(min_value=8, max_value=96),
    k=st.integers(min_value=1, max_value=6),
    w=st.integers(min_value=1, max_value=3),
    level=st.integers(min_value=1, max_value=3),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_every_allocation_fills_the_round(kind, n, k, w, level, seed):
    """Across 100 rounds per example every allocation sums to exactly n."""
    assume(level <= w)
    config = EnvConfig(n=n, k=k, w=w, horizon_t=100)
    try:
        policy = _policy(kind, config, level, np.random.default_rng(seed))
    except GridInfeasible:
        assume(False)
    _drive(policy, config, 100, seed=seed)


def test_induced_functions_run_the_pipeline(rng):
    """Level 1: the new cohort explores while last round's cohort commits."""
    config = EnvConfig(n=100, k=3, w=1, horizon_t=5, reward_model="point_mass")
    plan = AdaptivityPlan(
        level_l=1,
        resample_k_prime=3,
        grid=GridSpec(level_l=1, fractions=(0.2, 0.8)),
    )
    state = InducedPolicyState(plan=plan)

    pool = advance_round(ArmPool(), config, rng, means=[0.2, 0.5, 0.9])
    first = induced_allocate(state, pool.newest.ids.tolist(), config.n, rng)
    assert sum(first.values()) == 100
    assert set(first) == {0, 1, 2}
    induced_observe(state, play(pool, first, config, rng))
    assert list(state.cohort_states) == [0]

    pool = advance_round(pool, config, rng, means=[0.1, 0.1, 0.1])
    second = induced_allocate(state, pool.newest.ids.tolist(), config.n, rng)
    assert second == {2: 82, 3: 6, 4: 6, 5: 6}
    induced_observe(state, play(pool, second, config, rng))
    assert list(state.cohort_states) == [1]


def test_induced_allocate_rejects_small_cohort(rng):
    plan = AdaptivityPlan(
        level_l=1,
        resample_k_prime=4,
        grid=GridSpec(level_l=1, fractions=(0.2, 0.8)),
    )
    with pytest.raises(BadKPrime):
        induced_allocate(InducedPolicyState(plan=plan), [0, 1, 2], 100, rng)


def test_rbse_begin_round_updates_and_expires():
    state = RandomizedBseState(explore_prob_eps=0.1, well_explored_threshold_theta=10)
    cards = [Arm(0, 0, 0.5), Arm(1, 0, 0.5)]
    rbse_begin_round(state, cards, expired=[], interactions={})
    assert state.posteriors[0] == BetaPosterior(1.0, 1.0)

    rbse_begin_round(
        state, [Arm(2, 1, 0.4)], expired=[1], interactions={0: (10, 3), 7: (1, 1)}
    )
    assert sorted(state.posteriors) == [0, 2]
    assert state.posteriors[0] == BetaPosterior(4.0, 8.0)
