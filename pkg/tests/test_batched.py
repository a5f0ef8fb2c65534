"""Tests for the batched successive elimination state machine."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slhvb_lab.core.batched import (
    bb_regret,
    bse_init,
    bse_leader,
    bse_next_batch,
    bse_observe,
    bse_record_extra,
    confidence_radius,
    floor_share,
    run_batched_bandit,
)
from slhvb_lab.core.grids import GridSpec, minimax_grid
from slhvb_lab.errors import (
    BadKPrime,
    PhaseExhausted,
    RewardMismatch,
    WrongTotal,
    ZeroPulls,
)

DYADIC = [0.0, 0.25, 0.5, 0.75, 1.0]


def _point_mass_rewards(batch, means):
    return {a: np.full(c, means[a]) for a, c in batch.items()}


def test_floor_share_tolerates_representation_error():
    assert floor_share(0.7, 10) == 7
    assert floor_share(0.3, 10) == 3
    assert floor_share(0.05, 10) == 0


def test_confidence_radius():
    assert confidence_radius(4, 100) == pytest.approx(3.0 * math.sqrt(math.log(100) / 4))
    assert confidence_radius(4, 100, constant=1.0) == pytest.approx(
        math.sqrt(math.log(100) / 4)
    )
    with pytest.raises(ZeroPulls):
        confidence_radius(0, 100)


def test_init_resamples_k_prime(rng):
    grid = minimax_grid(2, 1000)
    state = bse_init(range(10), grid, 4, 1000, 1000, rng)
    assert len(state.resampled) == 4
    assert list(state.resampled) == sorted(state.resampled)
    assert set(state.resampled) <= set(range(10))
    with pytest.raises(BadKPrime):
        bse_init(range(3), grid, 4, 1000, 1000, rng)


def test_single_arm_terminates_early(rng):
    grid = GridSpec(level_l=2, fractions=(0.1, 0.2, 0.7))
    state = bse_init([5], grid, 1, 100, 100, rng)
    assert state.terminated_early
    assert bse_next_batch(state) == {5: 10}


def test_phase_protocol(rng):
    grid = GridSpec(level_l=1, fractions=(0.4, 0.6))
    means = {0: 0.9, 1: 0.1}
    state = bse_init(list(means), grid, 2, 100, 100, rng)
    batch = bse_next_batch(state)
    assert batch == {0: 20, 1: 20}
    with pytest.raises(PhaseExhausted):
        bse_next_batch(state)
    with pytest.raises(RewardMismatch):
        bse_observe(state, {0: np.ones(20)})
    bse_observe(state, _point_mass_rewards(batch, means))
    assert state.phase == 1
    final = bse_next_batch(state)
    assert final == {0: 60}
    bse_observe(state, _point_mass_rewards(final, means))
    assert state.done
    with pytest.raises(PhaseExhausted):
        bse_next_batch(state)


def test_skipped_phase_warns(rng):
    grid = GridSpec(level_l=1, fractions=(0.01, 0.99))
    state = bse_init(range(5), grid, 5, 100, 100, rng)
    assert bse_next_batch(state) == {}
    bse_observe(state, {})
    assert state.skipped_phases == [0]
    assert state.warnings
    assert len(state.survivors) == 5


def test_leader_and_extras(rng):
    grid = GridSpec(level_l=1, fractions=(0.4, 0.6))
    state = bse_init([0, 1], grid, 2, 100, 100, rng)
    bse_record_extra(state, 1, [1.0, 1.0])
    bse_record_extra(state, 0, [0.0])
    assert bse_leader(state) == 1
    with pytest.raises(RewardMismatch):
        bse_record_extra(state, 7, [1.0])


def test_run_batched_bandit_spends_budget(rng):
    means = {0: 0.9, 1: 0.1, 2: 0.5}
    run = run_batched_bandit(
        means, minimax_grid(2, 3000), 3, 3000, 3000, "point_mass", rng,
        radius_constant=0.01,
    )
    assert sum(run.pull_history.values()) == 3000
    assert max(run.pull_history, key=run.pull_history.get) == 0
    assert run.state.survivors.tolist() == [0]
    assert 0.0 <= run.regret < 0.1


def test_bb_regret():
    assert bb_regret({0: 8, 1: 2}, {0: 1.0, 1: 0.5}, 10) == pytest.approx(0.1)
    with pytest.raises(WrongTotal):
        bb_regret({0: 8}, {0: 1.0, 1: 0.5}, 10)


def _expected_survivors(means, grid, budget, constant):
    """Survivors after each exploration phase, by direct evaluation."""
    survivors = sorted(means)
    history = []
    for phase in range(grid.level_l):
        if len(survivors) > 1:
            per_arm = floor_share(grid.fractions[phase], budget) // len(survivors)
            if per_arm > 0:
                radius = constant * math.sqrt(math.log(budget) / per_arm)
                best = max(means[a] for a in survivors)
                survivors = [a for a in survivors if best - means[a] <= radius]
        history.append(survivors)
    return history


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.sampled_from(DYADIC), min_size=2, max_size=4),
    st.integers(min_value=1, max_value=2),
    st.sampled_from([64, 256, 1024]),
    st.sampled_from([0.05, 0.2, 1.0]),
)
def test_elimination_matches_direct_evaluation(values, level, budget, constant):
    """Point-mass instances: surviving sets equal the elimination inequality."""
    means = dict(enumerate(values))
    grid = minimax_grid(level, budget)
    rng = np.random.default_rng(0)
    state = bse_init(
        list(means), grid, len(means), budget, budget, rng, radius_constant=constant
    )
    observed = []
    for _ in range(level):
        batch = bse_next_batch(state)
        bse_observe(state, _point_mass_rewards(batch, means))
        observed.append(state.survivors.tolist())
    assert observed == _expected_survivors(means, grid, budget, constant)
