"""Tests for prior specs, sampling, moment fits and gap-reciprocal runs."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from slhvb_lab.core.prior import (
    PriorSpec,
    density,
    fit_beta_moments,
    gap_reciprocal,
    gap_reciprocal_sample,
    log_tail_slope,
    run_gap_reciprocal,
    sample_means,
    validate_bounded_density,
)
from slhvb_lab.errors import DensityUnbounded, InfeasibleMoments, ZeroGap


def test_uniform_density(uniform_prior):
    """Uniform density is 1 on [0, 1] and 0 elsewhere."""
    assert density(uniform_prior, 0.3) == 1.0
    assert density(uniform_prior, 1.5) == 0.0
    assert validate_bounded_density(uniform_prior) == (1.0, 1.0)


def test_full_beta_is_unbounded_below():
    """An untruncated Beta(2, 2) vanishes at the endpoints."""
    prior = PriorSpec(family="truncated_beta", alpha=2.0, beta=2.0)
    with pytest.raises(DensityUnbounded):
        validate_bounded_density(prior)


def test_truncated_beta_is_bounded():
    prior = PriorSpec(family="truncated_beta", alpha=2.0, beta=2.0, lo=0.1, hi=0.9)
    c1, c2 = validate_bounded_density(prior)
    assert 0 < c1 <= c2
    assert math.isclose(prior.truncation_mass, 0.944, abs_tol=1e-3)


def test_truncated_beta_density_value():
    """Beta(2, 2) on [0, 1] has density 6 x (1 - x), so 1.5 at the midpoint."""
    prior = PriorSpec(family="truncated_beta", alpha=2.0, beta=2.0)
    assert density(prior, 0.5) == pytest.approx(1.5, rel=1e-12)


def test_piecewise_density_value():
    prior = PriorSpec(
        family="piecewise_constant",
        breakpoints=(0.0, 0.5, 1.0),
        densities=(0.5, 1.5),
    )
    assert density(prior, 0.7) == pytest.approx(1.5)
    assert density(prior, 0.2) == pytest.approx(0.5)


def test_grid_points_minimum(uniform_prior):
    with pytest.raises(ValueError):
        validate_bounded_density(uniform_prior, grid_points=50)


def test_piecewise_mass_must_be_one():
    with pytest.raises(ValidationError):
        PriorSpec(
            family="piecewise_constant",
            breakpoints=(0.0, 0.5, 1.0),
            densities=(1.0, 1.5),
        )


def test_declared_bounds_are_checked():
    with pytest.raises(ValidationError):
        PriorSpec(declared_bounds=(1.5, 2.0))
    assert PriorSpec(declared_bounds=(0.5, 2.0)).declared_bounds == (0.5, 2.0)


def test_piecewise_sampling_respects_intervals(rng):
    prior = PriorSpec(
        family="piecewise_constant",
        breakpoints=(0.0, 0.5, 1.0),
        densities=(0.4, 1.6),
    )
    draws = sample_means(prior, 50_000, rng)
    assert np.all((draws >= 0.0) & (draws <= 1.0))
    assert abs(np.mean(draws > 0.5) - 0.8) < 0.01


def test_truncated_beta_sampling_stays_in_support(rng):
    prior = PriorSpec(family="truncated_beta", alpha=2.0, beta=5.0, lo=0.2, hi=0.6)
    draws = sample_means(prior, 10_000, rng)
    assert draws.min() >= 0.2 and draws.max() <= 0.6


def test_uniform_sample_mean(rng, uniform_prior):
    assert abs(np.mean(sample_means(uniform_prior, 100_000, rng)) - 0.5) < 0.01


def test_fit_beta_moments_flat():
    """Mean 1/2 and variance 1/12 is Beta(1, 1)."""
    params = fit_beta_moments(0.5, 1.0 / 12.0)
    assert math.isclose(params.alpha, 1.0)
    assert math.isclose(params.beta, 1.0)


@pytest.mark.parametrize(
    "mean,variance,expected",
    [(0.5, 0.05, (2.0, 2.0)), (0.2, 0.01, (3.0, 12.0))],
)
def test_fit_beta_moments_values(mean, variance, expected):
    params = fit_beta_moments(mean, variance)
    assert (params.alpha, params.beta) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize(
    "mean,variance",
    [(0.0, 0.01), (1.0, 0.01), (0.5, 0.0), (0.5, 0.25), (0.2, 0.5)],
)
def test_fit_beta_moments_infeasible(mean, variance):
    with pytest.raises(InfeasibleMoments):
        fit_beta_moments(mean, variance)


@settings(max_examples=1000, deadline=None)
@given(
    st.floats(min_value=0.01, max_value=0.99),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_fit_beta_moments_round_trip(mean, share):
    """Fitted parameters reproduce the requested moments."""
    variance = share * mean * (1.0 - mean)
    params = fit_beta_moments(mean, variance)
    assert math.isclose(params.mean, mean, rel_tol=1e-12)
    assert math.isclose(params.variance, variance, rel_tol=1e-12)


def test_gap_reciprocal():
    assert math.isclose(gap_reciprocal([0.1, 0.5, 0.3]), 5.0)
    with pytest.raises(ZeroGap):
        gap_reciprocal([0.5, 0.5, 0.1])
    with pytest.raises(ValueError):
        gap_reciprocal([0.5])


def test_gap_reciprocal_sample_positive(rng, uniform_prior):
    assert gap_reciprocal_sample(uniform_prior, 10, rng) > 1.0


def test_gap_tail_matches_uniform_spacing(rng, uniform_prior):
    """For m uniform means P[1/gap >= y] = 1 - (1 - 1/y)^m."""
    run = run_gap_reciprocal(uniform_prior, 10, 100_000, rng, checkpoints=[1000])
    assert run.zero_gaps == 0
    assert abs(run.tail_probability(10.0) - (1 - 0.9**10)) < 0.01
    assert abs(run.tail_probability(100.0) - (1 - 0.99**10)) < 0.005
    assert run.checkpoint_means[0][0] == 1000
    assert log_tail_slope(run, 10.0, 100.0) >= -1.0
