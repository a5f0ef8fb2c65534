"""End-to-end runs of the named scenarios at reduced scale."""

import numpy as np
import pandas as pd
import pytest

from slhvb_lab.core.prior import PriorSpec, run_gap_reciprocal
from slhvb_lab.harness.scenarios import (
    ScenarioOptions,
    list_scenarios,
    run_scenario,
)

pytestmark = pytest.mark.slow


def test_every_scenario_registered():
    assert set(list_scenarios()) == {
        "offline-sim-synthetic",
        "cold-vs-warm",
        "slope-check",
        "worst-case-demo",
        "did-demo",
    }


def test_offline_sim(tmp_path):
    options = ScenarioOptions(
        out_dir=tmp_path,
        k_values=[20],
        n_values=[256],
        levels=[1, 3],
        horizon=20,
        replications=3,
    )
    paths = run_scenario("offline-sim-synthetic", options)
    assert [p.name for p in paths] == ["offline_sim.csv", "offline_sim_ordering.csv"]

    sim = pd.read_csv(tmp_path / "offline_sim.csv")
    assert sim["level"].tolist() == [1, 3]
    assert (sim["mean_pct_of_oracle"] > 0).all()
    assert (sim["mean_pct_of_oracle"] <= 100.0 + 3 * sim["ci"] + 1.0).all()

    ordering = pd.read_csv(tmp_path / "offline_sim_ordering.csv")
    assert 0.0 <= ordering.loc[0, "p_value"] <= 1.0


def test_offline_sim_deep_levels_beat_shallow(tmp_path):
    """At k=100, n=2^11 levels 3-4 earn a larger share of the oracle than 1-2."""
    options = ScenarioOptions(
        out_dir=tmp_path,
        k_values=[100],
        n_values=[2**11],
        levels=[1, 2, 3, 4],
        horizon=150,
        replications=8,
    )
    run_scenario("offline-sim-synthetic", options)
    ordering = pd.read_csv(tmp_path / "offline_sim_ordering.csv")
    assert ordering.loc[0, "high_mean"] > ordering.loc[0, "low_mean"]
    assert ordering.loc[0, "p_value"] < 0.05


def test_offline_sim_without_deep_levels_skips_ordering(tmp_path):
    options = ScenarioOptions(
        out_dir=tmp_path,
        k_values=[20],
        n_values=[256],
        levels=[1, 2],
        horizon=12,
        replications=2,
    )
    paths = run_scenario("offline-sim-synthetic", options)
    assert [p.name for p in paths] == ["offline_sim.csv"]


def test_cold_vs_warm(tmp_path):
    options = ScenarioOptions(
        out_dir=tmp_path,
        k_values=[10],
        n_values=[128],
        levels=[1],
        horizon=20,
        replications=2,
    )
    run_scenario("cold-vs-warm", options)
    df = pd.read_csv(tmp_path / "cold_vs_warm.csv")
    assert df["start"].tolist() == ["warm", "cold"]
    assert (df["mean_loss"] >= 0).all()


def test_slope_check_structure(tmp_path):
    options = ScenarioOptions(
        out_dir=tmp_path,
        n_values=[2**10, 2**12, 2**14],
        horizon=30,
        replications=3,
    )
    run_scenario("slope-check", options)
    points = pd.read_csv(tmp_path / "slope_check.csv")
    assert points["k"].tolist() == [32, 64, 128]
    fit = pd.read_csv(tmp_path / "slope_check_fit.csv")
    assert fit.loc[0, "fitted_exponent"] < 0
    assert fit.loc[0, "theoretical_exponent"] == pytest.approx(-0.4)


def test_slope_check_exponent_near_theory(tmp_path):
    """n = 2^10..2^16 at rho=0.5, w=4 fits a loss exponent near -0.4."""
    run_scenario("slope-check", ScenarioOptions(out_dir=tmp_path))
    points = pd.read_csv(tmp_path / "slope_check.csv")
    assert points["n"].tolist() == [2**e for e in range(10, 17)]
    fit = pd.read_csv(tmp_path / "slope_check_fit.csv")
    assert -0.55 <= fit.loc[0, "fitted_exponent"] <= -0.25


def test_worst_case_demo(tmp_path):
    options = ScenarioOptions(out_dir=tmp_path, levels=[2], horizon=30)
    run_scenario("worst-case-demo", options)
    df = pd.read_csv(tmp_path / "worst_case.csv").set_index("instance")
    assert list(df.index) == ["A", "B", "max"]
    assert df.loc["max", "mean_loss"] == df.loc[["A", "B"], "mean_loss"].max()
    assert df.loc["max", "mean_loss"] > 0


def test_did_demo_detects_the_shift(tmp_path):
    options = ScenarioOptions(out_dir=tmp_path, n_values=[1000], replications=200)
    run_scenario("did-demo", options)
    fit = pd.read_csv(tmp_path / "did_fit.csv").set_index("term")
    assert fit.loc["post:treatment", "beta"] == pytest.approx(
        5.921, abs=4 * fit.loc["post:treatment", "se"]
    )
    lift = pd.read_csv(tmp_path / "did_lift.csv")
    assert lift.loc[0, "lift_pct"] > 0


def test_gap_reciprocal_mean_keeps_growing():
    """Mean 1/gap at 10^6 draws tops the mean at 10^3 for at least 4 of 5 seeds."""
    grew = 0
    for seed in range(5):
        run = run_gap_reciprocal(
            PriorSpec(), 10, 1_000_000, np.random.default_rng(seed),
            checkpoints=[1000, 1_000_000],
        )
        assert run.zero_gaps == 0
        assert abs(run.tail_probability(100.0) - (1 - 0.99**10)) < 0.002
        (_, early), (_, late) = run.checkpoint_means
        grew += late > early
    assert grew >= 4
