import numpy as np
import pytest

from slhvb_lab.analysis.did import CellStats
from slhvb_lab.config.config import ExperimentConfig
from slhvb_lab.core.environment import EnvConfig
from slhvb_lab.core.prior import PriorSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def uniform_prior():
    return PriorSpec()


@pytest.fixture
def small_env():
    return EnvConfig(n=64, k=8, w=2, horizon_t=20, base_seed=7)


@pytest.fixture
def experiment_config(small_env):
    """Small induced-BSE experiment that runs in well under a second."""
    return ExperimentConfig(
        env=small_env,
        policy={"kind": "induced_bse", "level": 2, "grid_kind": "revised_normalized"},
        replications=3,
    )


@pytest.fixture
def duration_cell_means():
    """Per-user-per-day duration cell means of the published 2x2 experiment."""
    return {
        ("control", "pre"): 175.910,
        ("treatment", "pre"): 175.548,
        ("control", "post"): 137.059,
        ("treatment", "post"): 142.618,
    }


@pytest.fixture
def duration_cells(duration_cell_means):
    ses = {
        ("control", "pre"): 0.699,
        ("treatment", "pre"): 0.659,
        ("control", "post"): 0.6081,
        ("treatment", "post"): 0.597,
    }
    return [
        CellStats(
            group=g,
            period=p,
            count=1000,
            mean=duration_cell_means[(g, p)],
            se_mean=ses[(g, p)],
        )
        for g, p in duration_cell_means
    ]


@pytest.fixture
def isolated_env(tmp_path, monkeypatch):
    """Run in an empty directory with SLHVB_SEED unset."""
    monkeypatch.chdir(tmp_path)
    # setenv first so teardown restores the original value
    monkeypatch.setenv("SLHVB_SEED", "0")
    monkeypatch.delenv("SLHVB_SEED")
    return tmp_path
