"""Named experiment presets: offline simulations, scaling checks and the DID demo."""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy import stats

from slhvb_lab.analysis.did import (
    CELLS,
    ObservationTable,
    cell_stats,
    did_ols,
    lift_percentages,
)
from slhvb_lab.analysis.significance import (
    bootstrap_did,
    did_z_test,
    samples_from_table,
)
from slhvb_lab.config.config import (
    ExperimentConfig,
    HybridPolicySpec,
    InducedBsePolicySpec,
    RandomizedBsePolicySpec,
)
from slhvb_lab.core.environment import EnvConfig
from slhvb_lab.core.metrics import fit_loss_exponent
from slhvb_lab.core.policies import worst_case_pair
from slhvb_lab.errors import UnknownScenario
from slhvb_lab.harness.report import write_many
from slhvb_lab.harness.runner import run_replications

logger = logging.getLogger(__name__)

Frames = Dict[str, pd.DataFrame]


class ScenarioOptions(BaseModel):
    """Overrides shared by every scenario; unset fields keep the preset values."""

    out_dir: Path = Field(default=Path("results"), description="Output directory")
    replications: Optional[int] = Field(default=None, ge=1)
    horizon: Optional[int] = Field(default=None, ge=2, description="Rounds per episode")
    n_values: Optional[List[int]] = Field(default=None, min_length=1)
    k_values: Optional[List[int]] = Field(default=None, min_length=1)
    levels: Optional[List[int]] = Field(default=None, min_length=1)
    parallelism: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, lt=2**64)

    def pick(self, name: str, default):
        value = getattr(self, name)
        return default if value is None else value


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    build: Callable[[ScenarioOptions], Frames]


_REGISTRY: Dict[str, Scenario] = {}


def scenario(name: str, description: str):
    def register(fn: Callable[[ScenarioOptions], Frames]):
        _REGISTRY[name] = Scenario(name, description, fn)
        return fn

    return register


def list_scenarios() -> List[str]:
    return list(_REGISTRY)


def describe_scenarios() -> Dict[str, str]:
    return {name: s.description for name, s in _REGISTRY.items()}


def run_scenario(name: str, options: Optional[ScenarioOptions] = None) -> List[Path]:
    """Run a preset and write its CSV files under ``options.out_dir``."""
    if name not in _REGISTRY:
        raise UnknownScenario(
            f"unknown scenario {name!r}; choose from {', '.join(_REGISTRY)}"
        )
    options = options or ScenarioOptions()
    logger.info(f"🏃 Running scenario {name}")
    frames = _REGISTRY[name].build(options)
    return write_many(frames, options.out_dir)


# ---------------------------------------------------------------------------
# Offline simulations
# ---------------------------------------------------------------------------

OFFLINE_LIFETIME = 5
# Elimination radius c·sqrt(ln n / n_i). The default c=3 never drops an arm at
# n near 2^11, so the offline runs use a tighter constant.
OFFLINE_RADIUS_CONSTANT = 0.25


def level_ordering(pcts: Dict[int, List[float]], high=(3, 4), low=(1, 2)):
    """One-sided Welch test that deep levels beat shallow ones on pct of oracle."""
    upper = [p for lv in high for p in pcts.get(lv, [])]
    lower = [p for lv in low for p in pcts.get(lv, [])]
    if len(upper) < 2 or len(lower) < 2:
        return None
    result = stats.ttest_ind(upper, lower, equal_var=False, alternative="greater")
    return {
        "high_mean": float(np.mean(upper)),
        "low_mean": float(np.mean(lower)),
        "t_stat": float(result.statistic),
        "p_value": float(result.pvalue),
    }


@scenario(
    "offline-sim-synthetic",
    "Fixed-level induced BSE on uniform arms: percentage of oracle by (k, n, level)",
)
def offline_sim_synthetic(options: ScenarioOptions) -> Frames:
    k_values = options.pick("k_values", [100, 200])
    n_values = options.pick("n_values", [2**e for e in range(11, 18)])
    levels = options.pick("levels", [1, 2, 3, 4])
    horizon = options.pick("horizon", 500)
    replications = options.pick("replications", 20)

    rows, ordering = [], []
    for k in k_values:
        for n in n_values:
            pcts: Dict[int, List[float]] = {}
            for level in levels:
                config = ExperimentConfig(
                    env=EnvConfig(
                        n=n, k=k, w=OFFLINE_LIFETIME, horizon_t=horizon,
                        base_seed=options.seed,
                    ),
                    policy=InducedBsePolicySpec(
                        level=level,
                        grid_kind="revised_normalized",
                        radius_constant=OFFLINE_RADIUS_CONSTANT,
                    ),
                    replications=replications,
                )
                report = run_replications(config, parallelism=options.parallelism)
                pcts[level] = [s.pct_of_oracle for s in report.summaries]
                rows.append(
                    {
                        "k": k,
                        "n": n,
                        "level": level,
                        "mean_pct_of_oracle": report.mean_pct_of_oracle,
                        "ci": report.pct_ci,
                    }
                )
            test = level_ordering(pcts)
            if test is not None:
                ordering.append({"k": k, "n": n, **test})
                logger.info(
                    f"📊 k={k} n={n}: levels 3-4 {test['high_mean']:.2f}% vs "
                    f"1-2 {test['low_mean']:.2f}% (p={test['p_value']:.3g})"
                )
    frames = {"offline_sim.csv": pd.DataFrame(rows)}
    if ordering:
        frames["offline_sim_ordering.csv"] = pd.DataFrame(ordering)
    return frames


@scenario(
    "cold-vs-warm",
    "Randomized BSE with predictor priors against flat priors at levels 1 and 2",
)
def cold_vs_warm(options: ScenarioOptions) -> Frames:
    k = options.pick("k_values", [50])[0]
    n = options.pick("n_values", [2**12])[0]
    levels = options.pick("levels", [1, 2])
    horizon = options.pick("horizon", 200)
    replications = options.pick("replications", 10)

    rows = []
    for start, sigma in (("warm", 0.05), ("cold", None)):
        for level in levels:
            config = ExperimentConfig(
                env=EnvConfig(
                    n=n, k=k, w=OFFLINE_LIFETIME, horizon_t=horizon,
                    base_seed=options.seed,
                ),
                policy=RandomizedBsePolicySpec(
                    predictor_noise_sigma=sigma, level=level
                ),
                replications=replications,
            )
            report = run_replications(config, parallelism=options.parallelism)
            rows.append(
                {
                    "start": start,
                    "level": level,
                    "mean_pct_of_oracle": report.mean_pct_of_oracle,
                    "ci": report.pct_ci,
                    "mean_loss": report.mean_loss,
                    "loss_ci": report.loss_ci,
                }
            )
    return {"cold_vs_warm.csv": pd.DataFrame(rows)}


# ---------------------------------------------------------------------------
# Scaling and lower-bound demos
# ---------------------------------------------------------------------------

SLOPE_RHO = 0.5
SLOPE_LIFETIME = 4


def theoretical_exponent(rho: float, w: int) -> float:
    return -min(rho, w / (2 * (w + 1)))


@scenario("slope-check", "Hybrid loss against n at fixed rho and w, with the fitted exponent")
def slope_check(options: ScenarioOptions) -> Frames:
    n_values = options.pick("n_values", [2**e for e in range(10, 17)])
    horizon = options.pick("horizon", 60)
    replications = options.pick("replications", 50)

    rows = []
    for n in n_values:
        config = ExperimentConfig(
            env=EnvConfig(
                n=n,
                k=max(1, int(round(n**SLOPE_RHO))),
                w=SLOPE_LIFETIME,
                horizon_t=horizon,
                base_seed=options.seed,
            ),
            policy=HybridPolicySpec(rho=SLOPE_RHO),
            replications=replications,
        )
        report = run_replications(config, parallelism=options.parallelism)
        rows.append(
            {"n": n, "k": config.env.k, "mean_loss": report.mean_loss, "ci": report.loss_ci}
        )
    points = pd.DataFrame(rows)
    fitted = fit_loss_exponent(list(zip(points["n"], points["mean_loss"])))
    theory = theoretical_exponent(SLOPE_RHO, SLOPE_LIFETIME)
    logger.info(f"📊 Fitted loss exponent {fitted:.3f} (theory {theory:.3f})")
    fit = pd.DataFrame(
        [
            {
                "rho": SLOPE_RHO,
                "w": SLOPE_LIFETIME,
                "fitted_exponent": fitted,
                "theoretical_exponent": theory,
            }
        ]
    )
    return {"slope_check.csv": points, "slope_check_fit.csv": fit}


@scenario("worst-case-demo", "Hybrid on the two single-arm worst-case streams")
def worst_case_demo(options: ScenarioOptions) -> Frames:
    w = options.pick("levels", [2])[0]
    n = options.pick("n_values", [64])[0]
    horizon = options.pick("horizon", 100)
    replications = options.pick("replications", 1)
    pair = worst_case_pair(w)

    config = ExperimentConfig(
        env=EnvConfig(
            n=n, k=1, w=w, horizon_t=horizon, reward_model="point_mass",
            base_seed=options.seed,
        ),
        policy=HybridPolicySpec(rho=0.0),
        replications=replications,
    )
    rows = []
    for label, stream in (("A", pair.instance_a), ("B", pair.instance_b)):
        report = run_replications(
            config, parallelism=options.parallelism, arrivals=stream, keep_logs=True
        )
        burn_in = config.effective_burn_in
        worst = max(log.loss for logs in report.logs for log in logs[burn_in:])
        rows.append(
            {"instance": label, "mean_loss": report.mean_loss, "max_round_loss": worst}
        )
    frame = pd.DataFrame(rows)
    frame = pd.concat(
        [
            frame,
            pd.DataFrame(
                [
                    {
                        "instance": "max",
                        "mean_loss": frame["mean_loss"].max(),
                        "max_round_loss": frame["max_round_loss"].max(),
                    }
                ]
            ),
        ],
        ignore_index=True,
    )
    return {"worst_case.csv": frame}


# ---------------------------------------------------------------------------
# DID pipeline on a synthetic 2x2 log
# ---------------------------------------------------------------------------

DEMO_CELL_MEANS = {
    ("control", "pre"): 175.910,
    ("treatment", "pre"): 175.548,
    ("control", "post"): 137.059,
    ("treatment", "post"): 142.618,
}
DEMO_CELL_SD = 30.0
DEMO_CELL_SIZE = 2000
DEMO_BOOTSTRAP_DRAWS = 1000


def synthetic_table(
    rng: np.random.Generator,
    means: Dict = DEMO_CELL_MEANS,
    sd: float = DEMO_CELL_SD,
    size: int = DEMO_CELL_SIZE,
) -> ObservationTable:
    """Normal observations around each cell mean, ``size`` rows per cell."""
    t, i, y = [], [], []
    for group, period in CELLS:
        t.append(np.full(size, int(period == "post")))
        i.append(np.full(size, int(group == "treatment")))
        y.append(rng.normal(means[(group, period)], sd, size))
    return ObservationTable(t=np.concatenate(t), i=np.concatenate(i), y=np.concatenate(y))


@scenario("did-demo", "Regression, Z-test, bootstrap and lift on a synthetic 2x2 log")
def did_demo(options: ScenarioOptions) -> Frames:
    rng = np.random.default_rng(options.seed)
    size = options.pick("n_values", [DEMO_CELL_SIZE])[0]
    draws = options.pick("replications", DEMO_BOOTSTRAP_DRAWS)
    table = synthetic_table(rng, size=size)

    fit = did_ols(table)
    z, p = did_z_test(cell_stats(table))
    bz, bp = bootstrap_did(samples_from_table(table), draws, size, rng)
    tests = pd.DataFrame(
        [
            {"test": "z_test", "z": z, "p_value": p},
            {"test": "bootstrap", "z": bz, "p_value": bp},
        ]
    )
    lift = pd.DataFrame([{"metric": "y", "lift_pct": 100.0 * lift_percentages(fit)}])
    return {"did_fit.csv": fit.to_frame(), "did_tests.csv": tests, "did_lift.csv": lift}
