"""Parameter sweeps over n, level, k or the policy itself."""

import logging
from pathlib import Path
from typing import Any, List, Literal, Optional, Union

import pandas as pd
from pydantic import BaseModel, Field

from slhvb_lab.config.config import (
    ExperimentConfig,
    apply_env_overrides,
    config_digest,
    read_config_tree,
    with_seed,
)
from slhvb_lab.harness.runner import run_replications

logger = logging.getLogger(__name__)

SweepAxis = Literal["n", "l", "k", "policy"]


class SweepSpec(BaseModel):
    axis: SweepAxis = Field(..., description="Parameter to vary")
    values: List[Any] = Field(..., min_length=1, description="Values along the axis")
    base: ExperimentConfig = Field(..., description="Config every point starts from")


def apply_axis(base: ExperimentConfig, axis: SweepAxis, value: Any) -> ExperimentConfig:
    """Copy ``base`` with one parameter replaced, revalidating the result.

    For a hybrid policy with a fixed rho, moving n also moves k = round(n^rho).
    """
    data = base.model_dump(mode="json")
    env, policy = data["env"], data["policy"]
    if axis == "n":
        env["n"] = int(value)
        if policy["kind"] == "hybrid" and policy.get("rho") is not None:
            env["k"] = max(1, int(round(env["n"] ** policy["rho"])))
    elif axis == "k":
        env["k"] = int(value)
    elif axis == "l":
        if policy["kind"] not in ("induced_bse", "randomized_bse"):
            raise ValueError(f"policy {policy['kind']!r} has no level to sweep")
        policy["level"] = int(value)
    elif axis == "policy":
        if not isinstance(value, dict):
            value = {"kind": str(value)}
        data["policy"] = value
    else:
        raise ValueError(f"unknown sweep axis {axis!r}")
    return ExperimentConfig.model_validate(data)


def _label(axis: SweepAxis, value: Any) -> str:
    if axis == "policy":
        return value["kind"] if isinstance(value, dict) else str(value)
    return str(value)


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> pd.DataFrame:
    """One row of replication statistics per sweep point, in ``values`` order."""
    rows = []
    for value in spec.values:
        config = apply_axis(spec.base, spec.axis, value)
        logger.info(f"🏃 Sweep {spec.axis}={_label(spec.axis, value)}")
        report = run_replications(config, parallelism=parallelism)
        rows.append(
            {
                "axis": spec.axis,
                "value": _label(spec.axis, value),
                "n": config.env.n,
                "k": config.env.k,
                "mean_loss": report.mean_loss,
                "ci": report.loss_ci,
                "mean_pct_of_oracle": report.mean_pct_of_oracle,
                "pct_ci": report.pct_ci,
                "replications": report.replications,
                "config_digest": config_digest(config),
            }
        )
    return pd.DataFrame(rows)


def load_sweep_spec(path: Union[str, Path], seed: Optional[int] = None) -> SweepSpec:
    """Read a sweep file; SLHVB_SEED and ``seed`` override the base config's seed."""
    data = read_config_tree(Path(path))
    base = apply_env_overrides(dict(data.get("base") or {}))
    if seed is not None:
        base = with_seed(base, seed)
    data = dict(data, base=base)
    return SweepSpec.model_validate(data)
