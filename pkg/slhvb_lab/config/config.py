"""Experiment configuration: models, file loading and environment overrides."""

import hashlib
import json
import logging
import math
import os
from pathlib import Path
from typing import Annotated, Any, Dict, List, Literal, Optional, Union

import yaml
from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, Field, field_validator, model_validator

from slhvb_lab.core.batched import DEFAULT_RADIUS_CONSTANT
from slhvb_lab.core.environment import EnvConfig
from slhvb_lab.core.grids import GridKind, hybrid_plan, level_plan

logger = logging.getLogger(__name__)

SEED_ENV_VAR = "SLHVB_SEED"


class BseOptions(BaseModel):
    final_pick: Literal["first", "empirical_best"] = Field(
        default="empirical_best", description="Arm played in the final phase"
    )
    cumulative_means: bool = Field(
        default=False, description="Eliminate on all-phase means instead of phase-local"
    )
    radius_constant: float = Field(
        default=DEFAULT_RADIUS_CONSTANT, gt=0, description="Confidence radius constant"
    )


class HybridPolicySpec(BseOptions):
    kind: Literal["hybrid"] = "hybrid"
    rho: Optional[float] = Field(
        default=None, ge=0, description="Arrival exponent; inferred from n, k if unset"
    )
    with_log_factor: bool = False


class InducedBsePolicySpec(BseOptions):
    kind: Literal["induced_bse"] = "induced_bse"
    level: int = Field(..., ge=1, le=64, description="Number of elimination phases")
    grid_kind: GridKind = "revised"
    k_prime: Optional[int] = Field(default=None, ge=1, description="Resampling size")
    with_log_factor: bool = False


class RandomizedBsePolicySpec(BaseModel):
    kind: Literal["randomized_bse"] = "randomized_bse"
    epsilon: float = Field(default=0.1, ge=0, le=1, description="Explore probability")
    theta: float = Field(default=100.0, ge=0, description="Well-explored pseudo-count")
    m: int = Field(default=500, ge=2, description="Predictor samples per new card")
    predictor_noise_sigma: Optional[float] = Field(
        default=0.05, description="Predictor noise; null or inf means cold start"
    )
    cards_per_user: int = Field(default=4, ge=1)
    level: Optional[int] = Field(
        default=None, ge=0, description="Oldest card age served; defaults to w"
    )

    @field_validator("predictor_noise_sigma")
    @classmethod
    def normalize_sigma(cls, v):
        if v is None or math.isinf(v):
            return None
        if v < 0 or math.isnan(v):
            raise ValueError("predictor_noise_sigma must be nonnegative")
        return v


class OraclePolicySpec(BaseModel):
    kind: Literal["oracle"] = "oracle"


class UniformRandomPolicySpec(BaseModel):
    kind: Literal["uniform_random"] = "uniform_random"


PolicySpec = Annotated[
    Union[
        HybridPolicySpec,
        InducedBsePolicySpec,
        RandomizedBsePolicySpec,
        OraclePolicySpec,
        UniformRandomPolicySpec,
    ],
    Field(discriminator="kind"),
]


class ExperimentConfig(BaseModel):
    """
    One experiment: environment, policy and replication settings.

    Attributes:
        env: Environment parameters, including the base seed.
        policy: Tagged policy specification.
        replications: Number of independent episodes.
        burn_in: Rounds dropped before averaging; defaults to w.
        output_path: Where reports go when no --out is given.
    """

    env: EnvConfig
    policy: PolicySpec
    replications: int = Field(default=1, ge=1)
    burn_in: Optional[int] = Field(default=None, ge=0)
    output_path: Optional[str] = None

    @model_validator(mode="before")
    @classmethod
    def lift_base_seed(cls, data: Any) -> Any:
        # Accept base_seed at the top level as well as under env.
        if isinstance(data, dict) and "base_seed" in data:
            data = dict(data)
            seed = data.pop("base_seed")
            env = dict(data.get("env") or {})
            env.setdefault("base_seed", seed)
            data["env"] = env
        return data

    @model_validator(mode="after")
    def check_consistency(self):
        env, policy = self.env, self.policy
        if self.effective_burn_in >= env.horizon_t:
            raise ValueError(
                f"burn_in {self.effective_burn_in} leaves no rounds of {env.horizon_t}"
            )
        if isinstance(policy, InducedBsePolicySpec):
            if policy.level > env.w:
                raise ValueError(f"level {policy.level} exceeds lifetime w={env.w}")
            if policy.k_prime is not None and policy.k_prime > env.k:
                raise ValueError(f"k_prime {policy.k_prime} exceeds k={env.k}")
            level_plan(
                policy.level,
                env.n,
                env.k,
                policy.k_prime,
                policy.grid_kind,
                policy.with_log_factor,
            )
        elif isinstance(policy, HybridPolicySpec):
            hybrid_plan(policy.rho, env.w, env.n, env.k, policy.with_log_factor)
        elif isinstance(policy, RandomizedBsePolicySpec):
            if policy.level is not None and policy.level > env.w:
                raise ValueError(f"level {policy.level} exceeds lifetime w={env.w}")
        return self

    @property
    def effective_burn_in(self) -> int:
        return self.env.w if self.burn_in is None else self.burn_in

    @property
    def base_seed(self) -> int:
        return self.env.base_seed


def read_config_tree(path: Path) -> Dict[str, Any]:
    text = path.read_text()
    if path.suffix.lower() in (".yml", ".yaml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping at the top level")
    return data


def apply_env_overrides(data: Dict[str, Any]) -> Dict[str, Any]:
    """Apply SLHVB_SEED (after loading any .env file) to a raw config tree."""
    load_dotenv(find_dotenv(usecwd=True))
    seed = os.environ.get(SEED_ENV_VAR)
    if seed:
        data = with_seed(data, int(seed))
        logger.info(f"Using {SEED_ENV_VAR}={seed} as base seed")
    return data


def load_experiment_config(
    path: Union[str, Path], seed: Optional[int] = None
) -> ExperimentConfig:
    """Parse a JSON or YAML config; ``seed`` beats SLHVB_SEED, which beats the file."""
    path = Path(path)
    data = apply_env_overrides(read_config_tree(path))
    if seed is not None:
        data = with_seed(data, seed)
    config = ExperimentConfig.model_validate(data)
    logger.debug(f"Loaded config {path} (digest {config_digest(config)[:12]})")
    return config


def with_seed(data: Dict[str, Any], seed: int) -> Dict[str, Any]:
    data = dict(data)
    data.pop("base_seed", None)
    env = dict(data.get("env") or {})
    env["base_seed"] = seed
    data["env"] = env
    return data


def dump_experiment_config(
    config: ExperimentConfig, path: Optional[Union[str, Path]] = None
) -> str:
    text = json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True)
    if path is not None:
        try:
            Path(path).write_text(text + "\n")
        except OSError as e:
            logger.error(f"Failed to write {path}: {e}")
            raise
    return text


def config_digest(config: BaseModel) -> str:
    """SHA-256 of the canonical JSON form."""
    canonical = json.dumps(
        config.model_dump(mode="json"), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def validation_messages(error) -> List[str]:
    """Render a pydantic ValidationError as 'field.path: message' lines."""
    lines = []
    for item in error.errors():
        loc = ".".join(str(part) for part in item.get("loc", ())) or "config"
        lines.append(f"{loc}: {item.get('msg', 'invalid value')}")
    return lines
