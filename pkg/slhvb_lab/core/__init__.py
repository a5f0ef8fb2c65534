"""Simulation core: prior, arm pool, grids, batched elimination, policies, metrics."""

from slhvb_lab.core.environment import ArmPool, EnvConfig, advance_round, play
from slhvb_lab.core.grids import AdaptivityPlan, GridSpec, hybrid_plan, level_plan
from slhvb_lab.core.metrics import EpisodeSummary, RoundLog
from slhvb_lab.core.policies import (
    InducedBsePolicy,
    OracleGreedyPolicy,
    RandomizedBsePolicy,
    UniformRandomPolicy,
    make_hybrid,
)
from slhvb_lab.core.prior import PriorSpec

__all__ = [
    "ArmPool",
    "EnvConfig",
    "advance_round",
    "play",
    "AdaptivityPlan",
    "GridSpec",
    "hybrid_plan",
    "level_plan",
    "EpisodeSummary",
    "RoundLog",
    "InducedBsePolicy",
    "OracleGreedyPolicy",
    "RandomizedBsePolicy",
    "UniformRandomPolicy",
    "make_hybrid",
    "PriorSpec",
]
