"""Seeded episodes and replication fan-out."""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from slhvb_lab.config.config import (
    ExperimentConfig,
    HybridPolicySpec,
    InducedBsePolicySpec,
    OraclePolicySpec,
    RandomizedBsePolicySpec,
    UniformRandomPolicySpec,
    config_digest,
)
from slhvb_lab.core.environment import ArmPool, advance_round, play
from slhvb_lab.core.grids import level_plan
from slhvb_lab.core.metrics import (
    EpisodeSummary,
    RoundLog,
    build_round_log,
    halfwidth,
    summarize_episode,
)
from slhvb_lab.core.policies import (
    InducedBsePolicy,
    OracleGreedyPolicy,
    RandomizedBsePolicy,
    UniformRandomPolicy,
    make_hybrid,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
Arrivals = Callable[[int], np.ndarray]


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def replication_seed(base_seed: int, replication_index: int) -> int:
    """base_seed XOR splitmix64(replication_index)."""
    return (base_seed ^ _splitmix64(replication_index)) & MASK64


@dataclass
class Streams:
    """Independent generators for arrivals, rewards, policy choices and predictions."""

    arrivals: np.random.Generator
    rewards: np.random.Generator
    policy: np.random.Generator
    predictor: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> "Streams":
        children = np.random.SeedSequence(seed).spawn(4)
        return cls(*(np.random.default_rng(c) for c in children))


def build_policy(config: ExperimentConfig, streams: Streams):
    env, spec = config.env, config.policy
    if isinstance(spec, HybridPolicySpec):
        return make_hybrid(
            spec.rho,
            env.w,
            env.n,
            env.k,
            with_log_factor=spec.with_log_factor,
            final_pick=spec.final_pick,
            cumulative_means=spec.cumulative_means,
            radius_constant=spec.radius_constant,
        )
    if isinstance(spec, InducedBsePolicySpec):
        plan = level_plan(
            spec.level, env.n, env.k, spec.k_prime, spec.grid_kind, spec.with_log_factor
        )
        return InducedBsePolicy(
            plan,
            env.n,
            final_pick=spec.final_pick,
            cumulative_means=spec.cumulative_means,
            radius_constant=spec.radius_constant,
        )
    if isinstance(spec, RandomizedBsePolicySpec):
        return RandomizedBsePolicy(
            env.n,
            level=env.w if spec.level is None else spec.level,
            epsilon=spec.epsilon,
            theta=spec.theta,
            m=spec.m,
            predictor_noise_sigma=spec.predictor_noise_sigma,
            cards_per_user=spec.cards_per_user,
            predictor_rng=streams.predictor,
        )
    if isinstance(spec, OraclePolicySpec):
        return OracleGreedyPolicy(env.n, level=env.w)
    if isinstance(spec, UniformRandomPolicySpec):
        return UniformRandomPolicy(env.n, level=env.w)
    raise ValueError(f"unsupported policy {spec!r}")


def run_episode(
    config: ExperimentConfig,
    replication_index: int,
    arrivals: Optional[Arrivals] = None,
) -> Tuple[EpisodeSummary, List[RoundLog]]:
    """advance -> allocate -> play -> observe -> log, for horizon_t rounds.

    ``arrivals`` scripts each round's cohort means instead of sampling the prior.
    """
    env = config.env
    seed = replication_seed(env.base_seed, replication_index)
    streams = Streams.from_seed(seed)
    policy = build_policy(config, streams)

    pool = ArmPool()
    logs: List[RoundLog] = []
    for t in range(env.horizon_t):
        means = arrivals(t) if arrivals is not None else None
        pool = advance_round(pool, env, streams.arrivals, means=means)
        allocation = policy.allocate(pool, streams.policy)
        outcome = play(pool, allocation, env, streams.rewards)
        policy.observe(outcome)
        logs.append(build_round_log(pool, outcome, policy.level, env.n))

    warnings = len(policy.warnings)
    if warnings:
        logger.warning(
            f"⚠️  Replication {replication_index}: {warnings} policy warnings "
            f"(first: {policy.warnings[0]})"
        )
    summary = summarize_episode(
        logs,
        config.effective_burn_in,
        config_digest(config),
        replication_index,
        seed,
        warnings=warnings,
    )
    logger.info(
        f"📊 Replication {replication_index}: mean loss {summary.mean_loss:.6f}, "
        f"{summary.pct_of_oracle:.2f}% of oracle"
    )
    return summary, logs


@dataclass
class ReplicationReport:
    config_digest: str
    summaries: List[EpisodeSummary]
    mean_loss: float
    loss_ci: float
    mean_pct_of_oracle: float
    pct_ci: float
    logs: Optional[List[List[RoundLog]]] = None

    @property
    def replications(self) -> int:
        return len(self.summaries)


def _replicate(args) -> Tuple[EpisodeSummary, Optional[List[RoundLog]]]:
    config, index, arrivals, keep_logs = args
    summary, logs = run_episode(config, index, arrivals)
    return summary, (logs if keep_logs else None)


def aggregate(
    digest: str,
    summaries: Sequence[EpisodeSummary],
    logs: Optional[List[List[RoundLog]]] = None,
) -> ReplicationReport:
    summaries = sorted(summaries, key=lambda s: s.replication)
    if len(summaries) == 1:
        only = summaries[0]
        return ReplicationReport(
            digest, list(summaries), only.mean_loss, only.loss_ci_halfwidth,
            only.pct_of_oracle, 0.0, logs,
        )
    losses = [s.mean_loss for s in summaries]
    pcts = [s.pct_of_oracle for s in summaries]
    return ReplicationReport(
        config_digest=digest,
        summaries=list(summaries),
        mean_loss=float(np.mean(losses)),
        loss_ci=halfwidth(losses),
        mean_pct_of_oracle=float(np.mean(pcts)),
        pct_ci=halfwidth(pcts),
        logs=logs,
    )


def run_replications(
    config: ExperimentConfig,
    parallelism: int = 1,
    arrivals: Optional[Arrivals] = None,
    keep_logs: bool = False,
) -> ReplicationReport:
    """Run every replication; the result does not depend on ``parallelism``."""
    if parallelism < 1:
        raise ValueError(f"parallelism must be positive, got {parallelism}")
    jobs = [(config, i, arrivals, keep_logs) for i in range(config.replications)]
    if parallelism == 1 or len(jobs) == 1:
        results = [_replicate(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as executor:
            results = list(executor.map(_replicate, jobs))

    summaries = [summary for summary, _ in results]
    logs = [rep_logs for _, rep_logs in results] if keep_logs else None
    return aggregate(config_digest(config), summaries, logs)
