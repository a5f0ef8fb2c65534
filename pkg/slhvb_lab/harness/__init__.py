"""Experiment orchestration: seeded replications, sweeps, reports and scenarios."""

from slhvb_lab.harness.runner import (
    ReplicationReport,
    replication_seed,
    run_episode,
    run_replications,
)
from slhvb_lab.harness.scenarios import ScenarioOptions, list_scenarios, run_scenario
from slhvb_lab.harness.sweep import SweepSpec, run_sweep

__all__ = [
    "ReplicationReport",
    "replication_seed",
    "run_episode",
    "run_replications",
    "ScenarioOptions",
    "list_scenarios",
    "run_scenario",
    "SweepSpec",
    "run_sweep",
]
