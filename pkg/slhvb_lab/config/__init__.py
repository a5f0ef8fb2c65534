from slhvb_lab.config.config import (
    ExperimentConfig,
    config_digest,
    dump_experiment_config,
    load_experiment_config,
)

__all__ = [
    "ExperimentConfig",
    "config_digest",
    "dump_experiment_config",
    "load_experiment_config",
]
