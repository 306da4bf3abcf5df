"""Experiment orchestration: configuration, seeding, runners and the CLI."""
from .config import ExperimentConfig, apply_override, config_hash, load_config, parse_config
from .runners import RUNNERS, ordered_map
