"""Evolving reward functions in a foraging population (C++ core)."""

import json

from ._core import (
    Config,
    ConfigError,
    Simulation,
    birth_probability,
    compute_gae,
    config_keys,
    export_csv,
    hazard,
    preset_names,
    random_walk,
    run,
    run_batch,
    survival,
)

__all__ = [
    "Config",
    "ConfigError",
    "Simulation",
    "birth_probability",
    "compute_gae",
    "config_keys",
    "export_csv",
    "hazard",
    "parse_events",
    "preset_names",
    "random_walk",
    "run",
    "run_batch",
    "survival",
]


def parse_events(lines):
    """Decode JSON event lines into dicts."""
    return [json.loads(line) for line in lines]
