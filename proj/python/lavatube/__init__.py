"""Python access to the lava-tube exploration core."""

from ._lavatube import (
    Config,
    ConfigError,
    OccupancyMap,
    allocate_rotors,
    config_keys,
    load_config,
    nmpc_first_input,
    parse_config,
    plan,
    repulsive_force,
    run_mission,
)

__all__ = [
    "Config",
    "ConfigError",
    "OccupancyMap",
    "allocate_rotors",
    "config_keys",
    "load_config",
    "nmpc_first_input",
    "parse_config",
    "plan",
    "repulsive_force",
    "run_mission",
]
