"""Collision-model simulation toolkit."""

from ._collide import (
    bundled_config,
    bundled_scenarios,
    composite_recurrence,
    delayed_emission,
    run_collision_chain,
    run_scenario,
    scenario_family,
    trace_distance,
    validate_config,
    version,
)

__version__ = version()

__all__ = [
    "bundled_config",
    "bundled_scenarios",
    "composite_recurrence",
    "delayed_emission",
    "run_collision_chain",
    "run_scenario",
    "scenario_family",
    "trace_distance",
    "validate_config",
    "version",
]
