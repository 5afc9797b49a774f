"""Python access to the dsdivn controller-failover simulator."""

import json
import os

from ._core import (
    ConfigError,
    IoError,
    elect_head,
    link_delay,
    rank_candidates,
    residual_time,
    segment_of,
    sweep,
)
from . import _core

__all__ = [
    "ConfigError",
    "IoError",
    "elect_head",
    "link_delay",
    "load_scenario",
    "rank_candidates",
    "residual_time",
    "segment_of",
    "simulate",
    "sweep",
]


def load_scenario(path):
    """Read and validate a scenario file, returning it as a dict with defaults filled in."""
    return json.loads(_core.scenario_from_file(os.fspath(path)))


def simulate(scenario, seed=None, mode=None, out_dir=None):
    """Run one simulation.

    `scenario` is a path to a scenario file or a dict in the same schema.
    Returns a dict with totals, the per-window PDR series, install samples and counters.
    """
    if isinstance(scenario, dict):
        text = json.dumps(scenario)
    else:
        text = _core.scenario_from_file(os.fspath(scenario))
    if out_dir is not None:
        out_dir = os.fspath(out_dir)
    return _core.simulate(text, seed=seed, mode=mode, out_dir=out_dir)
