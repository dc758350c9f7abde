# SPDX-License-Identifier: Apache-2.0
#
# irsfd: weighted sum-rate optimization for multi-IRS full-duplex links
# ------------------------------------------------------------------------
"""Python interface to the irsfd solver.

Scenarios and experiment specs are plain dicts with the same layout as the
JSON files read by the command-line tool.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Optional, Sequence, Union

from . import _core
from ._core import ChannelSet, ConfigError, DimensionError, SolverError

__version__ = _core.__version__

Scenario = Union[str, Mapping[str, Any]]


def _text(obj: Scenario) -> str:
    # A bare string names a preset.
    if isinstance(obj, str):
        return json.dumps({"preset": obj})
    return json.dumps(obj)


def preset(name: str = "table1") -> dict:
    """Fully expanded scenario dict of a named preset."""
    return json.loads(_core.preset(name))


def normalize_scenario(scenario: Scenario) -> dict:
    """Validate a scenario and return it with all defaults filled in."""
    return json.loads(_core.normalize_scenario(_text(scenario)))


def generate_channels(scenario: Scenario, seed: int, stream: int = 0) -> ChannelSet:
    return _core.generate_channels(_text(scenario), seed, stream)


def solve(
    scenario: Scenario = "table1",
    scheme: int = 1,
    duplex: str = "FD",
    seed: int = 1,
    initial_phases: Optional[Sequence[float]] = None,
) -> dict:
    """Draw the channel for ``seed`` and run the chosen scheme on it."""
    return _core.solve(_text(scenario), scheme, duplex, seed, initial_phases)


def solve_channels(
    channels: ChannelSet,
    scenario: Scenario,
    scheme: int = 1,
    duplex: str = "FD",
    initial_phases: Optional[Sequence[float]] = None,
) -> dict:
    """Run a scheme on an existing channel realization."""
    return _core.solve_channels(channels, _text(scenario), scheme, duplex, initial_phases)


def run_sweep(spec: Mapping[str, Any], jobs: int = 0) -> list:
    """Run an experiment spec; one dict per CSV row."""
    return _core.run_sweep(json.dumps(spec), jobs)


def write_sweep(spec: Mapping[str, Any], path: str, jobs: int = 0) -> int:
    """Run an experiment spec and write its CSV. Returns the record count."""
    return _core.write_sweep(json.dumps(spec), str(path), jobs)


def csv_columns(kind: str, include_timing: bool = False) -> list:
    return _core.csv_columns(kind, include_timing)


def selftest(seed: int = 1) -> list:
    return _core.selftest(seed)


__all__ = [
    "ChannelSet",
    "ConfigError",
    "DimensionError",
    "SolverError",
    "csv_columns",
    "generate_channels",
    "normalize_scenario",
    "preset",
    "run_sweep",
    "selftest",
    "solve",
    "solve_channels",
    "write_sweep",
]
