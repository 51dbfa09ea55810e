"""Stability criterion toolkit for nonparametric minimal submanifolds.

Graph data is passed as an (m, N) array whose columns are f at the grid
nodes, in the order returned by grid_coordinates.
"""

import json

import numpy as np

from . import _minstab
from ._minstab import ConfigError

__all__ = [
    "ConfigError",
    "check_graph",
    "criterion_constants",
    "flow",
    "grid_coordinates",
    "min_rayleigh",
    "run_config",
    "xi_check",
]


def criterion_constants(n, m):
    return json.loads(_minstab.criterion_constants(n, m))


def grid_coordinates(lower, upper, resolution):
    """(n, N) array of node coordinates."""
    return _minstab.grid_coordinates(list(lower), list(upper), list(resolution))


def _values(values):
    return np.atleast_2d(np.asarray(values, dtype=float))


def check_graph(values, lower, upper, resolution, mode="slope"):
    return json.loads(_minstab.check_graph(_values(values), list(lower), list(upper), list(resolution), mode))


def min_rayleigh(values, lower, upper, resolution, seed=1):
    return json.loads(_minstab.min_rayleigh(_values(values), list(lower), list(upper), list(resolution), seed))


def flow(values, lower, upper, resolution, residual_target=1e-8, max_steps=1_000_000):
    """Runs mean curvature flow; returns (final values, report)."""
    final, report = _minstab.flow(
        _values(values), list(lower), list(upper), list(resolution), residual_target, max_steps
    )
    return final, json.loads(report)


def xi_check(n, m, count=10_000, seed=1):
    return json.loads(_minstab.xi_check(n, m, count, seed))


def run_config(text, subcommand, out_dir):
    """Runs a CLI subcommand on INI text; returns (exit code, report)."""
    code, report = _minstab.run_config(text, subcommand, str(out_dir))
    return code, json.loads(report)
