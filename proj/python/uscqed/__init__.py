"""Two-qubit joint absorption in coupled-cavity arrays.

Configs are JSON documents (dict or text) or canonical ids such as "fig3a";
see README.md for the schema.
"""

import json

import numpy as np

from ._core import (
    ConfigError,
    ConvergenceError,
    IoError,
    ValidationError,
    canonical_config,
    list_scenarios,
    version,
)
from . import _core

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "IoError",
    "Result",
    "ValidationError",
    "canonical_config",
    "compute",
    "list_scenarios",
    "run",
    "validate",
    "version",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


class Result:
    def __init__(self, columns, data, metadata):
        self.columns = list(columns)
        self.table = {name: np.asarray(col) for name, col in zip(columns, data)}
        self.metadata = metadata

    def __getitem__(self, name):
        return self.table[name]


def validate(config):
    """Resolved config as a dict. Raises ValidationError listing every problem."""
    return json.loads(_core.validate(_text(config)))


def compute(config, n_max=None):
    columns, data, meta = _core.compute(_text(config), n_max)
    return Result(columns, data, json.loads(meta))


def run(config, out_dir, format="csv", n_max=None, deterministic=False):
    """Writes the data file and metadata sidecar; returns their paths."""
    return _core.run(_text(config), str(out_dir), format, n_max, deterministic)
