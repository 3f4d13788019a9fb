"""Python access to the qrotor simulator core."""

import json

from ._core import (
    ConfigError,
    __version__,
    box_sphere_sizes,
    default_truncation,
    free_kernel,
    free_kernel_matrix,
    gauge_q,
    gauge_vartheta,
    gauge_z,
    heat_kernel,
    lemma11_sweep,
    psi_sweep,
    trace_norm,
)
from . import _core


def resolve_config(config):
    """Fill defaults into a config dict; raises ConfigError on bad keys."""
    return json.loads(_core.resolve_config(json.dumps(config)))


def config_hash(config):
    return _core.config_hash(json.dumps(config))


def run(config, out_dir=""):
    """Run the task named in ``config``. Returns (pass, files, summary dict)."""
    ok, files, summary = _core.run_experiment(json.dumps(config), str(out_dir))
    return ok, files, json.loads(summary)


__all__ = [
    "ConfigError",
    "__version__",
    "box_sphere_sizes",
    "config_hash",
    "default_truncation",
    "free_kernel",
    "free_kernel_matrix",
    "gauge_q",
    "gauge_vartheta",
    "gauge_z",
    "heat_kernel",
    "lemma11_sweep",
    "psi_sweep",
    "resolve_config",
    "run",
    "trace_norm",
]
