"""Python front end to the oclopt C++ core."""

import json as _json

from . import _core
from ._core import (
    Ama,
    ConfigError,
    DivergenceError,
    EmptyPoolError,
    HorizonExceeded,
    PreconditionError,
    Schedule,
    bound_terms,
    cyclic_lr,
    loss_and_grad,
    ma_update,
    preset_names,
    sigma,
)

__all__ = [
    "Ama", "ConfigError", "DivergenceError", "EmptyPoolError", "HorizonExceeded", "PreconditionError",
    "Schedule", "bound_terms", "cyclic_lr", "loss_and_grad", "ma_update", "preset_names", "sigma",
    "preset", "validate", "run_experiment", "next_batch", "verify_bounds",
]


def preset(name):
    """Resolved config of a named preset, as a dict."""
    return _json.loads(_core.preset_json(name))


def validate(config):
    """Round-trips a config dict through the C++ parser (fills defaults)."""
    return _json.loads(_core.validate_json(_json.dumps(config)))


def run_experiment(config):
    """Runs every arm and seed; returns {arm: [per-seed result dicts]}."""
    return _core.run_experiment_json(_json.dumps(config))


def next_batch(stream, t):
    """(inputs, labels) of step t for a stream spec dict."""
    return _core.next_batch_json(_json.dumps(stream), t)


def verify_bounds(configs="theory-verify"):
    if not isinstance(configs, str):
        configs = _json.dumps(configs)
    return _core.verify_bounds(configs)
