import json as _json

from . import _core
from ._core import (
    ConfigError,
    DataError,
    Dataset,
    NumericalError,
    gradcheck,
    load_dataset,
    mmd,
    rank_metrics,
    synthesize,
    tafc_fuse,
)

__all__ = [
    "ConfigError",
    "DataError",
    "Dataset",
    "NumericalError",
    "config_hash",
    "default_config",
    "fit",
    "gradcheck",
    "load_dataset",
    "mmd",
    "rank_metrics",
    "synthesize",
    "tafc_fuse",
]


def default_config():
    return _json.loads(_core.default_config())


def _merged(config):
    merged = default_config()
    merged.update(config or {})
    return _json.dumps(merged)


def config_hash(config=None):
    return _core.config_hash(_merged(config))


def fit(dataset, config=None, **overrides):
    """Train on `dataset`; returns {"report", "best_epoch", "log"}."""
    cfg = dict(config or {})
    cfg.update(overrides)
    return _json.loads(_core.fit(dataset, _merged(cfg)))
