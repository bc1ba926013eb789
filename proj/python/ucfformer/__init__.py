"""Python access to the UCFFormer C++ core.

Configs are plain dicts with the same layout as the JSON run configs.
"""

import json

from . import _ucf
from ._ucf import (
    ConfigError,
    ContractError,
    DivergenceError,
    InputError,
    ShapeError,
    ce_from_probability,
    complexity_csv,
    contrastive_from_similarity,
    cosine_sim,
    profile,
    total_loss,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "DivergenceError",
    "InputError",
    "ShapeError",
    "accept",
    "ce_from_probability",
    "complexity_csv",
    "contrastive_from_similarity",
    "cosine_sim",
    "desk_config",
    "generate_dataset",
    "gradcheck",
    "profile",
    "resolve_config",
    "total_loss",
    "train",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def resolve_config(config=None):
    """Fill in defaults and validate; raises ConfigError on unknown keys."""
    return json.loads(_ucf.resolve_config(_dump(config)))


def desk_config():
    """The small configuration the training acceptance criteria use."""
    return json.loads(_ucf.desk_config())


def generate_dataset(config=None):
    """List of (inputs, label, partition); inputs holds one T x raw_dim array per modality."""
    return _ucf.generate_dataset(_dump(config))


def train(config=None):
    """Train from scratch. Returns the metrics lines, confusion CSV and test result."""
    out = _ucf.train(_dump(config))
    return {
        "metrics": [json.loads(line) for line in out["metrics_jsonl"].splitlines()],
        "confusion_csv": out["confusion_csv"],
        "test": json.loads(out["test"]),
        "best_epoch": out["best_epoch"],
    }


def gradcheck(config=None, eps=1e-5):
    return _ucf.gradcheck(_dump(config), eps)


def accept(ids=()):
    return _ucf.accept(list(ids))
