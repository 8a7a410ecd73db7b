from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Optional

import yaml

BASE_CONFIG = "config/base.yaml"


# Recursively overlay `override` onto `base` (dicts merge, everything else replaces).
def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def read_yaml(path: str | Path) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


# Load a scenario file layered over the base defaults.
def load_config(path: Optional[str] = None, base: str = BASE_CONFIG) -> Dict[str, Any]:
    """Return the base config, deep-merged with the scenario at `path` when given."""
    cfg = read_yaml(base) if Path(base).exists() else {}
    if path is None or Path(path) == Path(base):
        return cfg
    return deep_merge(cfg, read_yaml(path))
