"""Run configuration: defaults < config file < command-line flags.

The config file is flat ``key = value`` text; ``#`` starts a comment. The
``SEMCAFE_CONFIG`` environment variable, when set, names the config file and
takes precedence over ``--config``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .classifier import ModelConfig

ENV_VAR = "SEMCAFE_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    kb_dir: str | None = None
    corpus: str | None = None
    fingerprint_mode: str = "unique_entity"
    hash_dim: int = 2**18
    learning_rate: float = 0.5
    epochs: int = 10
    l2_penalty: float = 1e-5
    seed: int = 13
    train_fraction: float = 0.7
    feature_scaling: bool = True
    feature_set: str = "text+fingerprint"
    strictness: str = "lenient"

    def model_config(self) -> ModelConfig:
        return ModelConfig(
            hash_dim=self.hash_dim,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            l2_penalty=self.l2_penalty,
            seed=self.seed,
            fingerprint_mode=self.fingerprint_mode,
            feature_scaling=self.feature_scaling,
            feature_set=self.feature_set,
        )


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    if kind == "bool":
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{key}: expected a boolean, got {raw!r}")
    if kind == "int":
        return int(raw)
    if kind == "float":
        return float(raw)
    return raw


def parse_config_text(text: str) -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _TYPES:
            raise ValueError(f"config line {lineno}: unknown or malformed entry {line!r}")
        out[key] = _coerce(key, value.strip())
    return out


def resolve_config(config_path: str | None = None, overrides: dict | None = None) -> RunConfig:
    path = os.environ.get(ENV_VAR) or config_path
    cfg = RunConfig()
    if path:
        cfg = replace(cfg, **parse_config_text(Path(path).read_text(encoding="utf-8")))
    if overrides:
        cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg
