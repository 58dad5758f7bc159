"""Run configuration: JSON file + command-line overrides.

Every knob defaults to the tuned values, so a config that only names the
input paths reproduces the reference setup.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from . import forest, gbt, lstm
from .errors import ConfigError

SPLIT_YEAR_RANGE = (1900, 2100)


@dataclass
class RunConfig:
    perimeter_csv: Optional[str] = None
    dictionary: Optional[str] = None
    geometry: Optional[str] = None          # WKT/GeoJSON sidecar CSV or .shp path
    out_dir: str = "out"
    clean_csv: Optional[str] = None         # defaults to <out_dir>/cleaned.csv
    split_year: int = 2018
    seed: int = 0
    threads: int = 1
    forest_params: forest.ForestParams = field(default_factory=forest.ForestParams)
    gbt_params: gbt.GbtParams = field(default_factory=gbt.GbtParams)
    lstm_params: lstm.LstmParams = field(default_factory=lstm.LstmParams)
    rf_grid: dict = field(default_factory=lambda: dict(forest.GRID))
    gbt_grid: dict = field(default_factory=lambda: dict(gbt.GRID))
    lstm_trials: int = lstm.N_TRIALS
    config_bytes: bytes = b"{}"             # raw file content, for the manifest

    def resolved_clean_csv(self) -> str:
        return self.clean_csv or os.path.join(self.out_dir, "cleaned.csv")


def _params_from(section: dict, cls, name: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name}: {sorted(unknown)}")
    return cls(**section)


def load_config(path: Optional[str]) -> RunConfig:
    """Read the JSON config file; a missing path yields pure defaults."""
    if path is None:
        return RunConfig()
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, "rb") as handle:
        raw = handle.read()
    try:
        payload = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")

    config = RunConfig(config_bytes=raw)
    paths = payload.get("paths", {})
    for key in ("perimeter_csv", "dictionary", "geometry", "out_dir", "clean_csv"):
        if key in paths:
            setattr(config, key, paths[key])
    for key in ("split_year", "seed", "threads", "lstm_trials"):
        if key in payload:
            setattr(config, key, payload[key])
    if "forest" in payload:
        config.forest_params = _params_from(payload["forest"], forest.ForestParams, "forest")
    if "gbt" in payload:
        config.gbt_params = _params_from(payload["gbt"], gbt.GbtParams, "gbt")
    if "lstm" in payload:
        config.lstm_params = _params_from(payload["lstm"], lstm.LstmParams, "lstm")
    if "rf_grid" in payload:
        config.rf_grid = dict(payload["rf_grid"])
    if "gbt_grid" in payload:
        config.gbt_grid = dict(payload["gbt_grid"])
    validate_config(config)
    return config


def validate_config(config: RunConfig):
    lo, hi = SPLIT_YEAR_RANGE
    if not lo <= config.split_year <= hi:
        raise ConfigError(f"split_year {config.split_year} outside [{lo}, {hi}]")
    if config.threads < 1:
        raise ConfigError("threads must be >= 1")


def require_paths(config: RunConfig, *names: str):
    """Referenced input paths must exist at validation time."""
    for name in names:
        value = getattr(config, name)
        if value is None:
            raise ConfigError(f"config is missing required path: {name}")
        if not os.path.exists(value):
            raise ConfigError(f"{name} path does not exist: {value}")
