"""JSON experiment configuration: embedded defaults, loading, overrides."""

from __future__ import annotations

import copy
import json
from pathlib import Path

from .env import FogConfig
from .harness import ExperimentConfig
from .policies import POLICY_IDS

SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "policies": list(POLICY_IDS),
    "horizon": 3000,
    "reps": 50,
    "seed": 2024,
    "k_list": [5, 10, 15],
    "out_dir": "results",
    "trace": False,
    "figures": True,
    "env": {
        "kind": "fog",
        "k": 5,
        "cpu_ghz": [6.0, 6.0, 5.0, 4.0, 3.5],
        "range_km": 0.4,
        "task": {"q_bits": 1e6, "complexity_cycles_per_bit": 1e3, "output_ratio": 0.2},
        "channel": {"tx_power_dbm": 24.0, "bandwidth_hz": 1e7, "noise_dbm_per_hz": -174.0},
        "adversary": {
            "mode": "switching",
            "epochs": 3,
            "generous_band": [0.4, 0.5],
            "base_band": [0.2, 0.35],
            "period": 1000,
        },
        "l_cap": None,
        "cap_fading_quantile": 0.05,
    },
    "policy_params": {
        "eps": 0.1,
        "dbar_mode": "exclude-target",
        "ix_probability": "post",
        "schedule": "anytime",
        # Exp3.P tuning valid for every confidence level
        # (Bubeck & Cesa-Bianchi 2012, Theorem 3.3)
        "exp3p": {"eta_scale": 0.95, "gamma_scale": 1.05, "beta_scale": 1.0},
    },
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = val
    return out


def default_dict() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def load_dict(path) -> dict:
    """Read a config file and merge it over the defaults."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    schema = raw.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise ConfigError(f"{path}: unsupported schema {schema!r} (expected {SCHEMA_VERSION})")
    return _merge(DEFAULT_CONFIG, raw)


def apply_overrides(d: dict, **overrides) -> dict:
    d = copy.deepcopy(d)
    for key, val in overrides.items():
        if val is not None:
            d[key] = val
    return d


def to_experiment(d: dict) -> ExperimentConfig:
    """Validate a merged config dict and build the experiment config."""
    d = dict(d)
    d.pop("schema", None)
    known = set(DEFAULT_CONFIG) - {"schema"}
    extra = set(d) - known
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    try:
        cfg = ExperimentConfig(**d)
        if cfg.env.get("kind", "fog") == "fog":
            FogConfig.from_dict(cfg.env)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg
