# -*- coding: utf-8 -*-
"""
ZidLab — Configuration module.

Run configuration: defaults, the zidlab.toml project file and JSON
shaping configs. CLI flags override file values, which override defaults.
"""

import json
import logging
import os
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .errors import ConfigError, ValidationError
from .discovery import LOCAL_GRAPHS, WEIGHTINGS
from .shaping import ShapingConfig, canonical_shaping_keys

# ============================================================
# DEFAULT SETTINGS
# ============================================================

DEFAULT_GLOBAL_SETTINGS = {
    "seed": 0,
    "out": "results",
    "format": "csv",
    "state_cap": 200_000,
    "threads": 1,
    "pool": "processes",
}

OUTPUT_FORMATS = ["csv", "json", "svg"]
POOLS = ["processes", "threads"]

DEFAULT_ANALYZE = {
    "trace_episodes": 1_000,
    "trace_horizon": 28,
    "trace_shaping": False,
}

DEFAULT_EXPLORE = {
    "map": "maps/density.map",
    "variants": [0, 1, 2, 3, 4],
    "horizons": [12, 13, 14],
    "step_budget": 200_000,
    "seeds": [0],
}

DEFAULT_SHAPING = {
    "d": 0,
    "gamma": 0.95,
    "strict_paper_sign": False,
    "flush_on_truncation": True,
}

DEFAULT_LEARNING = {
    "map": "maps/laser_corridor.map",
    "delays": [0, 1, 2, 3, 4],
    "baseline": True,
    "seeds": list(range(20)),
    "total_steps": 60_000,
    "epsilon_anneal_steps": 40_000,
    "gamma": 0.95,
    "learning_rate": 0.1,
    "eval_interval": 500,
    "eval_episodes": 1,
    "horizon": 14,
    "crossing_rule": "enter",
}

DEFAULT_DISCOVERY = {
    "map": "maps/doorway.map",
    "agents": [1],
    "total_steps": 100_000,
    "interval": 5,
    "horizon": 100,
    "runs": 1,
    "weighting": "unit",
    "local_graph": "cumulative",
    "tolerance": 1e-8,
    "max_iterations": 10_000,
}

SECTIONS = {
    "output": DEFAULT_GLOBAL_SETTINGS,
    "analyze": DEFAULT_ANALYZE,
    "explore": DEFAULT_EXPLORE,
    "shaping": DEFAULT_SHAPING,
    "learning": DEFAULT_LEARNING,
    "discovery": DEFAULT_DISCOVERY,
}

# ============================================================
# ENVIRONMENT
# ============================================================


def trace_enabled():
    return os.environ.get("ZIDLAB_TRACE") == "1"


def thread_count(default=1):
    """Worker cap from ZIDLAB_THREADS (invalid values fall back to `default`)."""
    raw = os.environ.get("ZIDLAB_THREADS", "")
    try:
        value = int(raw)
    except ValueError:
        return default
    return max(1, value)


# ============================================================
# RUN CONFIG
# ============================================================


def _merge(section, defaults, data):
    unknown = set(data) - set(defaults)
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
    merged = defaults.copy()
    merged.update(data)
    return merged


def default_run_config():
    return {name: defaults.copy() for name, defaults in SECTIONS.items()}


def load_run_config(path=None):
    """Load a zidlab.toml over the defaults; no path means defaults only."""
    config = default_run_config()
    if path is None:
        return config
    path = Path(path)
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None

    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")
    for name, table in data.items():
        if name == "shaping":
            table = _canonical_shaping(table)
        config[name] = _merge(name, SECTIONS[name], table)
    validate_run_config(config)
    return config


def validate_run_config(config):
    out = config["output"]
    if out["format"] not in OUTPUT_FORMATS:
        raise ConfigError(f"format must be one of {', '.join(OUTPUT_FORMATS)}")
    if out["state_cap"] <= 0:
        raise ConfigError("state_cap must be positive")
    if out["pool"] not in POOLS:
        raise ConfigError(f"pool must be one of {', '.join(POOLS)}")
    analyze = config["analyze"]
    if analyze["trace_episodes"] < 0 or analyze["trace_horizon"] <= 0:
        raise ConfigError("trace_episodes must be >= 0 and trace_horizon positive")
    explore = config["explore"]
    if explore["step_budget"] <= 0 or any(h <= 0 for h in explore["horizons"]):
        raise ConfigError("step_budget and horizons must be positive")
    learning = config["learning"]
    if any(d < 0 for d in learning["delays"]):
        raise ConfigError("delays must be >= 0")
    if not learning["seeds"] or not explore["seeds"]:
        raise ConfigError("seed lists must not be empty")
    discovery = config["discovery"]
    if discovery["interval"] <= 0 or discovery["total_steps"] <= 0:
        raise ConfigError("discovery interval and total_steps must be positive")
    if discovery["weighting"] not in WEIGHTINGS:
        raise ConfigError(f"weighting must be one of {', '.join(WEIGHTINGS)}")
    if discovery["local_graph"] not in LOCAL_GRAPHS:
        raise ConfigError(f"local_graph must be one of {', '.join(LOCAL_GRAPHS)}")
    try:
        shaping_from_dict(config["shaping"])
    except ValidationError as e:
        raise ConfigError(f"[shaping] {e}") from None
    return config


# ============================================================
# SHAPING
# ============================================================


def _canonical_shaping(data):
    try:
        return canonical_shaping_keys(data)
    except ValidationError as e:
        raise ConfigError(f"[shaping] {e}") from None


def shaping_from_dict(data):
    merged = _merge("shaping", DEFAULT_SHAPING, _canonical_shaping(data))
    return ShapingConfig.from_dict(merged)


def load_shaping_config(path):
    """Read a JSON wrapper config {d, gamma, strict_paper_sign, flush_on_truncation}."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"shaping config {path} not found") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return shaping_from_dict(data)


def save_shaping_config(config, path):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(config.to_dict(), f, indent=2)


# ============================================================
# LOGGING
# ============================================================


def setup_logging(verbose=False):
    """Route package logs to stderr; stdout carries command results only."""
    level = logging.DEBUG if trace_enabled() else logging.INFO if verbose else logging.WARNING
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[zidlab] %(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("zidlab_pkg")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False
    return root
