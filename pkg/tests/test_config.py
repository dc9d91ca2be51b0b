# -*- coding: utf-8 -*-
import logging
from pathlib import Path

import pytest

from zidlab_pkg.config import (
    default_run_config, load_run_config, validate_run_config, load_shaping_config,
    save_shaping_config, shaping_from_dict, thread_count, setup_logging,
)
from zidlab_pkg.errors import ConfigError
from zidlab_pkg.shaping import ShapingConfig


def test_defaults():
    config = load_run_config()
    assert config == default_run_config()
    assert config["output"]["seed"] == 0
    assert config["learning"]["delays"] == [0, 1, 2, 3, 4]
    assert config["discovery"]["weighting"] == "unit"


def test_template_matches_defaults():
    template = Path(__file__).resolve().parent.parent / "zidlab-template.toml"
    assert load_run_config(template) == default_run_config()


def test_defaults_are_copies():
    config = default_run_config()
    config["output"]["seed"] = 9
    assert default_run_config()["output"]["seed"] == 0


def test_toml_overrides(tmp_path):
    path = tmp_path / "zidlab.toml"
    path.write_text('[output]\nseed = 4\nformat = "json"\n\n[shaping]\nd = 2\n')
    config = load_run_config(path)
    assert config["output"]["seed"] == 4
    assert config["output"]["format"] == "json"
    assert config["output"]["out"] == "results"
    assert config["shaping"]["d"] == 2


@pytest.mark.parametrize("text", [
    "[plots]\nsize = 3\n",
    "[output]\ncolour = true\n",
    '[output]\nformat = "xml"\n',
    "[shaping]\nd = -1\n",
    '[output]\npool = "fibers"\n',
    '[discovery]\nlocal_graph = "sliding"\n',
    "[analyze]\ntrace_episodes = -1\n",
    "[output\n",
])
def test_bad_toml(tmp_path, text):
    path = tmp_path / "zidlab.toml"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_toml_sign_alias(tmp_path):
    path = tmp_path / "zidlab.toml"
    path.write_text("[shaping]\nreverse_shaping_sign = true\n")
    config = load_run_config(path)
    assert config["shaping"]["strict_paper_sign"] is True
    assert "reverse_shaping_sign" not in config["shaping"]
    assert shaping_from_dict({"reverse_shaping_sign": True}).strict_paper_sign
    path.write_text("[shaping]\nreverse_shaping_sign = true\nstrict_paper_sign = true\n")
    with pytest.raises(ConfigError):
        load_run_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "nope.toml")


def test_validate_rejects_empty_seeds():
    config = default_run_config()
    config["learning"]["seeds"] = []
    with pytest.raises(ConfigError):
        validate_run_config(config)


def test_shaping_json_round_trip(tmp_path):
    path = tmp_path / "shaping.json"
    config = ShapingConfig(d=3, gamma=0.9, strict_paper_sign=True)
    save_shaping_config(config, path)
    assert load_shaping_config(path) == config
    assert shaping_from_dict({}) == ShapingConfig()
    with pytest.raises(ConfigError):
        shaping_from_dict({"lag": 1})


def test_thread_count(monkeypatch):
    monkeypatch.delenv("ZIDLAB_THREADS", raising=False)
    assert thread_count(2) == 2
    monkeypatch.setenv("ZIDLAB_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("ZIDLAB_THREADS", "many")
    assert thread_count() == 1


def test_setup_logging(monkeypatch):
    monkeypatch.delenv("ZIDLAB_TRACE", raising=False)
    assert setup_logging(False).level == logging.WARNING
    assert setup_logging(True).level == logging.INFO
    monkeypatch.setenv("ZIDLAB_TRACE", "1")
    logger = setup_logging(False)
    assert logger.level == logging.DEBUG
    assert len(logger.handlers) == 1
