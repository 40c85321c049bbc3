#!/usr/bin/env python3
# file: dyadicbloom/test_config.py
# Description: Tests for environment settings, experiment config validation and seeding.
# License: MIT

import json

import pytest

from dyadicbloom.config import (
    EXPERIMENT_KINDS,
    ExperimentConfig,
    Settings,
    load_config,
    run_indexed,
    split_seed,
    validate_document,
)
from dyadicbloom.exceptions import ConfigError, GridError
from dyadicbloom.lattice import MAX_DEPTH, GridSpec


def test_settings_defaults(monkeypatch):
    for name in ("DYADICBLOOM_THREADS", "DYADICBLOOM_TOLERANCE", "DYADICBLOOM_MULTIPLIER", "DYADICBLOOM_FIXTURES"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings.from_env()
    assert settings == Settings(threads=1, tolerance=1e-10, multiplier=2.0, fixtures="fixtures/")


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("DYADICBLOOM_THREADS", "4")
    monkeypatch.setenv("DYADICBLOOM_TOLERANCE", "1e-8")
    monkeypatch.setenv("DYADICBLOOM_MULTIPLIER", "3")
    monkeypatch.setenv("DYADICBLOOM_FIXTURES", "/tmp/fx")
    settings = Settings.from_env()
    assert (settings.threads, settings.tolerance, settings.multiplier, settings.fixtures) == (4, 1e-8, 3.0, "/tmp/fx")


@pytest.mark.parametrize("value", ["zero", "0", "-2"])
def test_settings_reject_bad_threads(monkeypatch, value):
    monkeypatch.setenv("DYADICBLOOM_THREADS", value)
    with pytest.raises(ConfigError):
        Settings.from_env()


def test_minimal_document_gets_defaults():
    config = load_config({"kind": "maximal", "depths": [3, 3], "seed": 1})
    assert config.depths == (3, 3)
    assert config.samples == 50
    assert config.exponents == (2.0,)
    assert config.omega == {"strategy": "AllRectangles"}
    assert ExperimentConfig.from_dict(config.to_dict()) == config


@pytest.mark.parametrize("document, pointer", [
    ({"kind": "maximal", "depths": [3, 3]}, ""),
    ({"kind": "nope", "depths": [3], "seed": 0}, "/kind"),
    ({"kind": "maximal", "depths": [3, 11], "seed": 0}, "/depths/1"),
    ({"kind": "maximal", "depths": [3], "seed": 0, "extra": 1}, ""),
    ({"kind": "maximal", "depths": [3], "seed": 0, "weights": [{"recipe": "RandomBoundedRatio", "rho": 500}]},
     "/weights/0/rho"),
    ({"kind": "maximal", "depths": [3], "seed": 0, "omega": {"strategy": "Everything"}}, "/omega/strategy"),
])
def test_schema_errors_carry_pointers(document, pointer):
    with pytest.raises(ConfigError) as info:
        validate_document(document)
    assert info.value.pointer == pointer


@pytest.mark.parametrize("document", [
    {"kind": "bloom", "depths": [3, 3], "seed": 0},
    {"kind": "vector-pairing", "depths": [3, 3, 3], "seed": 0},
    {"kind": "full-paraproduct", "depths": [3, 3], "seed": 0, "exponents": [2.0]},
])
def test_kind_specific_depth_rules(document):
    with pytest.raises(ConfigError):
        load_config(document)


def test_every_kind_is_accepted():
    for kind in EXPERIMENT_KINDS:
        depths = {"bloom": [2, 2, 2], "full-paraproduct": [2, 2], "vector-pairing": [2, 2]}.get(kind, [2, 2])
        exponents = [2.0, 2.0] if kind == "full-paraproduct" else [2.0]
        assert load_config({"kind": kind, "depths": depths, "seed": 0, "exponents": exponents}).kind == kind


def test_load_config_from_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"kind": "h1-bmo", "depths": [2, 2], "seed": 3}), encoding="utf-8")
    assert load_config(path).seed == 3
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(broken)


def test_split_seed_is_deterministic():
    assert split_seed(7, 3) == split_seed(7, 3)
    assert split_seed(7, 3) != split_seed(7, 4)
    assert split_seed(7, 3) != split_seed(8, 3)
    assert 0 <= split_seed(0, 0) < 2 ** 64


@pytest.mark.parametrize("threads", [1, 4])
def test_run_indexed_preserves_order(threads):
    assert run_indexed(lambda i: i * i, 20, threads) == [i * i for i in range(20)]


def test_schema_depth_cap_matches_grid_spec():
    validate_document({"kind": "maximal", "depths": [MAX_DEPTH], "seed": 0})
    assert GridSpec((MAX_DEPTH,)).depths == (MAX_DEPTH,)
    with pytest.raises(ConfigError) as info:
        validate_document({"kind": "maximal", "depths": [MAX_DEPTH + 1], "seed": 0})
    assert info.value.pointer == "/depths/0"
    with pytest.raises(GridError):
        GridSpec((MAX_DEPTH + 1,))
