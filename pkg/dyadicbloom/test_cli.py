#!/usr/bin/env python3
# file: dyadicbloom/test_cli.py
# Description: Tests for the command line entry point and its exit codes.
# License: MIT

import csv
import json

import pytest

from dyadicbloom import harness
from dyadicbloom.cli import EXIT_CONFIG, EXIT_FAILURE, EXIT_OK, build_parser, main
from dyadicbloom.harness import Check


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "maximal.json"
    path.write_text(json.dumps({"kind": "maximal", "depths": [2, 2], "seed": 4, "samples": 2}), encoding="utf-8")
    return path


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.setenv("DYADICBLOOM_FIXTURES", str(tmp_path / "fixtures"))
    monkeypatch.setenv("DYADICBLOOM_THREADS", "1")


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_verify_writes_json(tmp_path):
    out = tmp_path / "report.json"
    assert main(["verify", "haar", "--samples", "1", "--json", str(out)]) == EXIT_OK
    reports = json.loads(out.read_text(encoding="utf-8"))
    assert reports[0]["suite"] == "haar" and reports[0]["passed"]


def test_verify_unknown_suite():
    assert main(["verify", "everything"]) == EXIT_CONFIG


def test_verify_failure_exit_code(monkeypatch):
    def failing(ctx):
        ctx.report.checks.append(Check("always", 1.0, 0.0, False))
    monkeypatch.setitem(harness.SUITES, "haar", failing)
    assert main(["verify", "haar"]) == EXIT_FAILURE


def test_experiment_outputs(tmp_path, config_file):
    out = tmp_path / "rows.csv"
    assert main(["experiment", str(config_file), "-o", str(out)]) == EXIT_OK
    with out.open(encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 2
    summary = json.loads((tmp_path / "rows.csv.summary.json").read_text(encoding="utf-8"))
    assert summary["config"]["kind"] == "maximal"


def test_experiment_bad_config(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"kind": "maximal", "depths": [2, 2]}), encoding="utf-8")
    assert main(["experiment", str(path), "-o", str(tmp_path / "rows.csv")]) == EXIT_CONFIG


def test_calibrate_refuses_overwrite(tmp_path, config_file):
    out = tmp_path / "fixture.json"
    assert main(["calibrate", str(config_file), "-o", str(out)]) == EXIT_OK
    assert json.loads(out.read_text(encoding="utf-8"))["suite"] == "maximal"
    assert main(["calibrate", str(config_file), "-o", str(out)]) == EXIT_CONFIG
    assert main(["calibrate", str(config_file), "-o", str(out), "--force"]) == EXIT_OK


def test_calibrate_merge_adds_kinds(tmp_path, config_file):
    other = tmp_path / "fefferman-stein.json"
    other.write_text(json.dumps({"kind": "fefferman-stein", "depths": [2, 2], "seed": 4, "samples": 2,
                                 "functions": 2}), encoding="utf-8")
    out = tmp_path / "maximal-fixture.json"
    assert main(["calibrate", str(config_file), "-o", str(out)]) == EXIT_OK
    assert main(["calibrate", str(other), "-o", str(out), "--merge"]) == EXIT_OK
    entries = json.loads(out.read_text(encoding="utf-8"))["entries"]
    assert {key.split("|")[0] for key in entries} == {"maximal", "fefferman-stein"}


def test_calibrate_standard_suite(tmp_path, monkeypatch):
    small = {"kind": "vector-pairing", "depths": [2, 2], "samples": 2, "exponents": [2.0, 1.0], "functions": 1}
    monkeypatch.setitem(harness.STANDARD_CORPORA, "vector-pairing", {"vector-pairing": small})
    out = tmp_path / "fixtures"
    assert main(["calibrate", "--suite", "vector-pairing", "-o", str(out)]) == EXIT_OK
    assert json.loads((out / "vector-pairing.json").read_text(encoding="utf-8"))["suite"] == "vector-pairing"
    assert main(["calibrate", "--suite", "nope", "-o", str(out)]) == EXIT_CONFIG


def test_calibrate_needs_configs_or_suite(tmp_path, config_file):
    out = tmp_path / "fixture.json"
    assert main(["calibrate", "-o", str(out)]) == EXIT_CONFIG
    assert main(["calibrate", str(config_file), "--suite", "maximal", "-o", str(out)]) == EXIT_CONFIG
