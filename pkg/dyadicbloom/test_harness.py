#!/usr/bin/env python3
# file: dyadicbloom/test_harness.py
# Description: Tests for verification suites, experiment runs, CSV/summary output
# and calibration fixtures.
# License: MIT

import csv
import json
from pathlib import Path

import pytest

from dyadicbloom import harness

from dyadicbloom.config import load_config, validate_document
from dyadicbloom.exceptions import ConfigError, FixtureError, RecipeError, SuiteFailure
from dyadicbloom.harness import (
    CSV_SCHEMA,
    RATIO_COLUMNS,
    STANDARD_CORPORA,
    SUITES,
    Check,
    SuiteContext,
    SuiteReport,
    KIND_SUITES,
    calibrate,
    calibrate_suite,
    fixture_entries,
    raise_on_failure,
    read_fixture,
    run_experiment,
    run_suite,
    summarize,
    verify,
    write_csv,
    write_summary,
)

SMALL = {
    "bmo-equivalence": {"depths": [2, 2], "weights": [{"recipe": "RandomBoundedRatio", "rho": 3}]},
    "john-nirenberg": {"depths": [2, 2], "exponents": [2.0, 4.0]},
    "h1-bmo": {"depths": [2, 2]},
    "full-paraproduct": {"depths": [2, 2], "exponents": [2.0, 2.0], "symmetries": ["F1/OUTPUT", "F1/F2"]},
    "bloom": {"depths": [2, 2, 2], "complexity": [1, 0], "block_count": 2},
    "vector-pairing": {"depths": [2, 2], "exponents": [2.0, 1.0], "functions": 2},
    "maximal": {"depths": [2, 2], "exponents": [2.0, 3.0]},
    "fefferman-stein": {"depths": [2, 2], "functions": 2},
    "omega-families": {"depths": [2, 2], "omega": {"strategy": "RandomUnions", "k": 2, "count": 5}},
}


def _document(kind, samples=2, seed=1, **extra):
    return dict(SMALL[kind], kind=kind, samples=samples, seed=seed, **extra)


def test_every_kind_has_ratio_columns_and_a_small_config():
    assert set(RATIO_COLUMNS) == set(SMALL)


@pytest.mark.parametrize("name", ["haar", "weights", "bmo-exact", "commutator-identity"])
def test_exact_suites_pass(name, quiet_settings):
    report = run_suite(name, seed=3, settings=quiet_settings, samples=2)
    assert report.passed, [c.to_json() for c in report.failures]
    assert report.checks


def test_unknown_suite(quiet_settings):
    with pytest.raises(ConfigError):
        run_suite("nope", settings=quiet_settings)
    assert set(SUITES) >= {"haar", "weights", "maximal", "bmo-exact", "bmo-equivalence", "paraproducts",
                           "commutator-identity", "bloom", "vector-pairing"}


def test_report_rendering():
    report = SuiteReport("demo", 0, [Check("a", 0.0, 1.0, True), Check("b", 2.0, 1.0, False, "too large")])
    assert not report.passed
    assert [c.name for c in report.failures] == ["b"]
    data = report.to_json()
    assert data["passed"] is False and data["checks"][1]["detail"] == "too large"
    assert report.table() is not None
    with pytest.raises(SuiteFailure):
        raise_on_failure([report])
    raise_on_failure([SuiteReport("empty", 0)])


@pytest.mark.parametrize("kind", sorted(SMALL))
def test_experiment_rows(kind):
    rows = run_experiment(load_config(_document(kind)), threads=1)
    assert rows
    assert [r["index"] for r in rows] == list(range(len(rows)))
    for row in rows:
        assert row["schema"] == CSV_SCHEMA
        assert row["kind"].split("[")[0] == kind
        for column in RATIO_COLUMNS[kind]:
            assert column in row
        assert row["ainf"] >= 1.0 - 1e-12
    summary = summarize(rows)
    assert summary["rows"] == len(rows)
    assert summary["kind"] == kind


def test_experiment_is_thread_independent():
    document = _document("maximal", samples=4)
    one = run_experiment(document, threads=1)
    four = run_experiment(document, threads=4)
    assert one == four


def test_experiment_seed_changes_rows():
    first = run_experiment(_document("h1-bmo", seed=1))
    second = run_experiment(_document("h1-bmo", seed=2))
    assert [r["ratio"] for r in first] != [r["ratio"] for r in second]


def test_max_ap_filter_gives_up():
    document = _document("maximal", max_ap=1.0, weights=[{"recipe": "RandomBoundedRatio", "rho": 50}])
    with pytest.raises(RecipeError):
        run_experiment(document)


def test_full_paraproduct_groups_by_symmetry():
    rows = run_experiment(_document("full-paraproduct"))
    entries = fixture_entries(rows)
    assert len(entries) == 2
    assert any("[F1/F2]" in key for key in entries)


def test_csv_and_summary_output(tmp_path):
    rows = run_experiment(_document("maximal"))
    path = write_csv(rows, tmp_path / "out" / "rows.csv")
    with path.open(encoding="utf-8", newline="") as f:
        read = list(csv.DictReader(f))
    assert len(read) == len(rows)
    assert read[0]["schema"] == CSV_SCHEMA
    assert float(read[0]["ratio"]) == pytest.approx(rows[0]["ratio"])
    summary_path = write_summary(summarize(rows), tmp_path / "out" / "summary.json")
    summary = json.loads(summary_path.read_text(encoding="utf-8"))
    assert summary["ratios"]["ratio"]["sup"] >= summary["ratios"]["ratio"]["median"]
    assert summary["ratios"]["ratio"]["sup"] >= 1.0


def test_summarize_empty():
    assert summarize([])["rows"] == 0


def test_calibrate_writes_and_refuses_overwrite(tmp_path, quiet_settings):
    out = tmp_path / "maximal.json"
    fixture = calibrate(_document("maximal"), out, settings=quiet_settings)
    assert fixture["suite"] == "maximal"
    assert read_fixture(out)["entries"] == fixture["entries"]
    with pytest.raises(FixtureError):
        calibrate(_document("maximal"), out, settings=quiet_settings)
    calibrate(_document("maximal"), out, force=True, settings=quiet_settings)


def test_read_fixture_errors(tmp_path):
    with pytest.raises(FixtureError):
        read_fixture(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"suite": "maximal"}), encoding="utf-8")
    with pytest.raises(FixtureError):
        read_fixture(bad)


def test_calibrated_check_uses_fixture(quiet_settings):
    document = _document("maximal", seed=5)
    fixtures = quiet_settings.fixtures
    calibrate(document, f"{fixtures}/maximal.json", settings=quiet_settings)
    ctx = SuiteContext("maximal", 5, quiet_settings)
    ctx.calibrated({k: v for k, v in document.items() if k != "seed"})
    assert ctx.report.passed
    assert all(c.name.endswith("(fixture)") for c in ctx.report.checks)


def test_calibrated_check_without_fixture_reseeds(quiet_settings):
    ctx = SuiteContext("maximal", 6, quiet_settings)
    ctx.calibrated({k: v for k, v in _document("maximal").items() if k != "seed"})
    assert ctx.report.checks
    assert all(c.name.endswith("(reseeded)") for c in ctx.report.checks)


def test_verify_single_selector(quiet_settings, monkeypatch):
    calls = []
    monkeypatch.setitem(SUITES, "haar", lambda ctx: calls.append(ctx.suite))
    reports = verify("haar", 0, quiet_settings)
    assert calls == ["haar"] and reports[0].passed


def _unseeded(document):
    return {k: v for k, v in document.items() if k != "seed"}


def test_calibrate_merges_every_kind_of_a_suite(quiet_settings):
    out = Path(quiet_settings.fixtures) / "bmo-equivalence.json"
    kinds = ("john-nirenberg", "bmo-equivalence", "h1-bmo")
    calibrate(_document(kinds[0], seed=4), out, settings=quiet_settings)
    for kind in kinds[1:]:
        calibrate(_document(kind, seed=4), out, settings=quiet_settings, merge=True)
    stored = read_fixture(out)["entries"]
    assert {key.split("|")[0] for key in stored} == set(kinds)
    ctx = SuiteContext("bmo-equivalence", 4, quiet_settings)
    for kind in kinds:
        ctx.calibrated(_unseeded(_document(kind)))
    assert ctx.report.passed
    assert all(c.name.endswith("(fixture)") for c in ctx.report.checks)


def test_calibrate_takes_several_configs(tmp_path, quiet_settings):
    out = tmp_path / "maximal.json"
    fixture = calibrate([_document("maximal"), _document("fefferman-stein")], out, settings=quiet_settings)
    assert {key.split("|")[0] for key in fixture["entries"]} == {"maximal", "fefferman-stein"}


def test_calibrate_refuses_foreign_suites(tmp_path, quiet_settings):
    with pytest.raises(FixtureError):
        calibrate([_document("maximal"), _document("h1-bmo")], tmp_path / "mixed.json", settings=quiet_settings)
    out = tmp_path / "maximal.json"
    calibrate(_document("maximal"), out, settings=quiet_settings)
    with pytest.raises(FixtureError):
        calibrate(_document("h1-bmo"), out, settings=quiet_settings, merge=True)
    with pytest.raises(FixtureError):
        calibrate([], tmp_path / "empty.json", settings=quiet_settings)


def test_calibrate_suite_writes_one_fixture_per_suite(tmp_path, quiet_settings, monkeypatch):
    monkeypatch.setitem(STANDARD_CORPORA, "maximal", {"maximal": _unseeded(_document("maximal"))})
    [fixture] = calibrate_suite("maximal", tmp_path, settings=quiet_settings)
    assert fixture["suite"] == "maximal"
    assert read_fixture(tmp_path / "maximal.json")["entries"] == fixture["entries"]
    with pytest.raises(FixtureError):
        calibrate_suite("maximal", tmp_path, settings=quiet_settings)
    with pytest.raises(ConfigError):
        calibrate_suite("haar", tmp_path, settings=quiet_settings)


def test_standard_corpora_are_valid_documents():
    for suite_name, documents in STANDARD_CORPORA.items():
        assert suite_name in SUITES
        for document in documents.values():
            validate_document(dict(document, seed=0))
            assert KIND_SUITES[document["kind"]] == suite_name


def test_shipped_configs_match_standard_corpora():
    root = Path(__file__).resolve().parent.parent / "configs"
    if not root.is_dir():
        pytest.skip("configs/ is not shipped with this installation")
    for suite_name, documents in STANDARD_CORPORA.items():
        for name, document in documents.items():
            shipped = json.loads((root / suite_name / f"{name}.json").read_text(encoding="utf-8"))
            assert _unseeded(shipped) == document, f"{suite_name}/{name}"


def test_calibrated_corpus_caps_counts(quiet_settings, monkeypatch):
    documents = {"maximal": dict(_unseeded(_document("maximal")), samples=50, weights_per_recipe=20)}
    monkeypatch.setitem(STANDARD_CORPORA, "maximal", documents)
    seen = []
    real = harness.run_experiment

    def recording(config, threads=None):
        seen.append((config.samples, config.weights_per_recipe))
        return real(config, threads)

    monkeypatch.setattr(harness, "run_experiment", recording)
    ctx = SuiteContext("maximal", 2, quiet_settings, samples=1)
    ctx.calibrated_corpus()
    assert seen and set(seen) == {(1, 1)}
    assert ctx.report.checks


def test_missing_ratio_on_second_seed_fails(quiet_settings, monkeypatch):
    results = iter([{"bloom|RandomBoundedRatio(3)|(2, 2, 2)|p=2": 1.5}, {}])
    monkeypatch.setattr(harness, "run_experiment", lambda config, threads=None: [])
    monkeypatch.setattr(harness, "fixture_entries", lambda rows: next(results))
    ctx = SuiteContext("bloom", 0, quiet_settings)
    ctx.calibrated(_unseeded(_document("bloom")))
    [check] = ctx.report.checks
    assert not check.passed
    assert check.detail == "no ratio on the second seed"


def test_calibration_without_any_ratio_fails(quiet_settings, monkeypatch):
    monkeypatch.setattr(harness, "run_experiment", lambda config, threads=None: [])
    ctx = SuiteContext("bloom", 0, quiet_settings)
    ctx.calibrated(_unseeded(_document("bloom")))
    [check] = ctx.report.checks
    assert not check.passed
    assert check.name == "bloom ratios"


def test_calibrated_suite_checks_every_corpus_kind(quiet_settings):
    report = run_suite("maximal", seed=1, settings=quiet_settings, samples=1)
    kinds = {c.name.split("|")[0] for c in report.checks if c.name.endswith(("(fixture)", "(reseeded)"))}
    assert kinds == {"maximal", "fefferman-stein"}
