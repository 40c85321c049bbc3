#!/usr/bin/env python3
# file: dyadicbloom/test_logger.py
# Description: Tests for logging setup, custom levels, icons and timing statistics.
# License: MIT

import io
import logging

import pytest
from rich.console import Console

from dyadicbloom.exceptions import GridError
from dyadicbloom.logger import (
    NOTICE_LEVEL,
    SUCCESS_LEVEL,
    IconFilter,
    Icon,
    LevelBasedFileFormatter,
    PerformanceTracker,
    performance_monitor,
    performance_stats,
    print_exception,
    setup_logging,
    timings_table,
)


@pytest.fixture
def recording():
    return Console(file=io.StringIO(), force_terminal=False, width=200)


def test_custom_levels_registered():
    assert logging.getLevelName(SUCCESS_LEVEL) == "SUCCESS"
    assert logging.getLevelName(NOTICE_LEVEL) == "NOTICE"
    assert hasattr(logging.getLogger("dyadicbloom.any"), "notice")


def test_setup_logging_renders_to_console(recording, monkeypatch):
    monkeypatch.delenv("NO_LOGGING", raising=False)
    monkeypatch.delenv("LOGGING", raising=False)
    logger = setup_logging("dyadicbloom.test.console", level="INFO", console=recording, show_time=False)
    logger.notice("suite %s started", "haar")
    logger.success("all checks passed")
    logger.debug("hidden")
    text = recording.file.getvalue()
    assert "suite haar started" in text
    assert Icon.notice in text
    assert "all checks passed" in text
    assert "hidden" not in text
    assert logger.propagate is False


def test_setup_logging_writes_file(tmp_path, recording, monkeypatch):
    monkeypatch.delenv("NO_LOGGING", raising=False)
    monkeypatch.delenv("LOGGING", raising=False)
    path = tmp_path / "run.log"
    logger = setup_logging("dyadicbloom.test.file", level="WARNING", console=recording,
                           log_file=True, log_file_name=str(path))
    logger.debug("kernel detail")
    logger.warning("ratio above fixture")
    for handler in logger.handlers:
        handler.flush()
    content = path.read_text(encoding="utf-8")
    assert "kernel detail" in content
    assert "ratio above fixture" in content
    assert "kernel detail" not in recording.file.getvalue()


def test_logging_can_be_disabled(recording, monkeypatch):
    monkeypatch.setenv("NO_LOGGING", "1")
    logger = setup_logging("dyadicbloom.test.off", console=recording)
    logger.error("not shown")
    assert recording.file.getvalue() == ""


def test_file_formatter_levels():
    formatter = LevelBasedFileFormatter(icon_first=True)
    record = logging.LogRecord("x", logging.DEBUG, __file__, 10, "detail", None, None)
    IconFilter().filter(record)
    assert formatter.format(record).startswith(Icon.debug)
    assert "test_logger.py" in formatter.format(record)
    info = logging.LogRecord("x", logging.INFO, __file__, 10, "plain", None, None)
    assert "test_logger.py" not in LevelBasedFileFormatter(icon_first=False).format(info)


def test_performance_tracker_stats():
    tracker = PerformanceTracker()
    tracker.record("kernel", 0.5)
    tracker.record("kernel", 1.5)
    stats = tracker.get_stats()["kernel"]
    assert stats["count"] == 2
    assert stats["avg"] == pytest.approx(1.0)
    assert stats["max"] == 1.5
    tracker.reset()
    assert tracker.get_stats() == {}


def test_performance_monitor_records_calls():
    @performance_monitor
    def square(x):
        return x * x

    before = performance_stats().get(square.__qualname__, {}).get("count", 0)
    assert square(3) == 9
    assert performance_stats()[square.__qualname__]["count"] == before + 1
    assert timings_table() is not None


def test_print_exception_header_only(recording, monkeypatch):
    monkeypatch.delenv("TRACEBACK", raising=False)
    try:
        raise GridError("depth must be in [1, 12]")
    except GridError as e:
        print_exception(e, out=recording)
    text = recording.file.getvalue()
    assert "GridError" in text
    assert "depth must be in [1, 12]" in text
    assert "raise GridError" not in text
