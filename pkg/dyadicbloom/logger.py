#!/usr/bin/env python3
# file: dyadicbloom/logger.py
# Description: Rich console logging for verification runs: custom levels,
# per-level icons, rotating file output and kernel timing statistics.
# License: MIT

import logging
import logging.handlers
import os
import shutil
import sys
import threading
import time
import traceback
from datetime import datetime
from functools import wraps
from typing import Dict, Optional, Union

try:
    from rich.console import Console
    from rich.logging import RichHandler
    from rich.table import Table
    from rich.text import Text
    console = Console(stderr=True)
    RICH_AVAILABLE = True
except ImportError:
    RICH_AVAILABLE = False
    console = None
    RichHandler = logging.StreamHandler

__all__ = [
    "NOTICE_LEVEL",
    "SUCCESS_LEVEL",
    "Icon",
    "IconFilter",
    "LevelBasedFileFormatter",
    "DyadicRichHandler",
    "PerformanceTracker",
    "performance_monitor",
    "performance_stats",
    "timings_table",
    "print_traceback",
    "print_exception",
    "setup_logging",
]

SUCCESS_LEVEL = 22  # a check passed
NOTICE_LEVEL = 25   # run milestones: suite start, fixture written

logging.addLevelName(SUCCESS_LEVEL, "SUCCESS")
logging.addLevelName(NOTICE_LEVEL, "NOTICE")

CURRENT_HANDLERS = []


def _env_flag(name: str, default: str = "0") -> bool:
    return str(os.getenv(name, default)).lower() in ["1", "true", "yes"]


def _add_custom_level_method(level_name: str, level_value: int):
    def log_method(self, message, *args, **kwargs):
        if self.isEnabledFor(level_value):
            self._log(level_value, message, args, **kwargs)
    setattr(logging.Logger, level_name.lower(), log_method)


_add_custom_level_method("SUCCESS", SUCCESS_LEVEL)
_add_custom_level_method("NOTICE", NOTICE_LEVEL)


# ==================== Performance ====================

class PerformanceTracker:
    """Track wall-clock time of the heavy numerical kernels."""

    def __init__(self):
        self._metrics = {}
        self._lock = threading.Lock()

    def record(self, operation: str, duration: float):
        """Record one timing sample for ``operation``."""
        with self._lock:
            self._metrics.setdefault(operation, []).append(duration)

    def get_stats(self) -> Dict[str, Dict[str, float]]:
        """Return count/avg/min/max/total seconds per operation."""
        with self._lock:
            stats = {}
            for operation, times in self._metrics.items():
                if times:
                    stats[operation] = {
                        'count': len(times),
                        'avg': sum(times) / len(times),
                        'min': min(times),
                        'max': max(times),
                        'total': sum(times),
                    }
            return stats

    def reset(self):
        with self._lock:
            self._metrics.clear()


_performance = PerformanceTracker()


def performance_monitor(func):
    """Decorator recording the duration of every call in the global tracker."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            _performance.record(func.__qualname__, time.perf_counter() - start_time)
    return wrapper


def performance_stats() -> Dict[str, Dict[str, float]]:
    """Snapshot of the global timing statistics."""
    return _performance.get_stats()


def timings_table(stats: Optional[Dict[str, Dict[str, float]]] = None):
    """Render timing statistics as a rich table (plain text without rich)."""
    stats = performance_stats() if stats is None else stats
    rows = sorted(stats.items(), key=lambda item: -item[1]['total'])
    if not RICH_AVAILABLE:
        return "\n".join(
            f"{name:40s} {s['count']:6d} {s['avg']:.6f} {s['max']:.6f} {s['total']:.3f}"
            for name, s in rows
        )
    table = Table(title="kernel timings", show_lines=False)
    table.add_column("operation", style="cyan")
    table.add_column("calls", justify="right")
    table.add_column("avg [s]", justify="right")
    table.add_column("max [s]", justify="right")
    table.add_column("total [s]", justify="right", style="bold")
    for name, s in rows:
        table.add_row(name, str(s['count']), f"{s['avg']:.6f}", f"{s['max']:.6f}", f"{s['total']:.3f}")
    return table


# ==================== Icon Support ====================

class Icon:
    """Icon mappings for log levels."""
    debug = "🪲"
    info = "🔔"
    success = "✅"
    notice = "📢"
    warning = "⛔"
    error = "❌"
    critical = "💥"


class IconFilter(logging.Filter):
    """Attach ``record.icon`` according to the record level."""

    LEVEL_ICON_MAP = {
        logging.DEBUG: Icon.debug,
        logging.INFO: Icon.info,
        SUCCESS_LEVEL: Icon.success,
        NOTICE_LEVEL: Icon.notice,
        logging.WARNING: Icon.warning,
        logging.ERROR: Icon.error,
        logging.CRITICAL: Icon.critical,
    }

    def filter(self, record):
        record.icon = self.LEVEL_ICON_MAP.get(record.levelno, "")
        return True


class LevelBasedFileFormatter(logging.Formatter):
    """Plain file formatter: DEBUG records get thread and function detail."""

    info_format = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
    debug_format = "%(asctime)s - %(levelname)s - %(name)s - %(threadName)s - %(funcName)s - %(message)s (%(filename)s:%(lineno)d)"

    def __init__(self, icon_first: bool = True):
        super().__init__()
        if icon_first:
            self.info_formatter = logging.Formatter("%(icon)s " + self.info_format)
            self.debug_formatter = logging.Formatter("%(icon)s " + self.debug_format)
        else:
            self.info_formatter = logging.Formatter(self.info_format)
            self.debug_formatter = logging.Formatter(self.debug_format)

    def format(self, record):
        if not hasattr(record, "icon"):
            record.icon = ""
        if record.levelno <= logging.DEBUG:
            return self.debug_formatter.format(record)
        return self.info_formatter.format(record)


class DyadicRichHandler(RichHandler):
    """RichHandler that prefixes messages with the level icon and styles the
    custom levels."""

    LEVEL_STYLES = {
        SUCCESS_LEVEL: "bold #00FF00",
        NOTICE_LEVEL: "bold #00FFFF",
    }

    def __init__(self, show_icon: bool = True, **kwargs):
        super().__init__(**kwargs)
        self.show_icon = show_icon

    def get_level_text(self, record):
        style = self.LEVEL_STYLES.get(record.levelno)
        if style is None:
            return super().get_level_text(record)
        return Text.styled(record.levelname.ljust(8), style)

    def render_message(self, record, message):
        icon = getattr(record, "icon", "") if self.show_icon else ""
        if icon:
            message = f"{icon} {message}"
        return super().render_message(record, message)


# ==================== Tracebacks ====================

def print_traceback(exc_info, padding_left: int = 4, show_datetime: bool = True, out=None):
    """Print an exception as a compact coloured block.

    Args:
        exc_info: ``(type, value, traceback)`` triple as from ``sys.exc_info()``.
        padding_left: Indent of the traceback body.
        show_datetime: Prefix the header with a timestamp.
        out: Rich console to print to; defaults to the module console.
    """
    exc_type, exc_value, tb_details = exc_info
    tb_string = tb_details if isinstance(tb_details, str) else "".join(traceback.format_tb(tb_details))
    name = getattr(exc_type, "__name__", str(exc_type))
    timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S.%f")[:-3] + " - " if show_datetime else ""

    out = out or console
    if out is None:
        sys.stderr.write(f"{timestamp}{name} : {exc_value}\n")
        for line in tb_string.splitlines():
            sys.stderr.write(f"{' ' * padding_left}{line}\n")
        return

    out.print(Text(timestamp) + Text(name, style="white on red") + Text(" : ") + Text(str(exc_value), style="black on #FFFF00"))
    if tb_string:
        out.print(Text("\n".join(' ' * padding_left + line for line in tb_string.splitlines()), style="#00FFFF"))
    out.print("-" * shutil.get_terminal_size()[0])


def print_exception(e: Optional[BaseException] = None, full: Optional[bool] = None, out=None):
    """Print ``e`` (or the exception being handled).

    Only the header line is shown unless ``full`` is set or the ``TRACEBACK``
    environment variable is truthy.
    """
    exc_info = sys.exc_info() if e is None else (type(e), e, e.__traceback__)
    if full is None:
        full = _env_flag("TRACEBACK")
    if not full:
        exc_info = (exc_info[0], exc_info[1], "")
    print_traceback(exc_info, out=out)


# ==================== Setup ====================

def _is_logging_disabled() -> bool:
    """Check environment variables to see if logging should be disabled."""
    no_logging = _env_flag('NO_LOGGING')
    logging_disabled = str(os.getenv('LOGGING', '1')).lower() in ['0', 'false', 'no']
    return no_logging or logging_disabled


def _setup_logging_state(logger: logging.Logger, enable: bool):
    """Silence or restore the handlers of ``logger``."""
    global CURRENT_HANDLERS

    if not enable:
        if not CURRENT_HANDLERS:
            CURRENT_HANDLERS = logger.handlers.copy()
        logger.setLevel(logging.CRITICAL + 99999)
        logger.handlers = []
    elif CURRENT_HANDLERS and not logger.handlers:
        logger.handlers = CURRENT_HANDLERS.copy()


def setup_logging(
    name: Optional[str] = "dyadicbloom",
    level: Union[int, str] = "INFO",
    show_icon: bool = True,
    icon_first: bool = True,
    show_path: bool = False,
    show_time: bool = True,
    log_file: bool = False,
    log_file_name: Optional[str] = None,
    log_file_level: Union[int, str] = logging.DEBUG,
    max_bytes: int = 10485760,
    backup_count: int = 5,
    console: Optional[object] = None,
) -> logging.Logger:
    """Configure the package logger with a rich console handler.

    Args:
        name: Logger name; ``None`` configures the root logger.
        level: Minimum level for the console handler.
        show_icon: Prefix console messages with the level icon.
        icon_first: Put the icon first in file records.
        show_path: Show the emitting source location on the console.
        show_time: Show timestamps on the console.
        log_file: Also write to a rotating file.
        log_file_name: File path; defaults to ``dyadicbloom.log``.
        log_file_level: Minimum level for the file handler.
        max_bytes: Rotation size of the file handler.
        backup_count: Rotated files kept.
        console: Rich console to render into (tests pass a recording console).

    Returns:
        logging.Logger: The configured logger.
    """
    if isinstance(level, str):
        level = getattr(logging, level.upper(), None) or logging.getLevelName(level.upper())
    if isinstance(log_file_level, str):
        log_file_level = getattr(logging, log_file_level.upper(), logging.DEBUG)

    logger = logging.getLogger(name)
    logger.setLevel(min(level, log_file_level) if log_file else level)
    logger.handlers.clear()

    icon_filter = IconFilter()

    if RICH_AVAILABLE:
        handler = DyadicRichHandler(
            show_icon=show_icon,
            level=level,
            console=console or globals()["console"],
            show_time=show_time,
            show_path=show_path,
            markup=False,
            rich_tracebacks=True,
        )
    else:
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(level)
        handler.setFormatter(LevelBasedFileFormatter(icon_first=show_icon))
    handler.addFilter(icon_filter)
    logger.addHandler(handler)

    if log_file:
        file_handler = logging.handlers.RotatingFileHandler(
            log_file_name or "dyadicbloom.log",
            encoding="utf-8",
            maxBytes=max_bytes,
            backupCount=backup_count,
        )
        file_handler.setLevel(log_file_level)
        file_handler.addFilter(icon_filter)
        file_handler.setFormatter(LevelBasedFileFormatter(icon_first=icon_first))
        logger.addHandler(file_handler)

    if name:
        logger.propagate = False

    if _is_logging_disabled():
        _setup_logging_state(logger, False)

    if _env_flag('DYADICBLOOM_DEBUG'):
        print(f"LOGGER.HANDLERS: {logger.handlers}")

    return logger
