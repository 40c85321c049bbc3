#!/usr/bin/env python3
# file: dyadicbloom/cli.py
# Description: Command line entry point: verify, experiment and calibrate.
# License: MIT

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .config import get_settings, load_config
from .exceptions import ConfigError, DyadicError, FixtureError, SuiteFailure
from .harness import (
    SUITES,
    calibrate,
    calibrate_suite,
    raise_on_failure,
    run_experiment,
    summarize,
    verify,
    write_csv,
    write_summary,
)
from .logger import console, print_exception, setup_logging, timings_table

logger = logging.getLogger("dyadicbloom")

__all__ = ["build_parser", "main"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadicbloom",
        description="Numerical verification of dyadic multi-parameter BMO, paraproduct and commutator estimates.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for DEBUG logging")
    parser.add_argument("--log-file", help="also write DEBUG logs to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("suite", help=f"one of {', '.join(SUITES)} or 'all'")
    v.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    v.add_argument("--samples", type=int, help="cap on per-check sample counts")
    v.add_argument("--json", dest="json_out", help="write the JSON report here ('-' for stdout)")
    v.add_argument("--timings", action="store_true", help="print kernel timing statistics")

    e = sub.add_parser("experiment", help="run an experiment config")
    e.add_argument("config", help="experiment config (JSON)")
    e.add_argument("-o", "--output", required=True, help="CSV output path")
    e.add_argument("--summary", help="summary JSON path (default: <output>.summary.json)")
    e.add_argument("--threads", type=int, help="worker threads (default DYADICBLOOM_THREADS)")

    c = sub.add_parser("calibrate", help="record a calibration fixture")
    c.add_argument("configs", nargs="*", help="experiment configs (JSON) of one suite")
    c.add_argument("--suite", help="calibrate the standard corpus of this suite (or 'all') instead of configs")
    c.add_argument("-o", "--output", required=True, help="fixture path (a directory with --suite)")
    c.add_argument("--seed", type=int, default=0, help="seed for --suite corpora (default 0)")
    c.add_argument("--force", action="store_true", help="overwrite an existing fixture")
    c.add_argument("--merge", action="store_true", help="add entries to an existing fixture of the same suite")
    c.add_argument("--threads", type=int, help="worker threads (default DYADICBLOOM_THREADS)")
    return parser


def _verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise ConfigError(f"unknown suite {args.suite!r}; expected one of {', '.join(SUITES)} or 'all'")
    reports = verify(args.suite, args.seed, get_settings(), args.samples)
    for report in reports:
        console.print(report.table())
    if args.json_out:
        document = json.dumps([r.to_json() for r in reports], indent=2)
        if args.json_out == "-":
            print(document)
        else:
            Path(args.json_out).write_text(document + "\n", encoding="utf-8")
    if args.timings:
        console.print(timings_table())
    raise_on_failure(reports)
    return EXIT_OK


def _experiment(args) -> int:
    config = load_config(args.config)
    rows = run_experiment(config, args.threads)
    path = write_csv(rows, args.output)
    summary_path = args.summary or f"{args.output}.summary.json"
    summary = summarize(rows)
    summary["config"] = config.to_dict()
    write_summary(summary, summary_path)
    logger.notice("%d rows written to %s, summary in %s", len(rows), path, summary_path)
    return EXIT_OK


def _calibrate(args) -> int:
    if args.suite:
        if args.configs:
            raise ConfigError("pass either config files or --suite, not both")
        fixtures = calibrate_suite(args.suite, args.output, args.force, args.seed, args.threads)
    elif args.configs:
        fixtures = [calibrate(args.configs, args.output, args.force, args.threads, merge=args.merge)]
    else:
        raise ConfigError("nothing to calibrate: give config files or --suite")
    for fixture in fixtures:
        logger.success("%d entries recorded for suite %s", len(fixture["entries"]), fixture["suite"])
    return EXIT_OK


COMMANDS = {"verify": _verify, "experiment": _experiment, "calibrate": _calibrate}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(
        "dyadicbloom",
        level="DEBUG" if args.verbose else "INFO",
        show_path=args.verbose > 1,
        log_file=bool(args.log_file),
        log_file_name=args.log_file,
    )
    try:
        return COMMANDS[args.command](args)
    except SuiteFailure as e:
        logger.error(str(e))
        return EXIT_FAILURE
    except (ConfigError, FixtureError) as e:
        print_exception(e)
        return EXIT_CONFIG
    except DyadicError as e:
        print_exception(e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
