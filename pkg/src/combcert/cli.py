"""Command-line entry point.

    combcert verify [--suite combs|hard|net|all] [--config FILE] [--seed N]
                    [--out DIR] [--method auto|exact|weingarten|mc]
                    [--samples N] [--strict] [--jobs K] [--embed-matrices]
    combcert merge REPORT [REPORT ...] --out FILE

Exit codes: 0 all checks passed, 1 at least one check failed, 2 the
configuration or inputs were invalid. ``--strict`` escalates warnings to
failures before the exit code is computed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .report import load_report, merge_reports, write_report
from .suites import (
    ConfigError,
    run_combs_suite,
    run_hard_suite,
    run_net_suite,
)

__all__ = ["main"]

_METHODS = {
    "auto": "auto",
    "exact": "exact-commutant",
    "weingarten": "weingarten",
    "mc": "monte-carlo",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="combcert",
        description="Numerical certification suites for comb calculus, "
        "twirled-operator domination, and channel-family separation audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run verification suites")
    verify.add_argument(
        "--suite",
        choices=["combs", "hard", "net", "all"],
        default="all",
        help="which suite to run (default: all)",
    )
    verify.add_argument("--config", help="JSON config file overriding the defaults")
    verify.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    verify.add_argument("--out", default=".", help="output directory for report files")
    verify.add_argument(
        "--method",
        choices=sorted(_METHODS),
        default="auto",
        help="twirl route for the hard-suite certification records",
    )
    verify.add_argument(
        "--samples", type=int, help="override Monte Carlo sample counts"
    )
    verify.add_argument(
        "--strict", action="store_true", help="escalate warnings to failures"
    )
    verify.add_argument(
        "--jobs", type=int, default=1, help="parallel parameter cells (default 1)"
    )
    verify.add_argument(
        "--embed-matrices",
        action="store_true",
        help="inline matrix wire forms instead of hash references only",
    )

    merge = sub.add_parser("merge", help="consolidate suite reports")
    merge.add_argument("inputs", nargs="*", help="report JSON files")
    merge.add_argument("--out", required=True, help="merged report path")
    return parser


def _load_config(path: str | None) -> dict | None:
    if path is None:
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def _escalate(report):
    records = tuple(
        replace(rec, status="fail", reason=(rec.reason or "") or "escalated from warn by --strict")
        if rec.status == "warn"
        else rec
        for rec in report.records
    )
    return replace(report, records=records)


def _cmd_verify(args) -> int:
    config = _load_config(args.config)
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    if args.samples is not None and args.samples < 1:
        raise ConfigError(f"--samples must be >= 1, got {args.samples}")
    method = _METHODS[args.method]

    runners = {
        "combs": lambda: run_combs_suite(
            config, seed=args.seed, jobs=args.jobs, embed_matrices=args.embed_matrices
        ),
        "hard": lambda: run_hard_suite(
            config,
            seed=args.seed,
            jobs=args.jobs,
            method=method,
            samples=args.samples,
            embed_matrices=args.embed_matrices,
        ),
        "net": lambda: run_net_suite(
            config,
            seed=args.seed,
            jobs=args.jobs,
            samples=args.samples,
            embed_matrices=args.embed_matrices,
        ),
    }
    names = ["combs", "hard", "net"] if args.suite == "all" else [args.suite]

    os.makedirs(args.out, exist_ok=True)
    exit_code = 0
    for name in names:
        report = runners[name]()
        if args.strict:
            report = _escalate(report)
        path = os.path.join(args.out, f"{name}_report.json")
        doc = write_report(report, path)
        counts = {}
        for rec in doc["records"]:
            counts[rec["status"]] = counts.get(rec["status"], 0) + 1
        summary = ", ".join(f"{v} {k}" for k, v in sorted(counts.items()))
        print(f"[{name}] {doc['overall']} ({summary}) -> {path}")
        if doc["overall"] == "fail":
            exit_code = 1
    return exit_code


def _cmd_merge(args) -> int:
    if not args.inputs:
        print("merge: no input reports given", file=sys.stderr)
        return 2
    try:
        docs = [load_report(p) for p in args.inputs]
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"merge: {exc}", file=sys.stderr)
        return 2
    merged = merge_reports(docs)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(merged, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"[merge] {merged['overall']} ({len(merged['suites'])} suites) -> {args.out}")
    return 0 if merged["overall"] == "pass" else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_merge(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
