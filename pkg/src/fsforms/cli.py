"""Command-line entry point.

Exit codes: 0 success, 1 a case or check failed, 2 unknown suite or
experiment / bad config / bad arguments, 3 internal error, 4 degenerate
Faddeev-Popov operator.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path
from typing import Optional, Sequence

from . import suite as suites
from .algebra import DEFAULT_REGISTRY, AlgebraError
from .lattice import experiments as lattice_experiments
from .lattice.core import DegeneracyError
from .lattice.settings import ConfigError, load_settings

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL, EXIT_DEGENERATE = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def cmd_verify(args) -> int:
    if args.format not in ("json", "text"):
        raise UsageError(f"format {args.format!r} is not available for verify")
    try:
        report = suites.run_suite(args.suite, jobs=args.jobs)
    except suites.UnknownSuiteError as exc:
        print(f"error: {exc}; available: {', '.join(suites.available_suites()) or 'none'}",
              file=sys.stderr)
        return EXIT_USAGE
    except suites.SuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.seed = args.seed
    _emit(_json(report.to_dict()) if args.format == "json" else report.to_text(), args.output)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_lattice(args) -> int:
    name = args.experiment
    if name not in lattice_experiments.EXPERIMENTS:
        print(f"error: unknown experiment {name!r}; available: "
              f"{', '.join(lattice_experiments.EXPERIMENTS)}", file=sys.stderr)
        return EXIT_USAGE
    base = lattice_experiments.DEFAULTS[name]
    try:
        settings = load_settings(args.config, base) if args.config else base
        settings = settings.with_overrides(seed=args.seed, group=args.group)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = lattice_experiments.run_experiment(name, settings)
    except DegeneracyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    if args.format == "csv":
        _emit(result.to_csv(), args.output)
    else:
        text = _json(result.to_dict()) if args.format == "json" else result.to_text()
        _emit(text, args.output)
    if args.csv:
        Path(args.csv).write_text(result.to_csv(), encoding="utf-8")
    return EXIT_OK if result.ok else EXIT_FAIL


def listing() -> dict:
    return {
        "suites": suites.available_suites(),
        "experiments": list(lattice_experiments.EXPERIMENTS),
        "atoms": [{"symbol": a.symbol, "bidegree": list(a.degree), "valuedness": a.valuedness}
                  for a in DEFAULT_REGISTRY],
    }


def cmd_list(args) -> int:
    data = listing()
    if args.format == "json":
        _emit(_json(data), args.output)
        return EXIT_OK
    lines = ["suites:"] + [f"  {s}" for s in data["suites"]]
    lines += ["experiments:"] + [f"  {e}" for e in data["experiments"]]
    lines += ["atoms:"] + [f"  {a['symbol']} {tuple(a['bidegree'])} {a['valuedness']}"
                           for a in data["atoms"]]
    _emit("\n".join(lines), args.output)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fsforms", description="Verify field-space identities and run lattice experiments.",
                formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog=__doc__.split("\n\n", 1)[1])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run a symbolic identity suite")
    v.add_argument("suite")
    v.add_argument("--format", choices=("json", "text", "csv"), default="text")
    v.add_argument("--output", help="write the report here instead of stdout")
    v.add_argument("--jobs", type=int, default=1, help="check cases in parallel")
    v.add_argument("--seed", type=int, default=None, help="recorded in the report")
    v.add_argument("--config", help="accepted for symmetry; unused by verify")
    v.set_defaults(fn=cmd_verify)

    lat = sub.add_parser("lattice", help="run a lattice experiment",
                         formatter_class=argparse.RawDescriptionHelpFormatter,
                         epilog=lattice_experiments.__doc__)
    lat.add_argument("experiment")
    lat.add_argument("--config", help="key-value settings file")
    lat.add_argument("--format", choices=("json", "text", "csv"), default="text")
    lat.add_argument("--output", help="write the report (or CSV) here instead of stdout")
    lat.add_argument("--csv", help="also write the CSV rows to this path")
    lat.add_argument("--seed", type=int, default=None)
    lat.add_argument("--group", choices=("u1", "su2"), default=None)
    lat.add_argument("--jobs", type=int, default=1, help="accepted; experiments run serially")
    lat.set_defaults(fn=cmd_lattice)

    ls = sub.add_parser("list", help="list suites, experiments and declared atoms")
    ls.add_argument("--format", choices=("json", "text"), default="text")
    ls.add_argument("--output")
    ls.set_defaults(fn=cmd_list)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be at least 1")
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AlgebraError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001 - last-resort guard for the exit code contract
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
