"""Command line entry point (``flexea``).

Exit codes: 0 success, 1 configuration error, 2 I/O error.  ``validate``
exits with 1 when a property check fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..core import FlexEAError
from . import experiment, selfcheck
from .config import ConfigError, ExperimentConfig, load_config

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2

log = logging.getLogger("flexea")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON experiment configuration")
    p.add_argument("--algo", help="flex-ea, sd-rls-r, fast-ea, rls12 or opo-ea")
    p.add_argument("--problem", help="onemax, leading-ones, trimmed-onemax, jump, two-rates, hurdles, mst")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--s", type=int, help="hurdle start level")
    p.add_argument("--g", type=int, help="hurdle gap")
    p.add_argument("--graph", help="edge-list file for the mst problem")
    p.add_argument("--beta", type=float)
    p.add_argument("--r-exponent", dest="r_exponent", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--seed", type=int, help="base seed")
    p.add_argument("--budget", type=int, help="evaluation cap per run")
    p.add_argument("--trace", action="store_true", default=None,
                   help="write per-run JSONL traces next to --out")
    p.add_argument("--out", help="output CSV path")
    p.add_argument("--jobs", type=int, help="worker processes (default: all cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flexea", description="flex-EA experiment harness")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="independent seeded runs of one configuration")
    _common(p)

    p = sub.add_parser("sweep", help="one summary row per parameter value")
    _common(p)
    p.add_argument("--param", required=True, help=f"one of {', '.join(experiment.SWEEPABLE)}")
    p.add_argument("--values", required=True, help="comma-separated values")

    p = sub.add_parser("compare", help="paired runs of several algorithms on one problem")
    _common(p)
    p.add_argument("--algos", help="comma-separated algorithm names (overrides --algo)")

    p = sub.add_parser("validate", help="run the built-in property suites")
    p.add_argument("--quick", action="store_true", help="tenth of the default sample sizes")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("plot-data", help="plot-ready CSV from a sweep/compare summary")
    p.add_argument("records", help="summary CSV written by sweep or compare")
    p.add_argument("--out", help="destination (default: stdout)")
    return parser


_FLAGS = ("algo", "problem", "n", "k", "s", "g", "graph", "beta", "r_exponent", "runs",
          "seed", "budget", "trace", "out", "jobs")


def _config(args) -> ExperimentConfig:
    base = load_config(args.config) if args.config else ExperimentConfig.from_dict(
        {"algorithm": {"name": "flex-ea"}, "benchmark": {"name": "onemax"}}
    )
    overrides = {name: getattr(args, name, None) for name in _FLAGS}
    cfg = base.with_overrides(**overrides)
    if cfg.benchmark.name != "mst" and cfg.benchmark.n is None:
        raise ConfigError("problem size missing: give --n or benchmark.n")
    return cfg


def _parse_values(text: str) -> list:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            out.append(int(item))
        except ValueError:
            try:
                out.append(float(item))
            except ValueError:
                raise ConfigError(f"not a number: {item!r}") from None
    return out


def _print_rows(rows: list[dict]) -> None:
    for row in rows:
        print(json.dumps(row))


def _cmd_run(args) -> int:
    result = experiment.run_experiment(_config(args))
    print(json.dumps(result.summary.as_dict()))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _config(args)
    rows = experiment.sweep(cfg, args.param, _parse_values(args.values), out=cfg.output)
    _print_rows(rows)
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = _config(args)
    names = [a.strip() for a in args.algos.split(",")] if args.algos else [cfg.algorithm.name]
    configs = [cfg.with_overrides(algo=name) for name in names if name]
    rows = experiment.compare(configs, out=cfg.output)
    _print_rows(rows)
    return EXIT_OK


def _cmd_validate(args) -> int:
    results = selfcheck.run_all(quick=args.quick, seed=args.seed)
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_CONFIG


def _cmd_plot(args) -> int:
    try:
        rows = experiment.emit_plot_data(args.records, args.out)
    except FlexEAError as exc:
        raise ConfigError(str(exc)) from None
    if args.out is None:
        print(",".join(experiment.PLOT_FIELDS))
        for row in rows:
            print(",".join(str(row[f]) for f in experiment.PLOT_FIELDS))
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "validate": _cmd_validate,
    "plot-data": _cmd_plot,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FlexEAError as exc:
        print(f"flexea: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"flexea: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
