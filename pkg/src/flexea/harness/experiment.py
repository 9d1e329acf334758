"""Seeded multi-run experiments, summary statistics, sweeps and comparisons.

Seed splitting: run ``i`` of an experiment with base seed ``b`` uses the
64-bit seed ``SeedSequence(b, spawn_key=(i,)).generate_state(1, uint64)[0]``.
Streams of different runs are therefore independent, and the same run index
gets the same seed for every algorithm (paired comparisons).
"""
from __future__ import annotations

import copy
import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from ..core import InvalidArgumentError
from ..results import RunRecord
from .config import ConfigError, ExperimentConfig, build_fitness, build_optimizer

__all__ = [
    "RECORD_FIELDS",
    "SUMMARY_FIELDS",
    "PLOT_FIELDS",
    "SummaryStats",
    "ExperimentResult",
    "split_seed",
    "summarize",
    "run_experiment",
    "sweep",
    "compare",
    "fit_scaling_exponent",
    "emit_plot_data",
    "SWEEPABLE",
]

log = logging.getLogger(__name__)

RECORD_FIELDS = ["run_index", "seed", "evaluations", "success", "final_fitness", "wall_time_s"]
SUMMARY_FIELDS = [
    "param", "value", "algorithm", "benchmark", "n", "runs", "success_rate",
    "mean", "median", "std", "min", "max", "ci_low", "ci_high",
]
PLOT_FIELDS = ["x", "mean", "ci_low", "ci_high", "algorithm", "benchmark"]

BOOTSTRAP_RESAMPLES = 10_000


def split_seed(base_seed: int, index: int) -> int:
    """Independent 64-bit seed for run ``index``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class SummaryStats:
    """Statistics of the evaluation counts of successful runs."""

    runs: int
    successes: int
    success_rate: float
    mean: float
    median: float
    std: float
    min: float
    max: float
    ci_low: float
    ci_high: float

    def as_dict(self) -> dict:
        return asdict(self)


def summarize(evaluations: Sequence[int], successes: Sequence[bool], seed: int = 0,
              resamples: int = BOOTSTRAP_RESAMPLES) -> SummaryStats:
    """Mean/median/std/min/max over successful runs plus a bootstrap 95% CI of the mean."""
    ev = np.asarray(evaluations, dtype=float)
    ok = np.asarray(successes, dtype=bool)
    if ev.size == 0:
        raise InvalidArgumentError("no runs to summarize")
    good = ev[ok]
    rate = float(ok.mean())
    if good.size == 0:
        nan = math.nan
        return SummaryStats(int(ev.size), 0, rate, nan, nan, nan, nan, nan, nan, nan)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, good.size, size=(resamples, good.size))
    means = good[idx].mean(axis=1)
    lo, hi = np.percentile(means, [2.5, 97.5])
    mean = float(good.mean())
    return SummaryStats(
        runs=int(ev.size),
        successes=int(good.size),
        success_rate=rate,
        mean=mean,
        median=float(np.median(good)),
        std=float(good.std(ddof=1)) if good.size > 1 else 0.0,
        min=float(good.min()),
        max=float(good.max()),
        ci_low=min(float(lo), mean),
        ci_high=max(float(hi), mean),
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord]
    summary: SummaryStats

    @property
    def evaluations(self) -> list[int]:
        return [r.evaluations for r in self.records]


def _run_one(args) -> RunRecord:
    optimizer, fitness, index, seed, trace_path = args
    if trace_path is None:
        record = optimizer.run(fitness, seed)
    else:
        with open(trace_path, "w") as fh:
            record = optimizer.run(fitness, seed, trace=True, trace_file=fh)
        record.trace = None
    record.run_index = index
    record.best = None
    return record


def _prepare(config: ExperimentConfig):
    config = config.validate()
    fitness = build_fitness(config.benchmark)
    optimizer = build_optimizer(config, fitness)
    return config, fitness, optimizer


def _trace_path(output: Path | None, index: int) -> Path | None:
    if output is None:
        return None
    return output.with_name(f"{output.stem}.run{index}.trace.jsonl")


def run_experiment(config: ExperimentConfig,
                   on_record: Callable[[RunRecord], None] | None = None) -> ExperimentResult:
    """Execute ``config.runs`` independent runs.

    Configuration problems raise :class:`ConfigError` before any run starts.
    With ``config.output`` set, records are appended to that CSV as they
    finish and the summary goes to ``<output>.summary.json``.
    """
    config, fitness, optimizer = _prepare(config)
    output = Path(config.output) if config.output else None
    if config.trace and output is None:
        raise ConfigError("trace output needs an output path")
    jobs = config.jobs or os.cpu_count() or 1
    tasks = [
        (optimizer, fitness, i, split_seed(config.base_seed, i),
         _trace_path(output, i) if config.trace else None)
        for i in range(config.runs)
    ]
    records: list[RunRecord] = []
    writer = fh = None
    if output is not None:
        output.parent.mkdir(parents=True, exist_ok=True)
        fh = open(output, "w", newline="")
        writer = csv.DictWriter(fh, fieldnames=RECORD_FIELDS)
        writer.writeheader()
        fh.flush()
    try:
        if jobs == 1 or config.runs == 1:
            results: Iterable[RunRecord] = map(_run_one, tasks)
            pool = None
        else:
            pool = ProcessPoolExecutor(max_workers=min(jobs, config.runs))
            results = pool.map(_run_one, tasks, chunksize=max(1, config.runs // (4 * jobs)))
        try:
            for record in results:
                records.append(record)
                if writer is not None:
                    writer.writerow(record.csv_row())
                    fh.flush()
                if on_record is not None:
                    on_record(record)
        finally:
            if pool is not None:
                pool.shutdown()
    finally:
        if fh is not None:
            fh.close()
    summary = summarize([r.evaluations for r in records], [r.success for r in records],
                        seed=config.base_seed)
    if output is not None:
        sidecar = output.with_name(output.name + ".summary.json")
        with open(sidecar, "w") as sfh:
            json.dump({"config": config.to_dict(), "summary": summary.as_dict()}, sfh, indent=2)
    log.info("%s on %s: success %.2f, mean %.1f", config.algorithm.name,
             config.benchmark.name, summary.success_rate, summary.mean)
    return ExperimentResult(config, records, summary)


SWEEPABLE = ("n", "k", "s", "g", "beta", "r_exponent", "R", "budget", "runs", "base_seed")


def _summary_row(config: ExperimentConfig, summary: SummaryStats, param: str | None,
                 value) -> dict:
    row = {
        "param": param or "",
        "value": "" if value is None else value,
        "algorithm": config.algorithm.name,
        "benchmark": config.benchmark.name,
        "n": "" if config.benchmark.n is None else config.benchmark.n,
    }
    stats = summary.as_dict()
    row.update({k: stats[k] for k in SUMMARY_FIELDS if k in stats})
    return row


def _write_rows(path: str | Path, rows: list[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        writer.writeheader()
        writer.writerows(rows)


def _sub_output(config: ExperimentConfig, tag: str) -> str | None:
    if not config.output:
        return None
    out = Path(config.output)
    return str(out.with_name(f"{out.stem}.{tag}{out.suffix or '.csv'}"))


def sweep(base: ExperimentConfig, param: str, values: Sequence, out: str | Path | None = None) -> list[dict]:
    """One experiment per value of ``param``; returns (and optionally writes) one row each."""
    if param not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {param!r}; choose from {', '.join(SWEEPABLE)}")
    values = list(values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    configs = []
    for value in values:
        cfg = base.with_overrides(**{param: value})
        cfg.output = _sub_output(base, f"{param}={value}")
        configs.append(_prepare(cfg)[0])
    rows = []
    for value, cfg in zip(values, configs):
        result = run_experiment(cfg)
        rows.append(_summary_row(cfg, result.summary, param, value))
    if out is not None:
        _write_rows(out, rows)
    return rows


def compare(configs: Sequence[ExperimentConfig], out: str | Path | None = None) -> list[dict]:
    """Run several algorithms on one benchmark with identical per-run seeds."""
    if not configs:
        raise ConfigError("compare needs at least one configuration")
    bench = asdict(configs[0].benchmark)
    prepared = []
    for cfg in configs:
        if asdict(cfg.benchmark) != bench:
            raise ConfigError("all compared configurations must share the benchmark")
        cfg = copy.deepcopy(cfg)
        cfg.base_seed = configs[0].base_seed
        cfg.runs = configs[0].runs
        prepared.append(_prepare(cfg)[0])
    rows = []
    for i, cfg in enumerate(prepared):
        cfg.output = _sub_output(configs[0], f"{i}-{cfg.algorithm.name}")
        result = run_experiment(cfg)
        rows.append(_summary_row(cfg, result.summary, "algorithm", cfg.algorithm.name))
    if out is not None:
        _write_rows(out, rows)
    return rows


def fit_scaling_exponent(rows: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of ``log(mean)`` against ``log(n)``."""
    pts = [(float(n), float(m)) for n, m in rows]
    if len(pts) < 3:
        raise InvalidArgumentError(f"need at least 3 points, got {len(pts)}")
    ns = np.array([p[0] for p in pts])
    if len(set(ns)) != len(ns):
        raise InvalidArgumentError("sizes must be distinct")
    means = np.array([p[1] for p in pts])
    if (ns <= 0).any() or (means <= 0).any():
        raise InvalidArgumentError("sizes and means must be positive")
    slope, _ = np.polyfit(np.log(ns), np.log(means), 1)
    return float(slope)


def emit_plot_data(records_path: str | Path, out: str | Path | None = None) -> list[dict]:
    """Turn a sweep/compare summary CSV into ``x, mean, ci_low, ci_high, algorithm, benchmark`` rows."""
    with open(records_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise InvalidArgumentError(f"{records_path}: no records")
    missing = {"mean", "ci_low", "ci_high"} - set(rows[0])
    if missing:
        raise InvalidArgumentError(f"{records_path}: missing columns {sorted(missing)}")
    plot = []
    for i, row in enumerate(rows):
        x = row.get("value") or row.get("n") or i
        plot.append({
            "x": x,
            "mean": row["mean"],
            "ci_low": row["ci_low"],
            "ci_high": row["ci_high"],
            "algorithm": row.get("algorithm", ""),
            "benchmark": row.get("benchmark", ""),
        })
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=PLOT_FIELDS)
            writer.writeheader()
            writer.writerows(plot)
    return plot
