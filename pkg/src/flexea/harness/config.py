"""Experiment configuration: JSON documents validated against a shipped schema."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from ..benchmarks import FitnessFunction, ResiduePattern, WeightedGraph, make_benchmark
from ..core import FlexEAError
from ..optimizers import BaseOptimizer, make_optimizer
from ..schedule import (
    RateSchedule,
    heavy_tailed_lower_bounds,
    load_vector,
    mst_graybox_schedule,
    standard_sd_count_bounds,
)

__all__ = [
    "ConfigError",
    "AlgorithmConfig",
    "BenchmarkConfig",
    "ExperimentConfig",
    "load_config",
    "config_schema",
    "build_fitness",
    "build_optimizer",
    "default_budget",
]


class ConfigError(FlexEAError):
    """Invalid or inconsistent experiment configuration."""


def config_schema() -> dict:
    text = resources.files("flexea.harness").joinpath("config.schema.json").read_text()
    return json.loads(text)


@dataclass
class AlgorithmConfig:
    name: str = "flex-ea"
    beta: float = 1.5
    r_exponent: float = 4.0
    R: float | None = None
    lambda_scheme: str = "heavy-tailed"
    t_scheme: str = "standard-sd"
    lambda_path: str | None = None
    t_path: str | None = None
    mst_c: float = 6.0
    mst_lambda1: float = 0.25
    accept_equal: bool | None = None


@dataclass
class BenchmarkConfig:
    name: str = "onemax"
    n: int | None = None
    k: int | None = None
    graph_path: str | None = None
    penalty: int | None = None
    s: int | None = None
    g: int | None = None
    upper: int | None = None
    pattern_modulus: int = 3
    pattern_infeasible: list[int] = field(default_factory=lambda: [1])


@dataclass
class ExperimentConfig:
    algorithm: AlgorithmConfig = field(default_factory=AlgorithmConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    runs: int = 100
    base_seed: int = 0
    budget: int | None = None
    trace: bool = False
    output: str | None = None
    jobs: int | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        try:
            jsonschema.validate(data, config_schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise ConfigError(f"config invalid at {where}: {exc.message}") from None
        top = {k: v for k, v in data.items() if k not in ("algorithm", "benchmark")}
        return cls(
            algorithm=AlgorithmConfig(**data["algorithm"]),
            benchmark=BenchmarkConfig(**data["benchmark"]),
            **top,
        )

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def validate(self) -> "ExperimentConfig":
        """Re-run schema validation, e.g. after applying overrides."""
        return ExperimentConfig.from_dict(self.to_dict())

    # flag name -> (section, field)
    OVERRIDES = {
        "algo": ("algorithm", "name"),
        "beta": ("algorithm", "beta"),
        "r_exponent": ("algorithm", "r_exponent"),
        "R": ("algorithm", "R"),
        "problem": ("benchmark", "name"),
        "n": ("benchmark", "n"),
        "k": ("benchmark", "k"),
        "s": ("benchmark", "s"),
        "g": ("benchmark", "g"),
        "graph": ("benchmark", "graph_path"),
        "runs": (None, "runs"),
        "seed": (None, "base_seed"),
        "base_seed": (None, "base_seed"),
        "budget": (None, "budget"),
        "trace": (None, "trace"),
        "out": (None, "output"),
        "output": (None, "output"),
        "jobs": (None, "jobs"),
    }

    def with_overrides(self, **values) -> "ExperimentConfig":
        """Copy with flat overrides applied (``None`` values are skipped)."""
        data = self.to_dict()
        for key, value in values.items():
            if value is None:
                continue
            if key not in self.OVERRIDES:
                raise ConfigError(f"unknown parameter {key!r}")
            section, name = self.OVERRIDES[key]
            (data if section is None else data[section])[name] = value
        return ExperimentConfig.from_dict(data)


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    config = ExperimentConfig.from_dict(data)
    # relative data files are resolved against the config file's directory
    base = Path(path).parent
    for section, key in (("algorithm", "lambda_path"), ("algorithm", "t_path"),
                         ("benchmark", "graph_path")):
        part = getattr(config, section)
        value = getattr(part, key)
        if value and not Path(value).is_absolute():
            setattr(part, key, str(base / value))
    return config


def build_fitness(bench: BenchmarkConfig) -> FitnessFunction:
    try:
        graph = None
        if bench.name == "mst":
            if not bench.graph_path:
                raise ConfigError("the mst benchmark needs graph_path")
            try:
                graph = WeightedGraph.from_file(bench.graph_path, bench.penalty)
            except OSError as exc:
                raise ConfigError(f"cannot read graph file: {exc}") from None
        pattern = ResiduePattern(bench.pattern_modulus, tuple(bench.pattern_infeasible))
        return make_benchmark(bench.name, bench.n, k=bench.k, graph=graph, s=bench.s, g=bench.g,
                              upper=bench.upper, pattern=pattern)
    except FlexEAError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def default_budget(fitness: FitnessFunction, bench: BenchmarkConfig) -> int:
    """Roughly ten times the expected runtime or more, so success rates stay near one."""
    n = fitness.n
    if bench.name == "jump":
        return int(100 * math.comb(n, bench.k))
    if bench.name == "mst":
        return int(math.ceil(100 * n * n * math.log(max(n, 2))))
    if bench.name in ("two-rates", "hurdles"):
        return int(200 * n**3)
    if bench.name == "leading-ones":
        return int(max(math.ceil(1000 * n * math.log(max(n, 2))), 10 * n * n))
    return int(math.ceil(1000 * n * math.log(max(n, 2))))


def _schedule(alg: AlgorithmConfig, n: int) -> RateSchedule:
    R = alg.R if alg.R is not None else float(max(n, 2)) ** alg.r_exponent
    if "mst-graybox" in (alg.lambda_scheme, alg.t_scheme):
        graybox = mst_graybox_schedule(n, alg.mst_c, alg.mst_lambda1)
    if alg.lambda_scheme == "heavy-tailed":
        lam = heavy_tailed_lower_bounds(n, alg.beta)
    elif alg.lambda_scheme == "mst-graybox":
        lam = graybox.lower_bounds
    else:
        if not alg.lambda_path:
            raise ConfigError("lambda_scheme 'custom' needs lambda_path")
        lam = load_vector(alg.lambda_path, n)
    if alg.t_scheme == "standard-sd":
        T = standard_sd_count_bounds(n, R)
    elif alg.t_scheme == "mst-graybox":
        T = graybox.count_bounds
    else:
        if not alg.t_path:
            raise ConfigError("t_scheme 'custom' needs t_path")
        T = load_vector(alg.t_path, n)
    return RateSchedule(lam, T)


def build_optimizer(cfg: ExperimentConfig, fitness: FitnessFunction) -> BaseOptimizer:
    alg = cfg.algorithm
    n = fitness.n
    budget = cfg.budget if cfg.budget is not None else default_budget(fitness, cfg.benchmark)
    params: dict[str, Any] = {
        "beta": alg.beta,
        "r_exponent": alg.r_exponent,
        "R": alg.R,
        "accept_equal": alg.accept_equal,
        "max_evaluations": budget,
    }
    try:
        if alg.name == "flex-ea":
            if n < 2 and (alg.lambda_scheme == "mst-graybox" or alg.t_scheme == "mst-graybox"):
                raise ConfigError("gray-box schedule needs at least two edges")
            try:
                schedule = _schedule(alg, n)
            except OSError as exc:
                raise ConfigError(f"cannot read schedule vector: {exc}") from None
            params["lower_bounds"] = schedule.lower_bounds
            params["count_bounds"] = schedule.count_bounds
        return make_optimizer(alg.name, **params)
    except FlexEAError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
