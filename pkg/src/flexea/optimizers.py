"""Estimator-style front end for all algorithms.

The classes follow scikit-learn conventions: constructor arguments are
stored untouched, ``get_params``/``set_params``/``clone`` work, and
``fit(fitness)`` stores results in trailing-underscore attributes.
``run(fitness, seed)`` returns a :class:`RunRecord` directly.

Runs use the compiled loops whenever the benchmark supports them and no
trace is requested; ``engine="python"`` forces the reference code.  Both
paths give identical results for the same seed.
"""
from __future__ import annotations

import time
from typing import TextIO

import numpy as np
from sklearn.base import BaseEstimator

from . import baselines, engine
from .benchmarks import FitnessFunction
from .core import BitString, InvalidArgumentError
from .results import RunRecord
from .schedule import (
    InvalidParameterError,
    RateSchedule,
    heavy_tailed_lower_bounds,
    standard_sd_count_bounds,
)
from .validation import check_fitness, check_random_source, check_termination, check_vector

__all__ = ["FlexEA", "SDRLS", "FastEA", "RLS12", "OnePlusOneEA", "ALGORITHMS", "make_optimizer"]

_ENGINES = ("auto", "python", "compiled")


class BaseOptimizer(BaseEstimator):
    """Shared run/fit plumbing; subclasses provide ``_run_python`` and ``_run_compiled``."""

    def _check_engine(self) -> None:
        if self.engine not in _ENGINES:
            raise InvalidArgumentError(f"engine must be one of {_ENGINES}, got {self.engine!r}")

    def run(self, fitness: FitnessFunction, seed=None, *, trace: bool = False,
            trace_file: TextIO | None = None) -> RunRecord:
        """Optimize ``fitness`` once; ``seed`` is an int, a RandomSource or None."""
        self._check_engine()
        fitness = check_fitness(fitness)
        rng = check_random_source(seed)
        termination = check_termination(self.max_evaluations, self.stop_at_optimum)
        spec = fitness.kernel_spec()
        use_compiled = not trace and spec is not None and self.engine != "python"
        if self.engine == "compiled" and not use_compiled:
            raise InvalidArgumentError("compiled engine needs a built-in benchmark and no trace")
        start = time.perf_counter()
        if use_compiled:
            record = self._run_compiled(fitness, spec, termination, rng)
        else:
            record = self._run_python(fitness, termination, rng, trace, trace_file)
        record.wall_time = time.perf_counter() - start
        record.seed = rng.seed
        return record

    def fit(self, fitness: FitnessFunction, seed=None):
        record = self.run(fitness, seed)
        self.result_ = record
        self.best_ = record.best
        self.best_fitness_ = record.final_fitness
        self.n_evaluations_ = record.evaluations
        self.success_ = record.success
        return self

    def _finish(self, fitness, x, evals, hit, score, **extra) -> RunRecord:
        sign = 1.0 if fitness.direction == "maximize" else -1.0
        return RunRecord(
            evaluations=int(evals),
            success=bool(hit),
            final_fitness=sign * float(score),
            best=BitString.from_array(x),
            extra=extra,
        )


def _kernels():
    from . import _kernels
    return _kernels


class FlexEA(BaseOptimizer):
    """Elitist EA with a dynamic archive of successful k-bit-flip rates.

    Parameters
    ----------
    beta : float
        Power-law exponent of the default heavy-tailed lower bounds.
    r_exponent : float
        Default count bounds use ``R = n**r_exponent``.
    lower_bounds : "heavy-tailed" or array of length n
    count_bounds : "standard-sd" or array of length n
    max_evaluations : int or None
        Budget including the initial evaluation.
    stop_at_optimum : bool
    engine : {"auto", "python", "compiled"}
    """

    def __init__(self, beta: float = 1.5, r_exponent: float = 4.0,
                 lower_bounds="heavy-tailed", count_bounds="standard-sd",
                 max_evaluations: int | None = None, stop_at_optimum: bool = True,
                 engine: str = "auto"):
        self.beta = beta
        self.r_exponent = r_exponent
        self.lower_bounds = lower_bounds
        self.count_bounds = count_bounds
        self.max_evaluations = max_evaluations
        self.stop_at_optimum = stop_at_optimum
        self.engine = engine

    def make_schedule(self, n: int) -> RateSchedule:
        if isinstance(self.lower_bounds, str):
            if self.lower_bounds != "heavy-tailed":
                raise InvalidParameterError(f"unknown lower-bound scheme {self.lower_bounds!r}")
            lam = heavy_tailed_lower_bounds(n, self.beta)
        else:
            lam = check_vector(self.lower_bounds, n, "lower_bounds")
        if isinstance(self.count_bounds, str):
            if self.count_bounds != "standard-sd":
                raise InvalidParameterError(f"unknown count-bound scheme {self.count_bounds!r}")
            T = standard_sd_count_bounds(n, float(max(n, 2)) ** self.r_exponent)
        else:
            T = check_vector(self.count_bounds, n, "count_bounds")
        return RateSchedule(lam, T)

    def _run_python(self, fitness, termination, rng, trace, trace_file):
        schedule = self.make_schedule(fitness.n)
        return engine.run(fitness.n, schedule, fitness, termination, rng, trace=trace,
                          trace_file=trace_file)

    def _run_compiled(self, fitness, spec, termination, rng):
        schedule = self.make_schedule(fitness.n)
        x = np.zeros(fitness.n, dtype=np.uint8)
        evals, hit, score, size, resets = _kernels().flexea_run(
            rng.generator, x, np.ascontiguousarray(schedule.lower_bounds),
            np.ascontiguousarray(schedule.count_bounds), spec.code, spec.table, spec.ints,
            spec.edges, spec.target, termination.budget, termination.stop_at_optimum,
        )
        return self._finish(fitness, x, evals, hit, score, archive_size=int(size),
                            global_resets=int(resets))


class SDRLS(BaseOptimizer):
    """Randomized local search with stagnation detection (SD-RLS^r).

    ``R`` overrides ``r_exponent`` when given; otherwise ``R = n**r_exponent``.
    """

    def __init__(self, r_exponent: float = 4.0, R: float | None = None,
                 accept_equal: bool = False, max_evaluations: int | None = None,
                 stop_at_optimum: bool = True, engine: str = "auto"):
        self.r_exponent = r_exponent
        self.R = R
        self.accept_equal = accept_equal
        self.max_evaluations = max_evaluations
        self.stop_at_optimum = stop_at_optimum
        self.engine = engine

    def _R(self, n: int) -> float:
        return float(self.R) if self.R is not None else float(max(n, 2)) ** self.r_exponent

    def _run_python(self, fitness, termination, rng, trace, trace_file):
        return baselines.run_sd_rls_r(fitness, termination, rng, self._R(fitness.n),
                                      self.accept_equal, trace)

    def _run_compiled(self, fitness, spec, termination, rng):
        T = standard_sd_count_bounds(fitness.n, self._R(fitness.n))
        x = np.zeros(fitness.n, dtype=np.uint8)
        evals, hit, score = _kernels().sd_rls_run(
            rng.generator, x, T, bool(self.accept_equal), spec.code, spec.table, spec.ints,
            spec.edges, spec.target, termination.budget, termination.stop_at_optimum,
        )
        return self._finish(fitness, x, evals, hit, score)


class FastEA(BaseOptimizer):
    """Fast (1+1) EA: power-law rate, then standard bit mutation with rate/n."""

    def __init__(self, beta: float = 1.5, accept_equal: bool = True,
                 max_evaluations: int | None = None, stop_at_optimum: bool = True,
                 engine: str = "auto"):
        self.beta = beta
        self.accept_equal = accept_equal
        self.max_evaluations = max_evaluations
        self.stop_at_optimum = stop_at_optimum
        self.engine = engine

    def _run_python(self, fitness, termination, rng, trace, trace_file):
        return baselines.run_fast_ea(fitness, termination, rng, self.beta, self.accept_equal, trace)

    def _run_compiled(self, fitness, spec, termination, rng):
        sampler = baselines.HeavyTailSampler(fitness.n, self.beta)
        x = np.zeros(fitness.n, dtype=np.uint8)
        evals, hit, score = _kernels().sbm_run(
            rng.generator, x, sampler.cdf, True, bool(self.accept_equal), spec.code, spec.table,
            spec.ints, spec.edges, spec.target, termination.budget, termination.stop_at_optimum,
        )
        return self._finish(fitness, x, evals, hit, score)


class OnePlusOneEA(BaseOptimizer):
    """Classic (1+1) EA with per-bit flip probability 1/n."""

    def __init__(self, accept_equal: bool = True, max_evaluations: int | None = None,
                 stop_at_optimum: bool = True, engine: str = "auto"):
        self.accept_equal = accept_equal
        self.max_evaluations = max_evaluations
        self.stop_at_optimum = stop_at_optimum
        self.engine = engine

    def _run_python(self, fitness, termination, rng, trace, trace_file):
        return baselines.run_one_plus_one_ea(fitness, termination, rng, self.accept_equal, trace)

    def _run_compiled(self, fitness, spec, termination, rng):
        x = np.zeros(fitness.n, dtype=np.uint8)
        evals, hit, score = _kernels().sbm_run(
            rng.generator, x, np.ones(1), False, bool(self.accept_equal), spec.code, spec.table,
            spec.ints, spec.edges, spec.target, termination.budget, termination.stop_at_optimum,
        )
        return self._finish(fitness, x, evals, hit, score)


class RLS12(BaseOptimizer):
    """Random local search flipping one or two bits with equal probability."""

    def __init__(self, accept_equal: bool = True, max_evaluations: int | None = None,
                 stop_at_optimum: bool = True, engine: str = "auto"):
        self.accept_equal = accept_equal
        self.max_evaluations = max_evaluations
        self.stop_at_optimum = stop_at_optimum
        self.engine = engine

    def _run_python(self, fitness, termination, rng, trace, trace_file):
        return baselines.run_rls12(fitness, termination, rng, self.accept_equal, trace)

    def _run_compiled(self, fitness, spec, termination, rng):
        if fitness.n < 2:
            raise InvalidArgumentError("RLS^{1,2} needs n >= 2")
        x = np.zeros(fitness.n, dtype=np.uint8)
        evals, hit, score = _kernels().rls12_run(
            rng.generator, x, bool(self.accept_equal), spec.code, spec.table, spec.ints,
            spec.edges, spec.target, termination.budget, termination.stop_at_optimum,
        )
        return self._finish(fitness, x, evals, hit, score)


ALGORITHMS = {
    "flex-ea": FlexEA,
    "sd-rls-r": SDRLS,
    "fast-ea": FastEA,
    "rls12": RLS12,
    "opo-ea": OnePlusOneEA,
}


def make_optimizer(name: str, **params) -> BaseOptimizer:
    """Instantiate an algorithm by its harness name, ignoring parameters it does not take."""
    try:
        cls = ALGORITHMS[name]
    except KeyError:
        raise InvalidArgumentError(
            f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}"
        ) from None
    accepted = cls._get_param_names()
    return cls(**{k: v for k, v in params.items() if k in accepted and v is not None})
