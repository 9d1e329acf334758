"""Input validation helpers used by the estimator classes and the harness."""
from __future__ import annotations

import numbers

import numpy as np

from .benchmarks import FitnessFunction
from .core import InvalidArgumentError, RandomSource
from .results import TerminationCriterion

__all__ = ["check_random_source", "check_fitness", "check_termination", "check_vector"]


def check_random_source(seed) -> RandomSource:
    """Turn ``None``, an int or a RandomSource into a RandomSource.

    ``None`` draws a fresh seed from the OS.
    """
    if isinstance(seed, RandomSource):
        return seed
    if seed is None:
        return RandomSource(int(np.random.SeedSequence().generate_state(1, np.uint64)[0]))
    if isinstance(seed, numbers.Integral):
        return RandomSource(int(seed))
    raise InvalidArgumentError(f"{seed!r} cannot be used to seed a RandomSource")


def check_fitness(fitness) -> FitnessFunction:
    if not isinstance(fitness, FitnessFunction):
        raise InvalidArgumentError(
            f"expected a FitnessFunction, got {type(fitness).__name__}"
        )
    return fitness


def check_termination(max_evaluations, stop_at_optimum: bool) -> TerminationCriterion:
    if max_evaluations is not None:
        if not isinstance(max_evaluations, numbers.Integral) or max_evaluations < 1:
            raise InvalidArgumentError(f"max_evaluations must be a positive integer, got {max_evaluations!r}")
        max_evaluations = int(max_evaluations)
    return TerminationCriterion(max_evaluations, bool(stop_at_optimum))


def check_vector(values, n: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size != n:
        raise InvalidArgumentError(f"{name} has {arr.size} entries, expected {n}")
    return arr
