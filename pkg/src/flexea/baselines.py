"""Comparison algorithms: SD-RLS^r, Fast (1+1) EA, RLS^{1,2} and the (1+1) EA.

Each algorithm has a ``*_step`` function over an explicit state and a
``run_*`` driver.  Random draws follow the same order as the compiled loops
in :mod:`flexea._kernels`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .benchmarks import FitnessFunction
from .core import BitString, InvalidArgumentError, RandomSource, flip_k_bits, random_bitstring
from .engine import EQUAL_ACCEPTED, REJECTED, STRICT_IMPROVEMENT
from .results import RunRecord, TerminationCriterion
from .schedule import InvalidParameterError, standard_sd_count_bounds

__all__ = [
    "SdRlsState",
    "HeavyTailSampler",
    "standard_bit_mutation",
    "sd_rls_r_step",
    "fast_ea_step",
    "rls12_step",
    "one_plus_one_ea_step",
    "run_sd_rls_r",
    "run_fast_ea",
    "run_rls12",
    "run_one_plus_one_ea",
]


def _select(fx: float, fy: float, accept_equal: bool) -> str:
    if fy > fx:
        return STRICT_IMPROVEMENT
    if fy == fx and accept_equal:
        return EQUAL_ACCEPTED
    return REJECTED


class HeavyTailSampler:
    """Power-law rate distribution ``Pr[r] ~ r**-beta`` on ``1..max(1, n // 2)``."""

    def __init__(self, n: int, beta: float = 1.5):
        if not 1.0 < beta < 2.0:
            raise InvalidParameterError(f"beta must lie in (1, 2), got {beta}")
        if n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {n}")
        self.n = n
        self.beta = beta
        self.support = max(1, n // 2)
        weights = np.arange(1, self.support + 1, dtype=float) ** -beta
        self.probabilities = weights / math.fsum(weights)
        self.cdf = np.cumsum(self.probabilities)

    def sample(self, rng: RandomSource) -> int:
        idx = int(np.searchsorted(self.cdf, rng.random() * self.cdf[-1], side="right"))
        return min(idx, self.support - 1) + 1

    def sample_many(self, size: int, rng: RandomSource) -> np.ndarray:
        idx = np.searchsorted(self.cdf, rng.randoms(size) * self.cdf[-1], side="right")
        return np.minimum(idx, self.support - 1) + 1


def standard_bit_mutation(x: BitString, probability: float, rng: RandomSource) -> BitString:
    """Flip every bit independently with ``probability``; may flip nothing."""
    flips = np.flatnonzero(rng.randoms(x.n) < probability)
    return x.flip(int(i) for i in flips)


@dataclass
class SdRlsState:
    """State of SD-RLS^r: current point, rate in ``1..ceil(n/2)`` and failure counter."""

    current: BitString
    current_fitness: float
    rate: int
    counter: int
    R: float
    accept_equal: bool = False
    thresholds: np.ndarray | None = None

    def __post_init__(self) -> None:
        n = self.current.n
        if not self.R > 1:
            raise InvalidParameterError(f"R must be > 1, got {self.R}")
        if self.thresholds is None:
            self.thresholds = standard_sd_count_bounds(n, self.R)
        if not 1 <= self.rate <= self.max_rate:
            raise InvalidArgumentError(f"rate {self.rate} outside [1..{self.max_rate}]")

    @property
    def max_rate(self) -> int:
        return (self.current.n + 1) // 2

    def threshold(self) -> float:
        return float(self.thresholds[self.rate - 1])


def sd_rls_r_step(state: SdRlsState, fitness: FitnessFunction, rng: RandomSource) -> str:
    """Flip exactly ``state.rate`` bits; escalate the rate after its failure budget.

    After the largest rate ``ceil(n/2)`` is exhausted the rate wraps to 1.
    """
    y = flip_k_bits(state.current, state.rate, rng)
    fy = fitness.score(y)
    event = _select(state.current_fitness, fy, state.accept_equal)
    if event == STRICT_IMPROVEMENT:
        state.current, state.current_fitness = y, fy
        state.rate = 1
        state.counter = 0
        return event
    if event == EQUAL_ACCEPTED:
        state.current = y
    state.counter += 1
    if state.counter >= state.threshold():
        state.rate = state.rate + 1 if state.rate < state.max_rate else 1
        state.counter = 0
    return event


def fast_ea_step(current: BitString, current_fitness: float, sampler: HeavyTailSampler,
                 fitness: FitnessFunction, rng: RandomSource,
                 accept_equal: bool = True) -> tuple[BitString, float, str, int]:
    """Power-law rate ``r``, then standard bit mutation with probability ``r/n``."""
    r = sampler.sample(rng)
    y = standard_bit_mutation(current, r / current.n, rng)
    fy = fitness.score(y)
    event = _select(current_fitness, fy, accept_equal)
    if event == REJECTED:
        return current, current_fitness, event, r
    return y, fy, event, r


def rls12_step(current: BitString, current_fitness: float, fitness: FitnessFunction,
               rng: RandomSource, accept_equal: bool = True) -> tuple[BitString, float, str, int]:
    """Flip one or two uniformly chosen bits, each with probability 1/2."""
    if current.n < 2:
        raise InvalidArgumentError("RLS^{1,2} needs n >= 2")
    r = 1 if rng.random() < 0.5 else 2
    y = flip_k_bits(current, r, rng)
    fy = fitness.score(y)
    event = _select(current_fitness, fy, accept_equal)
    if event == REJECTED:
        return current, current_fitness, event, r
    return y, fy, event, r


def one_plus_one_ea_step(current: BitString, current_fitness: float, fitness: FitnessFunction,
                         rng: RandomSource, accept_equal: bool = True) -> tuple[BitString, float, str]:
    y = standard_bit_mutation(current, 1.0 / current.n, rng)
    fy = fitness.score(y)
    event = _select(current_fitness, fy, accept_equal)
    if event == REJECTED:
        return current, current_fitness, event
    return y, fy, event


def _drive(fitness: FitnessFunction, termination: TerminationCriterion, rng: RandomSource,
           make_step, trace: bool) -> RunRecord:
    x = random_bitstring(fitness.n, rng)
    fx = fitness.score(x)
    step_fn = make_step(x, fx)
    target = fitness.optimum_score
    evaluations = 1
    hit = fx == target
    steps = [] if trace else None
    while not (hit and termination.stop_at_optimum) and not termination.exhausted(evaluations):
        x, fx, fy, info = step_fn()
        evaluations += 1
        if steps is not None:
            steps.append(dict(info, t=evaluations - 1, fitness=fx))
        if fy == target:
            hit = True
    sign = 1.0 if fitness.direction == "maximize" else -1.0
    return RunRecord(evaluations=evaluations, success=hit, final_fitness=sign * fx, best=x, trace=steps)


def run_sd_rls_r(fitness: FitnessFunction, termination: TerminationCriterion, rng: RandomSource,
                 R: float, accept_equal: bool = False, trace: bool = False) -> RunRecord:
    def make_step(x, fx):
        state = SdRlsState(x, fx, rate=1, counter=0, R=R, accept_equal=accept_equal)

        def one():
            rate = state.rate
            event = sd_rls_r_step(state, fitness, rng)
            # a rejected offspring cannot be the optimum under elitist selection
            fy = state.current_fitness if event != REJECTED else -math.inf
            return state.current, state.current_fitness, fy, {"rate": rate, "event": event}
        return one

    return _drive(fitness, termination, rng, make_step, trace)


def run_fast_ea(fitness: FitnessFunction, termination: TerminationCriterion, rng: RandomSource,
                beta: float = 1.5, accept_equal: bool = True, trace: bool = False) -> RunRecord:
    sampler = HeavyTailSampler(fitness.n, beta)

    def make_step(x, fx):
        cur = [x, fx]

        def one():
            y, fy, event, r = fast_ea_step(cur[0], cur[1], sampler, fitness, rng, accept_equal)
            cur[0], cur[1] = y, fy
            return y, fy, fy if event != REJECTED else -math.inf, {"rate": r, "event": event}
        return one

    return _drive(fitness, termination, rng, make_step, trace)


def run_rls12(fitness: FitnessFunction, termination: TerminationCriterion, rng: RandomSource,
              accept_equal: bool = True, trace: bool = False) -> RunRecord:
    def make_step(x, fx):
        cur = [x, fx]

        def one():
            y, fy, event, r = rls12_step(cur[0], cur[1], fitness, rng, accept_equal)
            cur[0], cur[1] = y, fy
            return y, fy, fy if event != REJECTED else -math.inf, {"rate": r, "event": event}
        return one

    return _drive(fitness, termination, rng, make_step, trace)


def run_one_plus_one_ea(fitness: FitnessFunction, termination: TerminationCriterion,
                        rng: RandomSource, accept_equal: bool = True,
                        trace: bool = False) -> RunRecord:
    def make_step(x, fx):
        cur = [x, fx]

        def one():
            y, fy, event = one_plus_one_ea_step(cur[0], cur[1], fitness, rng, accept_equal)
            cur[0], cur[1] = y, fy
            return y, fy, fy if event != REJECTED else -math.inf, {"event": event}
        return one

    return _drive(fitness, termination, rng, make_step, trace)
