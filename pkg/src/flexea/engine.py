"""Reference implementation of the flex-EA main loop.

This module is written for clarity and tracing; :mod:`flexea._kernels`
holds a compiled loop that consumes the random stream identically and is
used for bulk experiments.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, TextIO

import numpy as np

from .benchmarks import FitnessFunction
from .core import BitString, InvalidArgumentError, RandomSource, flip_k_bits, random_bitstring
from .results import RunRecord, TerminationCriterion
from .schedule import ActiveRates, RateSchedule, distribute_mass

__all__ = [
    "ArchiveState",
    "StepOutcome",
    "STRICT_IMPROVEMENT",
    "EQUAL_ACCEPTED",
    "REJECTED",
    "init_state",
    "step",
    "run",
    "sample_rate",
    "global_bound",
]

STRICT_IMPROVEMENT = "strict-improvement"
EQUAL_ACCEPTED = "equal-accepted"
REJECTED = "rejected"

RATE_ADDED = "rate-added"
RATE_EXPIRED = "rate-expired"
GLOBAL_RESET = "global-reset"


@dataclass
class ArchiveState:
    """Mutable control state of one flex-EA run.

    ``counters[i - 1]`` is the failure counter of rate ``i``.  Fitness values
    are stored in maximization form (``FitnessFunction.score``).
    """

    active: ActiveRates
    counters: np.ndarray
    u: int
    current: BitString
    current_fitness: float
    t: int = 0
    evaluations: int = 1

    @property
    def archive(self) -> list[int]:
        return self.active.sorted()


@dataclass
class StepOutcome:
    t: int
    chosen_rate: int
    offspring_fitness: float
    event: str
    archive_events: list[str] = field(default_factory=list)
    archive: list[int] = field(default_factory=list)
    u: int = 0
    fitness: float = 0.0

    def to_json(self) -> str:
        return json.dumps({
            "t": self.t,
            "rate": self.chosen_rate,
            "event": self.event,
            "archive": self.archive,
            "u": self.u,
            "fitness": self.fitness,
        })


def init_state(n: int, schedule: RateSchedule, fitness: FitnessFunction,
               rng: RandomSource) -> ArchiveState:
    if schedule.n != n or fitness.n != n:
        raise InvalidArgumentError(
            f"dimension mismatch: n={n}, schedule.n={schedule.n}, fitness.n={fitness.n}"
        )
    x = random_bitstring(n, rng)
    return ArchiveState(
        active=ActiveRates(schedule, (1,)),
        counters=np.zeros(n, dtype=np.int64),
        u=0,
        current=x,
        current_fitness=fitness.score(x),
    )


def global_bound(count_bound: float, frequency: float) -> float:
    """Failure budget ``T_m / p_m`` for the global reset."""
    if frequency <= 0.0:
        return math.inf
    return count_bound / frequency


def sample_rate(p: np.ndarray, rng: RandomSource) -> int:
    """Inverse-CDF draw of a 1-based rate from the frequency vector ``p``."""
    cdf = np.cumsum(p)
    idx = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(idx, p.size - 1) + 1


def step(state: ArchiveState, schedule: RateSchedule, fitness: FitnessFunction,
         rng: RandomSource) -> StepOutcome:
    """One iteration: sample a rate, mutate, select, update the archive."""
    p = distribute_mass(state.active, schedule)
    m = state.active.min()
    bound = global_bound(schedule.T(m), p[m - 1])
    r = sample_rate(p, rng)
    y = flip_k_bits(state.current, r, rng)
    fy = fitness.score(y)
    state.evaluations += 1
    events: list[str] = []
    c = state.counters

    if fy > state.current_fitness:
        event = STRICT_IMPROVEMENT
        state.current, state.current_fitness = y, fy
        if state.active.add(r):
            events.append(RATE_ADDED)
        state.u = 0
        c[r - 1] = 0
    else:
        if fy == state.current_fitness:
            event = EQUAL_ACCEPTED
            state.current = y
        else:
            event = REJECTED
        state.u += 1
        c[r - 1] += 1
        if state.u >= bound:
            state.u = 0
            state.active.reset(1)
            c[0] = 0
            events.append(GLOBAL_RESET)
        elif c[r - 1] >= schedule.T(r):
            if state.active.discard(r):
                events.append(RATE_EXPIRED)
            if len(state.active) == 0:
                successor = r + 1 if r + 1 <= schedule.n else 1
                state.active.add(successor)
                c[successor - 1] = 0
                events.append(f"succession-to({successor})")

    state.t += 1
    return StepOutcome(
        t=state.t,
        chosen_rate=r,
        offspring_fitness=fy,
        event=event,
        archive_events=events,
        archive=state.archive,
        u=state.u,
        fitness=state.current_fitness,
    )


def run(n: int, schedule: RateSchedule, fitness: FitnessFunction,
        termination: TerminationCriterion, rng: RandomSource, trace: bool = False,
        trace_file: TextIO | None = None,
        on_step: Callable[[ArchiveState, StepOutcome], None] | None = None) -> RunRecord:
    """Run the flex-EA until the termination criterion holds.

    With ``trace`` on, every :class:`StepOutcome` is kept in the record and,
    if ``trace_file`` is given, written to it as one JSON line.
    """
    state = init_state(n, schedule, fitness, rng)
    target = fitness.optimum_score
    steps: list[StepOutcome] | None = [] if trace else None
    hit = state.current_fitness == target
    while not (hit and termination.stop_at_optimum) and not termination.exhausted(state.evaluations):
        outcome = step(state, schedule, fitness, rng)
        if steps is not None:
            steps.append(outcome)
            if trace_file is not None:
                trace_file.write(outcome.to_json() + "\n")
        if on_step is not None:
            on_step(state, outcome)
        if outcome.offspring_fitness == target:
            hit = True
    sign = 1.0 if fitness.direction == "maximize" else -1.0
    return RunRecord(
        evaluations=state.evaluations,
        success=hit,
        final_fitness=sign * state.current_fitness,
        best=state.current,
        trace=steps,
        extra={"archive": state.archive},
    )
