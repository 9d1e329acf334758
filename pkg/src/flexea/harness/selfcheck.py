"""Property suites behind ``flexea validate``.

Each check returns a :class:`CheckResult`; none of them raise on failure.
``engine_invariants`` is also what the test suite uses for the randomized
trace audit.
"""
from __future__ import annotations

import io
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .. import engine
from ..benchmarks import FitnessFunction, Jump, LeadingOnes, OneMax, TrimmedOneMax
from ..core import RandomSource
from ..optimizers import FlexEA
from ..results import TerminationCriterion
from ..schedule import (
    ActiveRates,
    RateSchedule,
    distribute_mass,
    heavy_tailed_lower_bounds,
    water_filling_oracle,
)

__all__ = [
    "CheckResult",
    "InvariantViolation",
    "random_mass_instance",
    "mass_distribution",
    "heavy_tailed_mass",
    "random_engine_case",
    "audit_run",
    "engine_invariants",
    "kernel_equivalence",
    "run_all",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail} ({self.seconds:.2f}s)"


class InvariantViolation(AssertionError):
    pass


def _timed(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed CLI
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, ok, detail, time.perf_counter() - start)


def random_mass_instance(gen: np.random.Generator, max_n: int = 64):
    """Random schedule with total floor mass at most one plus a nonempty active set."""
    n = int(gen.integers(1, max_n + 1))
    raw = gen.exponential(size=n)
    if gen.random() < 0.3:
        # a few heavy floors so that pinning actually happens
        raw[gen.integers(0, n, size=max(1, n // 8))] *= 20.0
    total = float(gen.random())
    lam = raw / raw.sum() * total
    schedule = RateSchedule(lam, np.ones(n))
    size = int(gen.integers(1, n + 1))
    active = [int(r) + 1 for r in gen.choice(n, size=size, replace=False)]
    return schedule, active


def mass_distribution(instances: int = 10_000, seed: int = 0) -> tuple[bool, str]:
    """Compare the incremental distribution with the water-filling oracle and check the vector."""
    gen = np.random.default_rng(seed)
    worst_oracle = 0.0
    failures: list[str] = []
    for i in range(instances):
        schedule, active = random_mass_instance(gen)
        lam = schedule.lower_bounds
        p = distribute_mass(ActiveRates(schedule, active), schedule)
        q = water_filling_oracle(active, schedule)
        worst_oracle = max(worst_oracle, float(np.max(np.abs(p - q))))
        mask = np.zeros(schedule.n, dtype=bool)
        mask[[r - 1 for r in active]] = True
        free = mask & (p > lam)
        if abs(math.fsum(p) - 1.0) > 1e-9:
            failures.append(f"#{i}: sum {math.fsum(p)!r}")
        elif (p < lam).any():
            failures.append(f"#{i}: below floor")
        elif not np.array_equal(p[~mask], lam[~mask]):
            failures.append(f"#{i}: inactive rate off its floor")
        elif free.any() and np.ptp(p[free]) > 1e-10:
            failures.append(f"#{i}: unpinned spread {np.ptp(p[free])!r}")
        if len(failures) >= 5:
            break
    ok = worst_oracle <= 1e-10 and not failures
    detail = f"{instances} instances, max |p - oracle| = {worst_oracle:.2e}"
    if failures:
        detail += "; " + ", ".join(failures)
    return ok, detail


def heavy_tailed_mass() -> tuple[bool, str]:
    worst = 0.0
    for n in (1, 10, 100, 10_000):
        for beta in (1.1, 1.5, 1.9):
            worst = max(worst, abs(math.fsum(heavy_tailed_lower_bounds(n, beta)) - 0.5))
    return worst <= 1e-12, f"max |sum - 1/2| = {worst:.2e}"


def random_engine_case(gen: np.random.Generator):
    """Small random (fitness, schedule, termination) triple.

    Count bounds are kept tiny so that expiries, successions and global
    resets all occur within a few hundred steps.
    """
    n = int(gen.integers(1, 13))
    kind = int(gen.integers(0, 4))
    if kind == 0:
        fitness: FitnessFunction = OneMax(n)
    elif kind == 1:
        fitness = LeadingOnes(n)
    elif kind == 2:
        fitness = Jump(n, int(gen.integers(1, n + 1)))
    else:
        fitness = TrimmedOneMax(n, int(gen.integers(0, n // 2 + 1)) if n > 1 else 0)
    if gen.random() < 0.25:
        schedule = RateSchedule.recommended(n)
    else:
        raw = gen.exponential(size=n)
        lam = raw / raw.sum() * float(gen.random())
        if gen.random() < 0.2:
            lam[gen.integers(0, n)] = 0.0
        T = gen.integers(1, 8, size=n).astype(float)
        schedule = RateSchedule(lam, T)
    termination = TerminationCriterion(int(gen.integers(2, 400)), bool(gen.random() < 0.5))
    return fitness, schedule, termination


def audit_run(fitness: FitnessFunction, schedule: RateSchedule,
              termination: TerminationCriterion, seed: int) -> int:
    """Run the reference engine with per-step assertions; returns the number of steps.

    Raises :class:`InvariantViolation` with the offending step on failure.
    """
    n = fitness.n
    prev: dict = {}

    def fail(outcome, msg):
        raise InvariantViolation(f"step {outcome.t}: {msg} ({outcome.to_json()})")

    def on_step(state: engine.ArchiveState, out: engine.StepOutcome) -> None:
        r = out.chosen_rate
        if not 1 <= r <= n:
            fail(out, "rate outside [1..n]")
        if state.current_fitness < prev["fitness"]:
            fail(out, "elitism violated")
        if state.evaluations != out.t + 1:
            fail(out, "evaluation count is not steps + 1")
        if fitness.score(state.current) != state.current_fitness:
            fail(out, "stored fitness differs from re-evaluation")
        if len(state.active) == 0:
            fail(out, "empty archive")
        if engine.RATE_ADDED in out.archive_events and out.event != engine.STRICT_IMPROVEMENT:
            fail(out, "rate added without strict improvement")
        if engine.GLOBAL_RESET in out.archive_events and engine.RATE_EXPIRED in out.archive_events:
            fail(out, "reset and expiry in the same step")
        expected = prev["fitness"] if out.event == engine.REJECTED else out.offspring_fitness
        if state.current_fitness != expected or out.fitness != expected:
            fail(out, "current fitness does not match the selection outcome")
        if out.event == engine.STRICT_IMPROVEMENT:
            if out.offspring_fitness <= prev["fitness"]:
                fail(out, "improvement flagged without improvement")
            if r not in state.active or state.u != 0 or state.counters[r - 1] != 0:
                fail(out, "improvement did not activate the rate and clear counters")
        else:
            if out.offspring_fitness > prev["fitness"]:
                fail(out, "improvement not accepted")
            equal = out.offspring_fitness == prev["fitness"]
            if equal != (out.event == engine.EQUAL_ACCEPTED):
                fail(out, "equal offspring handling")
            if engine.GLOBAL_RESET in out.archive_events:
                if out.archive != [1] or state.u != 0 or state.counters[0] != 0:
                    fail(out, "reset must leave archive {1} with zero counters")
            elif state.u != prev["u"] + 1:
                fail(out, "failure counter u did not advance")
            succ = [e for e in out.archive_events if e.startswith("succession-to(")]
            if succ:
                s = int(succ[0][len("succession-to("):-1])
                if s != (r % n) + 1 or out.archive != [s] or state.counters[s - 1] != 0:
                    fail(out, "wraparound succession")
            if engine.RATE_EXPIRED in out.archive_events and r in state.active and not succ:
                fail(out, "expired rate still active")
        prev["fitness"] = state.current_fitness
        prev["u"] = state.u

    rng = RandomSource(seed)
    state0 = engine.init_state(n, schedule, fitness, RandomSource(seed))
    prev.update(fitness=state0.current_fitness, u=0)
    buf = io.StringIO()
    record = engine.run(n, schedule, fitness, termination, rng, trace=True, trace_file=buf,
                        on_step=on_step)
    if termination.max_evaluations is not None and record.evaluations > termination.max_evaluations:
        raise InvariantViolation("budget exceeded")
    if record.success != (fitness.optimum_score in
                          [s.offspring_fitness for s in record.trace] + [state0.current_fitness]):
        raise InvariantViolation("success flag disagrees with the trace")
    if record.success and termination.stop_at_optimum and record.final_fitness != fitness.optimum_value:
        raise InvariantViolation("success without optimal final fitness")
    replay = io.StringIO()
    engine.run(n, schedule, fitness, termination, RandomSource(seed), trace=True, trace_file=replay)
    if replay.getvalue() != buf.getvalue():
        raise InvariantViolation("replay with the same seed produced a different trace")
    return len(record.trace)


def engine_invariants(runs: int = 1000, seed: int = 0) -> tuple[bool, str]:
    gen = np.random.default_rng(seed)
    steps = 0
    for i in range(runs):
        fitness, schedule, termination = random_engine_case(gen)
        try:
            steps += audit_run(fitness, schedule, termination, seed=i)
        except InvariantViolation as exc:
            return False, f"run {i} on {fitness!r}: {exc}"
    return True, f"{runs} runs, {steps} audited steps"


def kernel_equivalence(runs: int = 50, seed: int = 0) -> tuple[bool, str]:
    """The compiled loop must reproduce the reference engine exactly."""
    gen = np.random.default_rng(seed)
    for i in range(runs):
        n = int(gen.integers(2, 40))
        fitness = [OneMax(n), LeadingOnes(n), Jump(n, min(2, n))][i % 3]
        budget = int(gen.integers(10, 3000))
        a = FlexEA(max_evaluations=budget, engine="python").run(fitness, i)
        b = FlexEA(max_evaluations=budget, engine="compiled").run(fitness, i)
        if (a.evaluations, a.success, a.final_fitness, a.best) != (
                b.evaluations, b.success, b.final_fitness, b.best):
            return False, f"run {i} on {fitness!r}: python {a.evaluations} vs compiled {b.evaluations}"
    return True, f"{runs} paired runs identical"


def run_all(quick: bool = False, seed: int = 0) -> list[CheckResult]:
    scale = 10 if quick else 1
    return [
        _timed("mass distribution vs oracle", lambda: mass_distribution(10_000 // scale, seed)),
        _timed("heavy-tailed floors sum to 1/2", heavy_tailed_mass),
        _timed("engine invariants", lambda: engine_invariants(1000 // scale, seed)),
        _timed("compiled/reference equivalence", lambda: kernel_equivalence(50 // scale, seed)),
    ]
