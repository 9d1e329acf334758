"""Run records and termination criteria shared by all algorithms."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .core import BitString, InvalidArgumentError

__all__ = ["TerminationCriterion", "RunRecord"]


@dataclass(frozen=True)
class TerminationCriterion:
    """Stop on an evaluation budget, on reaching the optimum, or both.

    ``max_evaluations=None`` means unlimited; the initial evaluation counts.
    """

    max_evaluations: int | None = None
    stop_at_optimum: bool = True

    def __post_init__(self) -> None:
        if self.max_evaluations is None and not self.stop_at_optimum:
            raise InvalidArgumentError("termination needs a budget or stop_at_optimum")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise InvalidArgumentError(f"budget must be >= 1, got {self.max_evaluations}")

    @property
    def budget(self) -> int:
        """Budget in the form the compiled loops take (-1 for unlimited)."""
        return -1 if self.max_evaluations is None else int(self.max_evaluations)

    def exhausted(self, evaluations: int) -> bool:
        return self.max_evaluations is not None and evaluations >= self.max_evaluations


@dataclass
class RunRecord:
    """Outcome of one optimization run.

    ``evaluations`` includes the initial evaluation; ``success`` means the
    optimum was evaluated within the budget.  ``final_fitness`` is in the
    benchmark's own direction (e.g. MST cost, not its negation).
    """

    evaluations: int
    success: bool
    final_fitness: float
    best: BitString | None = None
    trace: list[Any] | None = None
    run_index: int = 0
    seed: int | None = None
    wall_time: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def csv_row(self) -> dict[str, Any]:
        return {
            "run_index": self.run_index,
            "seed": self.seed,
            "evaluations": self.evaluations,
            "success": int(self.success),
            "final_fitness": repr(float(self.final_fitness)),
            "wall_time_s": f"{self.wall_time:.6f}",
        }
