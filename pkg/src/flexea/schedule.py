"""Lower-bound / count-bound parameter schemes and the mass distribution step.

Rates are 1-based throughout the public API; vectors are numpy arrays where
index ``i - 1`` belongs to rate ``i``.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable

import numpy as np

from .core import FlexEAError, InvalidArgumentError

__all__ = [
    "InvalidParameterError",
    "InvalidStateError",
    "RateSchedule",
    "ActiveRates",
    "heavy_tailed_lower_bounds",
    "standard_sd_count_bounds",
    "mst_graybox_schedule",
    "distribute_mass",
    "distribute_mass_naive",
    "water_filling_oracle",
    "load_vector",
]

LAMBDA_SUM_TOL = 1e-9


class InvalidParameterError(FlexEAError):
    pass


class InvalidStateError(FlexEAError):
    pass


def heavy_tailed_lower_bounds(n: int, beta: float) -> np.ndarray:
    """Power-law floors ``i**-beta / (2 * sum_j j**-beta)``; they sum to 1/2."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if not 1.0 < beta < 2.0:
        raise InvalidParameterError(f"beta must lie in (1, 2), got {beta}")
    weights = np.arange(1, n + 1, dtype=float) ** -beta
    return weights / (2.0 * math.fsum(weights))


def standard_sd_count_bounds(n: int, R: float) -> np.ndarray:
    """Stagnation-detection thresholds ``C(n, i) * ln R`` for ``i = 1..n``.

    Binomials are exact integers until they exceed the float range; those
    entries become ``inf``.
    """
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    if not R > 1.0:
        raise InvalidParameterError(f"R must be > 1, got {R}")
    log_r = math.log(R)
    out = np.full(n, math.inf)
    c = 1
    for i in range(1, n // 2 + 1):
        c = c * (n - i + 1) // i
        try:
            value = float(c) * log_r
        except OverflowError:
            break
        out[i - 1] = value
        out[n - i - 1] = value
    out[n - 1] = log_r
    return out


@dataclass(frozen=True, eq=False)
class RateSchedule:
    """Immutable pair of lower bounds and count bounds over rates ``1..n``."""

    lower_bounds: np.ndarray
    count_bounds: np.ndarray
    n: int = field(init=False)

    def __post_init__(self) -> None:
        lam = np.array(self.lower_bounds, dtype=float).ravel()
        T = np.array(self.count_bounds, dtype=float).ravel()
        if lam.size < 1:
            raise InvalidParameterError("schedule needs at least one rate")
        if T.size != lam.size:
            raise InvalidParameterError(
                f"lower bounds have {lam.size} entries but count bounds have {T.size}"
            )
        if np.isnan(lam).any() or np.isnan(T).any():
            raise InvalidParameterError("schedule vectors must not contain NaN")
        if (lam < 0).any() or (lam > 1).any():
            raise InvalidParameterError("lower bounds must lie in [0, 1]")
        if (T < 0).any():
            raise InvalidParameterError("count bounds must be non-negative")
        total = math.fsum(lam)
        if total > 1.0 + LAMBDA_SUM_TOL:
            raise InvalidParameterError(f"lower bounds sum to {total:.12g} > 1")
        lam.flags.writeable = False
        T.flags.writeable = False
        object.__setattr__(self, "lower_bounds", lam)
        object.__setattr__(self, "count_bounds", T)
        object.__setattr__(self, "n", int(lam.size))

    @classmethod
    def recommended(cls, n: int, beta: float = 1.5, r_exponent: float = 4.0) -> "RateSchedule":
        """Heavy-tailed floors with the standard-SD thresholds for ``R = n**r_exponent``.

        ``n = 1`` would give ``R = 1``; the base is clamped to 2 there.
        """
        R = float(max(n, 2)) ** r_exponent
        return cls(heavy_tailed_lower_bounds(n, beta), standard_sd_count_bounds(n, R))

    def lam(self, rate: int) -> float:
        return float(self.lower_bounds[rate - 1])

    def T(self, rate: int) -> float:
        return float(self.count_bounds[rate - 1])

    def order_key(self, rate: int) -> tuple[float, int]:
        # descending lower bound, ascending rate on ties
        return (-self.lower_bounds[rate - 1], rate)


def mst_graybox_schedule(m: int, c: float = 6.0, lam1: float = 0.25,
                         lam_rest: float = 1e-9) -> RateSchedule:
    """Problem-informed schedule for edge-selection problems with ``m`` edges.

    ``T_i = m**i * ln(m**c)``, ``lambda_1 = lam1``, ``lambda_2 = 1/m**2``, and
    every larger rate gets the tiny floor ``lam_rest``.
    """
    if m < 2:
        raise InvalidParameterError(f"need at least two edges, got m={m}")
    log_r = c * math.log(m)
    T = np.array([float(m) ** i * log_r for i in range(1, m + 1)])
    lam = np.full(m, lam_rest)
    lam[0] = lam1
    lam[1] = 1.0 / m**2
    return RateSchedule(lam, T)


class ActiveRates:
    """The archive: a set of rates kept ordered by descending lower bound.

    Ordering is maintained incrementally with binary insertion so the mass
    distribution never has to re-sort.
    """

    def __init__(self, schedule: RateSchedule, rates: Iterable[int] = (1,)):
        self.schedule = schedule
        self._keys: list[tuple[float, int]] = []
        self._members: set[int] = set()
        for r in rates:
            self.add(r)

    def __contains__(self, rate: int) -> bool:
        return rate in self._members

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self):
        """Rates in descending-lower-bound order."""
        return (k[1] for k in self._keys)

    def __repr__(self) -> str:
        return f"ActiveRates({sorted(self._members)})"

    def sorted(self) -> list[int]:
        return sorted(self._members)

    def min(self) -> int:
        return min(self._members)

    def add(self, rate: int) -> bool:
        if not 1 <= rate <= self.schedule.n:
            raise InvalidArgumentError(f"rate {rate} outside [1..{self.schedule.n}]")
        if rate in self._members:
            return False
        bisect.insort(self._keys, self.schedule.order_key(rate))
        self._members.add(rate)
        return True

    def discard(self, rate: int) -> bool:
        if rate not in self._members:
            return False
        key = self.schedule.order_key(rate)
        del self._keys[bisect.bisect_left(self._keys, key)]
        self._members.remove(rate)
        return True

    def reset(self, rate: int) -> None:
        self._keys.clear()
        self._members.clear()
        self.add(rate)


def _fill(ordered: list[int], active: set[int], schedule: RateSchedule) -> np.ndarray:
    lam = schedule.lower_bounds
    n = schedule.n
    mass = 1.0
    for i in range(n):
        if i + 1 not in active:
            mass -= lam[i]
    p = np.array(lam, dtype=float)
    phi = len(ordered)
    for idx, rate in enumerate(ordered):
        share = mass / (phi - idx)
        if lam[rate - 1] <= share:
            for other in ordered[idx:]:
                p[other - 1] = share
            return p
        p[rate - 1] = lam[rate - 1]
        mass -= lam[rate - 1]
    return p


def _check_active(active, schedule: RateSchedule) -> set[int]:
    rates = set(active)
    if not rates:
        raise InvalidStateError("the set of active rates is empty")
    bad = [r for r in rates if not 1 <= r <= schedule.n]
    if bad:
        raise InvalidArgumentError(f"rates {sorted(bad)} outside [1..{schedule.n}]")
    return rates


def distribute_mass(active: ActiveRates | Iterable[int], schedule: RateSchedule) -> np.ndarray:
    """Frequency vector spreading the free mass as evenly as possible over ``active``.

    Inactive rates sit exactly at their lower bound.  Active rates are
    visited in descending lower-bound order; a rate whose floor exceeds the
    current even share is pinned at its floor and the rest is redistributed.
    """
    if not isinstance(active, ActiveRates):
        active = ActiveRates(schedule, _check_active(active, schedule))
    elif len(active) == 0:
        raise InvalidStateError("the set of active rates is empty")
    return _fill(list(active), active._members, schedule)


def distribute_mass_naive(active: Iterable[int], schedule: RateSchedule) -> np.ndarray:
    """Same as :func:`distribute_mass` but sorts the active set on every call."""
    rates = _check_active(active, schedule)
    ordered = sorted(rates, key=schedule.order_key)
    return _fill(ordered, rates, schedule)


def water_filling_oracle(active: Iterable[int], schedule: RateSchedule,
                         iterations: int = 200) -> np.ndarray:
    """Reference frequency vector via bisection on the common water level.

    Finds ``v`` with ``sum_{i in F} max(lam_i, v) == M`` where ``M`` is the
    mass left after the inactive floors, then sets ``p_i = max(lam_i, v)``.
    """
    rates = _check_active(active, schedule)
    lam = np.asarray(schedule.lower_bounds, dtype=float)
    mask = np.zeros(schedule.n, dtype=bool)
    mask[[r - 1 for r in rates]] = True
    mass = 1.0 - math.fsum(lam[~mask])
    act = lam[mask]
    lo, hi = 0.0, max(mass, float(act.max()))
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if math.fsum(np.maximum(act, mid)) > mass:
            hi = mid
        else:
            lo = mid
    p = lam.copy()
    p[mask] = np.maximum(act, lo)
    return p


def load_vector(path: str | PathLike, n: int) -> np.ndarray:
    """Read exactly ``n`` reals, one per line (blank lines ignored)."""
    values = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text:
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise InvalidParameterError(f"{path}:{lineno}: not a number: {text!r}") from None
    if len(values) != n:
        raise InvalidParameterError(f"{path}: expected {n} values, found {len(values)}")
    return np.array(values)
