"""Bitstrings, seeded randomness and exact-k-bit-flip mutation.

Every random decision in the package is drawn as a uniform double from a
:class:`RandomSource`; integers are derived from doubles by flooring.  The
compiled kernels in :mod:`flexea._kernels` consume the same generator in the
same order, which makes the reference engines and the kernels bit-identical
for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "FlexEAError",
    "InvalidSizeError",
    "InvalidRateError",
    "InvalidArgumentError",
    "BitString",
    "RandomSource",
    "random_bitstring",
    "flip_k_bits",
    "sample_flip_positions",
    "hamming_distance",
]


class FlexEAError(ValueError):
    """Base class for all errors raised by this package."""


class InvalidSizeError(FlexEAError):
    pass


class InvalidRateError(FlexEAError):
    pass


class InvalidArgumentError(FlexEAError):
    pass


@dataclass(frozen=True)
class BitString:
    """Fixed-length binary string packed into a Python int.

    Bit ``i`` of ``value`` holds position ``i``; position 0 is the leftmost
    character of :meth:`__str__`.
    """

    value: int
    n: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSizeError(f"bitstring length must be positive, got {self.n}")
        if self.value < 0 or self.value >> self.n:
            raise InvalidArgumentError("value has bits outside the declared length")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "BitString":
        value = 0
        n = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise InvalidArgumentError(f"bit {i} is not binary: {b!r}")
            if b:
                value |= 1 << i
            n += 1
        return cls(value, n)

    @classmethod
    def from_string(cls, s: str) -> "BitString":
        if set(s) - {"0", "1"}:
            raise InvalidArgumentError(f"not a bitstring: {s!r}")
        return cls.from_bits(int(c) for c in s)

    @classmethod
    def zeros(cls, n: int) -> "BitString":
        return cls(0, n)

    @classmethod
    def ones(cls, n: int) -> "BitString":
        return cls((1 << n) - 1, n)

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> int:
        if not -self.n <= i < self.n:
            raise IndexError(i)
        return (self.value >> (i % self.n)) & 1

    def __iter__(self):
        v = self.value
        for _ in range(self.n):
            yield v & 1
            v >>= 1

    def __str__(self) -> str:
        return "".join("1" if b else "0" for b in self)

    def ones_count(self) -> int:
        return self.value.bit_count()

    def zeros_count(self) -> int:
        return self.n - self.value.bit_count()

    def leading_ones(self) -> int:
        # trailing ones of the packed int == leading ones of the string
        v = self.value
        return ((~v) & (v + 1)).bit_length() - 1

    def flip(self, positions: Iterable[int]) -> "BitString":
        mask = 0
        for p in positions:
            mask ^= 1 << p
        return BitString(self.value ^ mask, self.n)

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.uint8, count=self.n)

    @classmethod
    def from_array(cls, arr) -> "BitString":
        return cls.from_bits(int(b) for b in np.asarray(arr).ravel())


class RandomSource:
    """Seeded PCG64 stream; use one instance per thread.

    ``generator`` is exposed so compiled kernels can advance the same stream.
    """

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise InvalidArgumentError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(seed))

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed})"

    def random(self) -> float:
        """Uniform real in [0, 1)."""
        return self.generator.random()

    def randoms(self, size: int) -> np.ndarray:
        return self.generator.random(size)

    def integer(self, a: int, b: int) -> int:
        """Uniform integer in [a..b] (inclusive)."""
        if b < a:
            raise InvalidArgumentError(f"empty range [{a}..{b}]")
        return a + int(self.generator.random() * (b - a + 1))

    def bitstring(self, n: int) -> BitString:
        return random_bitstring(n, self)


def random_bitstring(n: int, rng: RandomSource) -> BitString:
    """Uniformly random bitstring of length ``n``; consumes ``n`` doubles."""
    if n < 1:
        raise InvalidSizeError(f"n must be >= 1, got {n}")
    draws = rng.randoms(n) < 0.5
    value = int.from_bytes(np.packbits(draws, bitorder="little").tobytes(), "little")
    return BitString(value, n)


def sample_flip_positions(n: int, r: int, rng: RandomSource) -> list[int]:
    """``r`` distinct positions of ``range(n)`` by partial Fisher-Yates.

    The permutation is kept sparse: only displaced slots are stored.
    """
    if not 1 <= r <= n:
        raise InvalidRateError(f"rate must lie in [1..{n}], got {r}")
    slots: dict[int, int] = {}
    out = []
    for j, u in enumerate(rng.randoms(r)):
        k = j + int(u * (n - j))
        picked = slots.get(k, k)
        slots[k] = slots.get(j, j)
        out.append(picked)
    return out


def flip_k_bits(x: BitString, r: int, rng: RandomSource) -> BitString:
    """Copy of ``x`` with exactly ``r`` uniformly chosen bits flipped."""
    return x.flip(sample_flip_positions(x.n, r, rng))


def hamming_distance(x: BitString, y: BitString) -> int:
    if x.n != y.n:
        raise InvalidArgumentError(f"length mismatch: {x.n} != {y.n}")
    return (x.value ^ y.value).bit_count()
