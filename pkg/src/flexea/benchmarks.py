"""Pseudo-Boolean benchmark functions and the penalized MST objective."""
from __future__ import annotations

import math
from dataclasses import dataclass
from os import PathLike
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import BitString, FlexEAError, InvalidArgumentError, RandomSource

__all__ = [
    "InvalidGraphError",
    "FitnessFunction",
    "KernelSpec",
    "OneMax",
    "LeadingOnes",
    "TrimmedOneMax",
    "Jump",
    "TwoRates",
    "TwoRatesParams",
    "GeneralizedHurdles",
    "ResiduePattern",
    "MSTFitness",
    "WeightedGraph",
    "UnionFind",
    "onemax",
    "leading_ones",
    "trimmed_onemax",
    "jump",
    "two_rates",
    "generalized_hurdles",
    "mst_fitness",
    "kruskal_mst",
    "edge_ranks",
    "mst_runtime_bound",
    "make_benchmark",
    "BENCHMARKS",
]

MAXIMIZE = "maximize"
MINIMIZE = "minimize"

# kernel dispatch codes, mirrored in flexea._kernels
CODE_LEVEL_TABLE = 0
CODE_LEADING_ONES = 1
CODE_MST = 2


class InvalidGraphError(FlexEAError):
    pass


class KernelSpec(NamedTuple):
    """Flat description of a fitness function for the compiled loops.

    All values are in maximization form.
    """

    code: int
    table: np.ndarray  # score per ones-count for level functions
    ints: np.ndarray  # small integer parameters
    edges: np.ndarray  # (m, 3) int64, MST only
    target: float


_EMPTY_I = np.zeros(0, dtype=np.int64)
_EMPTY_E = np.zeros((0, 3), dtype=np.int64)


class FitnessFunction:
    """Base class: ``evaluate`` gives the raw value, ``score`` the maximization form."""

    name = "fitness"
    direction = MAXIMIZE

    def __init__(self, n: int):
        if n < 1:
            raise InvalidArgumentError(f"problem size must be positive, got {n}")
        self.n = int(n)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"

    def __call__(self, x: BitString) -> float:
        return self.evaluate(x)

    def evaluate(self, x: BitString) -> float:
        raise NotImplementedError

    @property
    def optimum_value(self) -> float:
        raise NotImplementedError

    def _check(self, x: BitString) -> None:
        if x.n != self.n:
            raise InvalidArgumentError(f"{self.name} expects length {self.n}, got {x.n}")

    def score(self, x: BitString) -> float:
        v = self.evaluate(x)
        return v if self.direction == MAXIMIZE else -v

    @property
    def optimum_score(self) -> float:
        v = self.optimum_value
        return v if self.direction == MAXIMIZE else -v

    def is_optimum(self, x: BitString) -> bool:
        return self.evaluate(x) == self.optimum_value

    def kernel_spec(self) -> KernelSpec | None:
        """Description for the compiled loops, or None if only Python evaluation works."""
        return None


class LevelFunction(FitnessFunction):
    """Fitness that depends on the number of ones only."""

    def level_value(self, ones: int) -> float:
        raise NotImplementedError

    def evaluate(self, x: BitString) -> float:
        self._check(x)
        return self.level_value(x.ones_count())

    def kernel_spec(self) -> KernelSpec:
        table = np.array([self.level_value(j) for j in range(self.n + 1)], dtype=float)
        return KernelSpec(CODE_LEVEL_TABLE, table, _EMPTY_I, _EMPTY_E, float(self.optimum_score))


def onemax(x: BitString) -> float:
    return float(x.ones_count())


def leading_ones(x: BitString) -> float:
    return float(x.leading_ones())


def trimmed_onemax(k: int, x: BitString) -> float:
    """``k + |x|_1`` up to ``n - k`` ones, ``n - |x|_1`` beyond."""
    n = x.n
    if not 0 <= k <= n:
        raise InvalidArgumentError(f"k must lie in [0..{n}], got {k}")
    ones = x.ones_count()
    return float(k + ones if ones <= n - k else n - ones)


def jump(k: int, x: BitString) -> float:
    """Jump with gap ``k``; the all-zeros string is on the OneMax branch."""
    n = x.n
    if not 1 <= k <= n:
        raise InvalidArgumentError(f"k must lie in [1..{n}], got {k}")
    ones = x.ones_count()
    return float(k + ones if ones <= n - k or ones == n else n - ones)


class OneMax(LevelFunction):
    name = "onemax"

    def level_value(self, ones: int) -> float:
        return float(ones)

    @property
    def optimum_value(self) -> float:
        return float(self.n)


class LeadingOnes(FitnessFunction):
    name = "leading-ones"

    def evaluate(self, x: BitString) -> float:
        self._check(x)
        return leading_ones(x)

    @property
    def optimum_value(self) -> float:
        return float(self.n)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(CODE_LEADING_ONES, np.zeros(0), _EMPTY_I, _EMPTY_E, float(self.n))


class TrimmedOneMax(LevelFunction):
    name = "trimmed-onemax"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        if not 0 <= k <= n:
            raise InvalidArgumentError(f"k must lie in [0..{n}], got {k}")
        self.k = int(k)

    def __repr__(self) -> str:
        return f"TrimmedOneMax(n={self.n}, k={self.k})"

    def level_value(self, ones: int) -> float:
        return float(self.k + ones if ones <= self.n - self.k else self.n - ones)

    @property
    def optimum_value(self) -> float:
        return float(self.n)


class Jump(LevelFunction):
    name = "jump"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        if not 1 <= k <= n:
            raise InvalidArgumentError(f"k must lie in [1..{n}], got {k}")
        self.k = int(k)

    def __repr__(self) -> str:
        return f"Jump(n={self.n}, k={self.k})"

    def level_value(self, ones: int) -> float:
        n, k = self.n, self.k
        return float(k + ones if ones <= n - k or ones == n else n - ones)

    @property
    def optimum_value(self) -> float:
        return float(self.n + self.k)


@dataclass(frozen=True)
class ResiduePattern:
    """Hurdle-level predicate: level index ``i`` is feasible unless ``i % modulus`` is listed."""

    modulus: int = 3
    infeasible: tuple[int, ...] = (1,)

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise InvalidArgumentError(f"modulus must be positive, got {self.modulus}")
        object.__setattr__(self, "infeasible", tuple(sorted(set(self.infeasible))))

    def __call__(self, i: int) -> bool:
        return i % self.modulus not in self.infeasible


def generalized_hurdles(n: int, s: int, g: int, pattern: Callable[[int], bool],
                        x: BitString, upper: int | None = None) -> float:
    """OneMax outside ``[s, upper)``; inside, only levels ``s + i*g`` with ``pattern(i)`` keep their value."""
    upper = (3 * n) // 4 if upper is None else upper
    _check_hurdle_geometry(n, s, g, upper)
    if x.n != n:
        raise InvalidArgumentError(f"expected length {n}, got {x.n}")
    return _hurdle_value(x.ones_count(), s, g, upper, pattern)


def _check_hurdle_geometry(n: int, s: int, g: int, upper: int) -> None:
    if g < 1 or s < 0 or not s <= upper <= n:
        raise InvalidArgumentError(
            f"inconsistent hurdle geometry: need g >= 1 and 0 <= s <= upper <= n "
            f"(n={n}, s={s}, g={g}, upper={upper})"
        )


def _hurdle_value(ones: int, s: int, g: int, upper: int, pattern) -> float:
    if ones < s or ones >= upper:
        return float(ones)
    offset = ones - s
    if offset % g == 0 and pattern(offset // g):
        return float(ones)
    return -1.0


class GeneralizedHurdles(LevelFunction):
    name = "hurdles"

    def __init__(self, n: int, s: int, g: int, pattern: Callable[[int], bool] | None = None,
                 upper: int | None = None):
        super().__init__(n)
        self.upper = (3 * n) // 4 if upper is None else int(upper)
        _check_hurdle_geometry(n, s, g, self.upper)
        self.s = int(s)
        self.g = int(g)
        self.pattern = ResiduePattern() if pattern is None else pattern

    def __repr__(self) -> str:
        return f"GeneralizedHurdles(n={self.n}, s={self.s}, g={self.g}, upper={self.upper})"

    def level_value(self, ones: int) -> float:
        return _hurdle_value(ones, self.s, self.g, self.upper, self.pattern)

    def feasible_levels(self) -> list[int]:
        return [j for j in range(self.s, self.upper) if self.level_value(j) >= 0]

    @property
    def optimum_value(self) -> float:
        return float(self.n)


@dataclass(frozen=True)
class TwoRatesParams:
    """Geometry with ``s = 3n/4 - sqrt(n)`` and hurdle unit ``g = log2(n)``.

    Only sizes where ``s``, ``3n/4``, ``g`` and ``sqrt(n)/g`` are all integers
    are accepted (16, 256, 65536, ...).
    """

    n: int

    def __post_init__(self) -> None:
        n = self.n
        root = math.isqrt(n) if n > 0 else -1
        g = n.bit_length() - 1 if n > 0 else -1
        ok = (
            n >= 4
            and root * root == n
            and (3 * n) % 4 == 0
            and 1 << g == n
            and g > 0
            and root % g == 0
        )
        if not ok:
            raise InvalidArgumentError(
                f"n={n}: 3n/4 - sqrt(n), 3n/4, log2(n) and sqrt(n)/log2(n) must all be integers"
            )

    @property
    def upper(self) -> int:
        return (3 * self.n) // 4

    @property
    def s(self) -> int:
        return self.upper - math.isqrt(self.n)

    @property
    def g(self) -> int:
        return self.n.bit_length() - 1

    def feasible_levels(self) -> list[int]:
        out = []
        i = 0
        while self.s + i * self.g <= self.upper:
            if i % 3 != 1:
                out.append(self.s + i * self.g)
            i += 1
        return out


def two_rates(params: TwoRatesParams, x: BitString) -> float:
    if x.n != params.n:
        raise InvalidArgumentError(f"expected length {params.n}, got {x.n}")
    return _hurdle_value(x.ones_count(), params.s, params.g, params.upper, ResiduePattern())


class TwoRates(GeneralizedHurdles):
    name = "two-rates"

    def __init__(self, n: int):
        self.params = TwoRatesParams(n)
        p = self.params
        super().__init__(n, p.s, p.g, ResiduePattern(3, (1,)), p.upper)

    def __repr__(self) -> str:
        return f"TwoRates(n={self.n})"


class UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))
        self.components = size

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        self.components -= 1
        return True


class WeightedGraph:
    """Connected undirected graph with positive integer edge weights.

    Vertices are ``0..vertex_count-1``; ``penalty`` is the base ``M`` of the
    MST fitness and defaults to ``vertex_count**2 * w_max``.
    """

    def __init__(self, vertex_count: int, edges: Sequence[tuple[int, int, int]],
                 penalty: int | None = None):
        self.vertex_count = int(vertex_count)
        self.edges = [tuple(int(v) for v in e) for e in edges]
        if self.vertex_count < 1:
            raise InvalidGraphError("graph needs at least one vertex")
        if not self.edges:
            raise InvalidGraphError("graph has no edges")
        for i, (u, v, w) in enumerate(self.edges):
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InvalidGraphError(f"edge {i} has an endpoint outside [0..{self.vertex_count - 1}]")
            if w < 1:
                raise InvalidGraphError(f"edge {i} has non-positive weight {w}")
        self.w_max = max(w for _, _, w in self.edges)
        min_penalty = self.vertex_count**2 * self.w_max
        self.penalty = min_penalty if penalty is None else int(penalty)
        if self.penalty < min_penalty:
            raise InvalidGraphError(f"penalty {self.penalty} below n_v^2 * w_max = {min_penalty}")
        uf = UnionFind(self.vertex_count)
        for u, v, _ in self.edges:
            uf.union(u, v)
        if uf.components != 1:
            raise InvalidGraphError("graph is not connected")

    @property
    def m(self) -> int:
        return len(self.edges)

    def __repr__(self) -> str:
        return f"WeightedGraph(vertex_count={self.vertex_count}, m={self.m})"

    @classmethod
    def from_file(cls, path: str | PathLike, penalty: int | None = None) -> "WeightedGraph":
        """Read ``n_v m`` followed by ``m`` lines ``u v w`` (0-based vertices)."""
        with open(path) as fh:
            rows = [line.split() for line in fh if line.strip()]
        try:
            n_v, m = (int(t) for t in rows[0])
            edges = [tuple(int(t) for t in row) for row in rows[1:]]
        except (ValueError, IndexError):
            raise InvalidGraphError(f"{path}: malformed graph file") from None
        if len(edges) != m or any(len(e) != 3 for e in edges):
            raise InvalidGraphError(f"{path}: expected {m} lines of 'u v w'")
        return cls(n_v, edges, penalty)

    def to_file(self, path: str | PathLike) -> None:
        with open(path, "w") as fh:
            fh.write(f"{self.vertex_count} {self.m}\n")
            for u, v, w in self.edges:
                fh.write(f"{u} {v} {w}\n")

    @classmethod
    def random_connected(cls, vertex_count: int, m: int, w_max: int,
                         rng: RandomSource) -> "WeightedGraph":
        """Random spanning tree plus distinct extra edges, weights uniform in ``[1..w_max]``."""
        max_edges = vertex_count * (vertex_count - 1) // 2
        if not vertex_count - 1 <= m <= max_edges:
            raise InvalidGraphError(f"m={m} impossible for a simple connected graph on {vertex_count} vertices")
        order = list(range(vertex_count))
        for i in range(vertex_count - 1, 0, -1):
            j = rng.integer(0, i)
            order[i], order[j] = order[j], order[i]
        pairs = set()
        for i in range(1, vertex_count):
            parent = order[rng.integer(0, i - 1)]
            pairs.add((min(parent, order[i]), max(parent, order[i])))
        while len(pairs) < m:
            u, v = rng.integer(0, vertex_count - 1), rng.integer(0, vertex_count - 1)
            if u != v:
                pairs.add((min(u, v), max(u, v)))
        edges = [(u, v, rng.integer(1, w_max)) for u, v in sorted(pairs)]
        return cls(vertex_count, edges)

    def edge_array(self) -> np.ndarray:
        return np.array(self.edges, dtype=np.int64).reshape(-1, 3)


def _components(graph: WeightedGraph, x: BitString) -> int:
    uf = UnionFind(graph.vertex_count)
    for i, (u, v, _) in enumerate(graph.edges):
        if (x.value >> i) & 1:
            uf.union(u, v)
    return uf.components


def mst_fitness(graph: WeightedGraph, x: BitString) -> float:
    """Penalized edge-set cost (minimized); every spanning tree beats every non-tree."""
    if x.n != graph.m:
        raise InvalidArgumentError(f"edge selection has length {x.n}, graph has {graph.m} edges")
    M = graph.penalty
    c = _components(graph, x)
    weight = sum(w for i, (_, _, w) in enumerate(graph.edges) if (x.value >> i) & 1)
    return float(M * M * (c - 1) + M * (x.ones_count() - (graph.vertex_count - 1)) + weight)


def kruskal_mst(graph: WeightedGraph) -> tuple[int, list[int]]:
    """Minimum spanning tree weight and edge indices; ties broken by edge index."""
    uf = UnionFind(graph.vertex_count)
    chosen = []
    total = 0
    for i in sorted(range(graph.m), key=lambda i: (graph.edges[i][2], i)):
        u, v, w = graph.edges[i]
        if uf.union(u, v):
            chosen.append(i)
            total += w
    if uf.components != 1:
        raise InvalidGraphError("graph is not connected")
    return total, sorted(chosen)


def edge_ranks(graph: WeightedGraph) -> list[int]:
    ranks = [0] * graph.m
    for pos, i in enumerate(sorted(range(graph.m), key=lambda i: (graph.edges[i][2], i)), 1):
        ranks[i] = pos
    return ranks


def mst_runtime_bound(graph: WeightedGraph) -> float:
    """``(m^2/2) * (1 + ln(sum of edge ranks))``."""
    m = graph.m
    return (m * m / 2.0) * (1.0 + math.log(sum(edge_ranks(graph))))


class MSTFitness(FitnessFunction):
    name = "mst"
    direction = MINIMIZE

    def __init__(self, graph: WeightedGraph):
        super().__init__(graph.m)
        self.graph = graph
        self.mst_weight, self.mst_edges = kruskal_mst(graph)

    def __repr__(self) -> str:
        return f"MSTFitness({self.graph!r})"

    def evaluate(self, x: BitString) -> float:
        return mst_fitness(self.graph, x)

    def components(self, x: BitString) -> int:
        return _components(self.graph, x)

    def is_spanning_tree(self, x: BitString) -> bool:
        return x.ones_count() == self.graph.vertex_count - 1 and self.components(x) == 1

    @property
    def optimum_value(self) -> float:
        return float(self.mst_weight)

    def kernel_spec(self) -> KernelSpec:
        ints = np.array([self.graph.vertex_count, self.graph.penalty], dtype=np.int64)
        return KernelSpec(CODE_MST, np.zeros(0), ints, self.graph.edge_array(), -float(self.mst_weight))


BENCHMARKS = ("onemax", "leading-ones", "trimmed-onemax", "jump", "two-rates", "hurdles", "mst")


def make_benchmark(name: str, n: int | None = None, *, k: int | None = None,
                   graph: WeightedGraph | None = None, s: int | None = None,
                   g: int | None = None, upper: int | None = None,
                   pattern: Callable[[int], bool] | None = None) -> FitnessFunction:
    """Build a benchmark by its harness name."""
    if name == "mst":
        if graph is None:
            raise InvalidArgumentError("the mst benchmark needs a graph")
        return MSTFitness(graph)
    if n is None:
        raise InvalidArgumentError(f"benchmark {name!r} needs n")
    if name == "onemax":
        return OneMax(n)
    if name == "leading-ones":
        return LeadingOnes(n)
    if name == "trimmed-onemax":
        return TrimmedOneMax(n, 0 if k is None else k)
    if name == "jump":
        if k is None:
            raise InvalidArgumentError("the jump benchmark needs k")
        return Jump(n, k)
    if name == "two-rates":
        return TwoRates(n)
    if name == "hurdles":
        if s is None or g is None:
            raise InvalidArgumentError("the hurdles benchmark needs s and g")
        return GeneralizedHurdles(n, s, g, pattern, upper)
    raise InvalidArgumentError(f"unknown benchmark {name!r}; choose from {', '.join(BENCHMARKS)}")
