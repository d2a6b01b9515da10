"""Shared combinatorial types and the seeded RNG-stream contract.

Particle configurations are stored canonically as partitions of displacements
``d_i = x_i + i``: the left-packed infinite tail of a configuration maps to
trailing zeros, which are stripped.  This makes the TASEP and BHP state
spaces literally Young diagrams, which is what the exact truncated-chain
oracles enumerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "Partition",
    "ParticleConfig",
    "InterlacingArray",
    "RngStream",
    "trunc_geom",
    "trunc_geom_array",
    "config_to_partition",
    "partition_to_config",
    "validate_array",
    "packed_array",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing tuple of nonnegative integers, trailing zeros stripped.

    Two partitions differing only by trailing zeros compare equal because the
    zeros never survive construction.
    """

    parts: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        parts = tuple(int(p) for p in self.parts)
        for i, p in enumerate(parts):
            if p < 0:
                raise ValueError(f"partition parts must be nonnegative, got {p}")
            if i and parts[i - 1] < p:
                raise ValueError(f"partition parts must weakly decrease: {parts}")
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        object.__setattr__(self, "parts", parts)

    @property
    def size(self) -> int:
        return sum(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def part(self, i: int) -> int:
        """The i-th part, 1-based, zero beyond the length."""
        if i < 1:
            raise IndexError("part index is 1-based")
        return self.parts[i - 1] if i <= len(self.parts) else 0

    def with_part(self, i: int, value: int) -> "Partition":
        """Copy with part i (1-based) replaced by ``value``."""
        n = max(i, len(self.parts))
        parts = [self.part(k) for k in range(1, n + 1)]
        parts[i - 1] = value
        return Partition(tuple(parts))

    def __repr__(self) -> str:
        return f"Partition({self.parts})"


@dataclass(frozen=True)
class ParticleConfig:
    """Left-packed, right-finite configuration on Z, keyed by displacements.

    Particle positions are ``x_i = d_i - i`` with ``d`` the displacement
    partition; every index beyond the stored length sits at ``x_i = -i``.
    """

    displacements: Partition = Partition()

    @classmethod
    def from_displacements(cls, parts: Iterable[int]) -> "ParticleConfig":
        return cls(Partition(tuple(parts)))

    @classmethod
    def from_positions(cls, positions: Sequence[int]) -> "ParticleConfig":
        """Build from the leading particle positions; the tail is x_i = -i.

        Raises ValueError when the positions do not strictly decrease or a
        displacement would be negative (not reachable from step by TASEP
        jumps).
        """
        disp = []
        prev = None
        for i, x in enumerate(positions, start=1):
            if prev is not None and x >= prev:
                raise ValueError(f"positions must strictly decrease, got {positions}")
            d = x + i
            if d < 0:
                raise ValueError(f"position x_{i}={x} lies left of the packed tail")
            disp.append(d)
            prev = x
        return cls(Partition(tuple(disp)))

    @property
    def n_displaced(self) -> int:
        return len(self.displacements)

    def position(self, i: int) -> int:
        return self.displacements.part(i) - i

    def positions(self, n: int | None = None) -> list[int]:
        """First ``n`` particle positions (default: all displaced ones)."""
        if n is None:
            n = len(self.displacements)
        return [self.position(i) for i in range(1, n + 1)]

    def is_step(self) -> bool:
        return len(self.displacements) == 0

    def __repr__(self) -> str:
        return f"ParticleConfig(d={self.displacements.parts})"


STEP = ParticleConfig()


def config_to_partition(x: ParticleConfig) -> Partition:
    """Canonical bijection: the displacement partition of a configuration."""
    return x.displacements


def partition_to_config(lam: Partition) -> ParticleConfig:
    """Inverse bijection: positions ``x_i = lam_i - i``."""
    return ParticleConfig(lam)


@dataclass(frozen=True)
class InterlacingArray:
    """Rows ``lam^(1) < lam^(2) < ... < lam^(N)`` with lam^(j) of length <= j.

    ``entry(j, k)`` follows the boundary conventions used by the level maps:
    index k=0 is +infinity, indices past the row length (and the whole row 0)
    are zero.
    """

    rows: tuple[Partition, ...] = ()

    def __post_init__(self) -> None:
        rows = tuple(r if isinstance(r, Partition) else Partition(tuple(r)) for r in self.rows)
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_lists(cls, rows: Iterable[Iterable[int]]) -> "InterlacingArray":
        return cls(tuple(Partition(tuple(r)) for r in rows))

    @property
    def depth(self) -> int:
        return len(self.rows)

    def row(self, j: int) -> Partition:
        return self.rows[j - 1]

    def entry(self, j: int, k: int) -> float:
        if k == 0:
            return math.inf
        if j < 1 or j > self.depth:
            return 0
        return self.rows[j - 1].part(k)

    def with_row(self, j: int, row: Partition) -> "InterlacingArray":
        rows = list(self.rows)
        rows[j - 1] = row
        return InterlacingArray(tuple(rows))

    def to_lists(self) -> list[list[int]]:
        """Rows bottom-up, each padded with zeros to its level length."""
        return [[self.rows[j - 1].part(k) for k in range(1, j + 1)] for j in range(1, self.depth + 1)]

    def __repr__(self) -> str:
        return f"InterlacingArray({[r.parts for r in self.rows]})"


def packed_array(depth: int) -> InterlacingArray:
    """The array densely packed at zero (every entry 0)."""
    return InterlacingArray(tuple(Partition() for _ in range(depth)))


def validate_array(a: InterlacingArray) -> tuple[bool, str | None]:
    """Check row lengths and interlacing; return (ok, first violation or None)."""
    for j in range(1, a.depth + 1):
        if len(a.rows[j - 1]) > j:
            return False, f"row {j} has {len(a.rows[j - 1])} positive parts (> {j})"
    for j in range(1, a.depth):
        lo, hi = a.rows[j - 1], a.rows[j]
        for k in range(1, j + 1):
            if not (hi.part(k + 1) <= lo.part(k) <= hi.part(k)):
                return False, (
                    f"interlacing fails between rows {j},{j + 1} at k={k}: "
                    f"{hi.part(k + 1)} <= {lo.part(k)} <= {hi.part(k)} is false"
                )
    return True, None


@dataclass
class RngStream:
    """Counter-based random stream keyed by (master seed, stream index).

    Uses the Philox bit generator, so identical (seed, index) pairs replay
    the identical draw sequence and distinct indices give statistically
    independent streams with no shared state.
    """

    seed: int
    index: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self) -> None:
        key = np.array([self.seed & _MASK64, self.index & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def random(self) -> float:
        return float(self._gen.random())

    def exponential(self, rate: float = 1.0) -> float:
        if rate <= 0:
            raise ValueError("exponential rate must be positive")
        return float(self._gen.exponential()) / rate

    def integer(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] inclusive."""
        return low + int(self._gen.random() * (high - low + 1))

    def pick_weighted(self, weights: Sequence[float]) -> int:
        """Index drawn proportionally to nonnegative weights."""
        total = 0.0
        for w in weights:
            total += w
        u = self._gen.random() * total
        acc = 0.0
        for i, w in enumerate(weights):
            acc += w
            if u < acc:
                return i
        return len(weights) - 1


def trunc_geom(bound: int, alpha: float, rng: RngStream) -> int:
    """Truncated geometric draw on {0, ..., bound}.

    pmf: (1 - alpha) alpha^k for k < bound, with the remaining mass alpha^bound
    sitting at k = bound.
    """
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if bound == 0 or alpha == 0.0:
        return 0
    if alpha == 1.0:
        return bound
    u = rng.random()
    if u <= 0.0:
        return bound
    k = int(math.log(u) / math.log(alpha))
    return bound if k > bound else k


def trunc_geom_array(bounds: np.ndarray, alpha: float, gen: np.random.Generator) -> np.ndarray:
    """Vectorized truncated geometric: one draw per entry of ``bounds``."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    bounds = np.asarray(bounds, dtype=np.int64)
    if np.any(bounds < 0):
        raise ValueError("bounds must be nonnegative")
    if alpha == 0.0:
        return np.zeros_like(bounds)
    if alpha == 1.0:
        return bounds.copy()
    u = gen.random(bounds.shape)
    with np.errstate(divide="ignore"):
        k = np.floor(np.log(u) / math.log(alpha))
    k = np.where(np.isfinite(k), k, np.inf)
    return np.minimum(k, bounds).astype(np.int64)
