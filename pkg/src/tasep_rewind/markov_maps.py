"""Level maps on interlacing arrays and everything built from them: the
iterated left map, the array-level backwards process on tracked diagonals,
the reduced-word swap map with permutation tracking, its squared MCMC
sampler, and the push-block growth dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import InterlacingArray, ParticleConfig, Partition, RngStream, trunc_geom, validate_array

__all__ = [
    "SpectralParams",
    "swap_level",
    "iterated_L_q",
    "bhp_array",
    "longest_word",
    "letter_plan",
    "t_map",
    "t2_mcmc",
    "pushblock",
    "diagonal_embedding",
]


@dataclass(frozen=True)
class SpectralParams:
    """Positive spectral parameters, with the permutation currently applied.

    ``sigma[j-1]`` is the original index of the parameter attached to level j;
    identity when omitted.  The swap map requires pairwise distinct values.
    """

    c: tuple
    sigma: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if any(v <= 0 for v in self.c):
            raise ValueError("spectral parameters must be positive")
        if self.sigma is not None and sorted(self.sigma) != list(range(1, len(self.c) + 1)):
            raise ValueError("sigma must be a permutation of 1..N")

    @classmethod
    def geometric(cls, n: int, q) -> "SpectralParams":
        return cls(tuple(q ** i for i in range(n)))

    @property
    def depth(self) -> int:
        return len(self.c)

    def require_distinct(self) -> None:
        if len(set(self.c)) != len(self.c):
            raise ValueError("spectral parameters must be pairwise distinct")


def _bounds(a: InterlacingArray, j: int, k: int) -> tuple[int, int]:
    lo = max(a.entry(j - 1, k), a.entry(j + 1, k + 1))
    hi = min(a.entry(j - 1, k - 1), a.entry(j + 1, k))
    return int(lo), int(hi)


def swap_level(a: InterlacingArray, j: int, alpha: float, direction: str, rng: RngStream) -> InterlacingArray:
    """Resample row j inside its interlacing segments (L: toward the lower
    endpoint, R: toward the upper), leaving every other row untouched.

    Each entry moves independently by a truncated-geometric displacement, so
    the output always interlaces.
    """
    if not 1 <= j < a.depth:
        raise ValueError(f"need 1 <= j < depth={a.depth}")
    if direction not in ("L", "R"):
        raise ValueError("direction must be 'L' or 'R'")
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    new = []
    for k in range(1, j + 1):
        lo, hi = _bounds(a, j, k)
        old = int(a.entry(j, k))
        if not lo <= old <= hi:
            raise ValueError(f"row {j} entry {k} violates interlacing")
        if direction == "L":
            new.append(lo + trunc_geom(old - lo, alpha, rng))
        else:
            new.append(hi - trunc_geom(hi - old, alpha, rng))
    return a.with_row(j, Partition(tuple(new)))


def iterated_L_q(a: InterlacingArray, q: float, rng: RngStream) -> InterlacingArray:
    """Apply L^(1)_q, L^(2)_(q^2), ..., L^(N)_(q^N) and return the first N rows.

    The input must have depth N+1: the law of row N after its swap depends on
    row N+1, which is consumed as the top constraint.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if a.depth < 2:
        raise ValueError("need depth >= 2")
    n = a.depth - 1
    for j in range(1, n + 1):
        a = swap_level(a, j, q ** j, "L", rng)
    return InterlacingArray(a.rows[:n])


def diagonal_embedding(x: ParticleConfig, depth: int | None = None) -> InterlacingArray:
    """Array with row j = (d_1, ..., d_j): its leftmost diagonal carries the
    displacement partition of ``x``.  Depth defaults to len(d) + 1 so the top
    diagonal entry vanishes, as the restricted array dynamics requires."""
    d = x.displacements.parts
    if depth is None:
        depth = len(d) + 1
    if depth < len(d) + 1:
        raise ValueError("depth must exceed the number of displaced particles")
    return InterlacingArray(tuple(Partition(d[:j]) for j in range(1, depth + 1)))


def bhp_array(a: InterlacingArray, tau: float, rng: RngStream, diagonals: int) -> InterlacingArray:
    """Continuous-time left dynamics restricted to the K leftmost diagonals.

    Entry (level k, index j) jumps to any m with
    max(lam^(k+1)_(j+1), lam^(k-1)_j) <= m <= lam^(k)_j - 1 at rate k per
    target.  Only entries with k - j < K move; the top row must vanish on the
    tracked diagonals so that the missing levels above carry no mass.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if diagonals < 1:
        raise ValueError("need at least one tracked diagonal")
    ok, msg = validate_array(a)
    if not ok:
        raise ValueError(f"invalid array: {msg}")
    n = a.depth
    top = a.rows[-1]
    for j in range(max(1, n - diagonals + 1), n + 1):
        if top.part(j) != 0:
            raise ValueError(
                "top row must vanish on the tracked diagonals "
                f"(entry {j} of row {n} is {top.part(j)})"
            )
    rows = [list(r.parts) + [0] * (j - len(r.parts)) for j, r in enumerate(a.rows, start=1)]

    def get(lvl: int, j: int) -> float:
        if j == 0:
            return math.inf
        if lvl < 1 or lvl > n or j > lvl:
            return 0
        return rows[lvl - 1][j - 1]

    tracked = [(lvl, j) for lvl in range(1, n + 1) for j in range(max(1, lvl - diagonals + 1), lvl + 1)]
    gen = rng.generator
    now = 0.0
    while True:
        gaps = []
        total = 0.0
        for lvl, j in tracked:
            lo = max(get(lvl + 1, j + 1), get(lvl - 1, j))
            g = rows[lvl - 1][j - 1] - int(lo)
            gaps.append(g)
            total += lvl * g
        if total <= 0.0:
            break
        wait = float(gen.standard_exponential()) / total
        if now + wait > tau:
            break
        now += wait
        u = float(gen.random()) * total
        acc = 0.0
        for (lvl, j), g in zip(tracked, gaps):
            acc += lvl * g
            if u < acc:
                rows[lvl - 1][j - 1] -= rng.integer(1, g)
                break
    out = InterlacingArray(tuple(Partition(tuple(r)) for r in rows))
    if __debug__:
        ok, msg = validate_array(out)
        assert ok, msg
    return out


def longest_word(n: int) -> tuple[int, ...]:
    """The fixed reduced word (s_1...s_(n-1))(s_1...s_(n-2))...(s_1) for the
    longest permutation; it touches row n-1 once, row n-2 twice, and so on."""
    word: list[int] = []
    for block in range(n - 1, 0, -1):
        word.extend(range(1, block + 1))
    return tuple(word)


def _check_reduced(word: Sequence[int], n: int) -> None:
    if len(word) != n * (n - 1) // 2:
        raise ValueError("word length differs from the longest element's length")
    perm = list(range(1, n + 1))
    for i in word:
        if not 1 <= i <= n - 1:
            raise ValueError(f"letter s_{i} out of range for depth {n}")
        perm[i - 1], perm[i] = perm[i], perm[i - 1]
    if perm != list(range(n, 0, -1)):
        raise ValueError("word is not a reduced word for the longest permutation")


def letter_plan(
    c: Sequence,
    word: Sequence[int],
    sigma: Sequence[int] | None = None,
) -> tuple[list[tuple[int, str, object]], tuple[int, ...]]:
    """Resolve each letter of ``word`` into (row, direction, alpha).

    Letter s_i compares the parameters currently at levels i and i+1: the
    larger one on the lower level means an L move with ratio small/large,
    otherwise an R move with the inverse ratio.  The resolution is
    deterministic, so exact matrix builds and vectorized samplers can share it.
    """
    n = len(c)
    sig = list(sigma) if sigma is not None else list(range(1, n + 1))
    plan: list[tuple[int, str, object]] = []
    for i in word:
        ca = c[sig[i - 1] - 1]
        cb = c[sig[i] - 1]
        if ca == cb:
            raise ValueError("equal spectral parameters: the swap map is undefined")
        if ca > cb:
            plan.append((i, "L", cb / ca))
        else:
            plan.append((i, "R", ca / cb))
        sig[i - 1], sig[i] = sig[i], sig[i - 1]
    return plan, tuple(sig)


def t_map(
    a: InterlacingArray,
    params: SpectralParams,
    rng: RngStream,
    word: Sequence[int] | None = None,
) -> tuple[InterlacingArray, tuple[int, ...]]:
    """One sweep of the reduced-word swap map; returns (array, new sigma).

    The top row is fixed; the permutation component ends at the reversal of
    the input sigma, and letters that resolve to L moves never move entries
    rightward (asserted).
    """
    n = a.depth
    if params.depth != n:
        raise ValueError("parameter count must match the array depth")
    params.require_distinct()
    if word is None:
        word = longest_word(n)
    _check_reduced(word, n)
    plan, sigma = letter_plan(params.c, word, params.sigma)
    for row, direction, alpha in plan:
        before = a.rows[row - 1]
        a = swap_level(a, row, alpha, direction, rng)
        if __debug__ and direction == "L":
            after = a.rows[row - 1]
            assert all(after.part(k) <= before.part(k) for k in range(1, row + 1))
    return a, sigma


def t2_mcmc(
    top: Partition,
    params: SpectralParams,
    sweeps: int,
    rng: RngStream,
    start: InterlacingArray,
) -> InterlacingArray:
    """Iterate the squared swap map; its stationary law is the c-Gibbs measure
    with fixed top row ``top``."""
    if start.depth != params.depth:
        raise ValueError("start depth must match the parameter count")
    if start.rows[-1] != top:
        raise ValueError("start array does not carry the requested top row")
    ok, msg = validate_array(start)
    if not ok:
        raise ValueError(f"invalid start array: {msg}")
    a = start
    sigma = params.sigma or tuple(range(1, params.depth + 1))
    for _ in range(sweeps):
        a, sigma = t_map(a, SpectralParams(params.c, sigma), rng)
        a, sigma = t_map(a, SpectralParams(params.c, sigma), rng)
    return a


def pushblock(a: InterlacingArray, t: float, rng: RngStream) -> InterlacingArray:
    """Push-block growth: every entry carries a rate-1 clock; a ring moves the
    entry right by one unless its blocker below (lam^(j-1)_(k-1)) sits at the
    same value, and entries above are pushed as needed to restore interlacing.

    The leftmost diagonal lam^(j)_j - j evolves exactly as homogeneous TASEP;
    the rightmost column is never blocked (it is a PushTASEP).
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ok, msg = validate_array(a)
    if not ok:
        raise ValueError(f"invalid array: {msg}")
    n = a.depth
    rows = [list(r.parts) + [0] * (j - len(r.parts)) for j, r in enumerate(a.rows, start=1)]
    entries = [(j, k) for j in range(1, n + 1) for k in range(1, j + 1)]
    total = float(len(entries))
    gen = rng.generator
    now = 0.0
    while True:
        wait = float(gen.standard_exponential()) / total
        if now + wait > t:
            break
        now += wait
        idx = int(gen.random() * total)
        if idx >= len(entries):
            idx = len(entries) - 1
        j, k = entries[idx]
        if k >= 2 and rows[j - 1][k - 1] == rows[j - 2][k - 2]:
            continue  # blocked from below: the jump is suppressed
        rows[j - 1][k - 1] += 1
        for lvl in range(j + 1, n + 1):
            if rows[lvl - 1][k - 1] < rows[lvl - 2][k - 1]:
                rows[lvl - 1][k - 1] += 1
            else:
                break
    out = InterlacingArray(tuple(Partition(tuple(r)) for r in rows))
    if __debug__:
        ok, msg = validate_array(out)
        assert ok, msg
    return out
