"""Exact small-scale machinery: Schur evaluation, c-Gibbs conditionals, exact
level-map transition matrices, truncated-chain transient laws via
uniformization, the specialization transform, and harmonic-family checks.

Everything here is deterministic.  Weights are computed in whatever number
type the caller supplies, so passing Fractions for spectral parameters makes
the Gibbs-swap checks exact; floats are the default elsewhere.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np
from scipy.stats import poisson

from .core import InterlacingArray, Partition

__all__ = [
    "Specialization",
    "DiscreteDistribution",
    "partitions_up_to",
    "interlacing_below",
    "interlacing_above",
    "addable_rows",
    "schur_eval",
    "schur_bialternant",
    "dim_partition",
    "plancherel_weight",
    "c_gibbs_conditional",
    "enumerate_level_slice",
    "level_transition_matrix",
    "trunc_geom_pmf",
    "push_through_letters",
    "tasep_generator",
    "bhp_generator",
    "uniformized_transient",
    "exact_ctmc_distribution",
    "l_q_transition_matrix",
    "spec_transform",
    "harmonic_transform_check",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 12


# ---------------------------------------------------------------------------
# partitions and interlacing enumeration

def partitions_up_to(m: int) -> list[Partition]:
    """All partitions with |lam| <= m in graded lexicographic order."""
    out: list[Partition] = []
    for n in range(m + 1):
        level: list[tuple[int, ...]] = []

        def gen(rest: int, maxpart: int, prefix: tuple[int, ...]) -> None:
            if rest == 0:
                level.append(prefix)
                return
            for p in range(min(rest, maxpart), 0, -1):
                gen(rest - p, p, prefix + (p,))

        if n == 0:
            level.append(())
        else:
            gen(n, n, ())
        out.extend(Partition(p) for p in sorted(level))
    return out


def interlacing_below(lam: Partition, max_len: int | None = None) -> Iterator[Partition]:
    """All kappa with kappa < lam (interlacing) and at most max_len parts."""
    ell = len(lam)
    if max_len is None:
        max_len = ell
    if ell > max_len + 1:
        return
    k = min(ell, max_len)
    ranges = [range(lam.part(i + 1), lam.part(i) + 1) for i in range(1, k + 1)]
    for combo in itertools.product(*ranges):
        yield Partition(combo)


def interlacing_above(mu: Partition, max_first: int) -> Iterator[Partition]:
    """All lam with mu < lam and lam_1 <= max_first (lam gains at most one part)."""
    ell = len(mu)
    ranges = [range(mu.part(1), max_first + 1)]
    ranges += [range(mu.part(i), mu.part(i - 1) + 1) for i in range(2, ell + 2)]
    for combo in itertools.product(*ranges):
        yield Partition(combo)


def addable_rows(lam: Partition) -> list[int]:
    """Rows i (1-based) where lam + e_i is still a partition."""
    ell = len(lam)
    rows = [1]
    for i in range(2, ell + 1):
        if lam.part(i - 1) > lam.part(i):
            rows.append(i)
    if ell >= 1:
        rows.append(ell + 1)
    return rows


# ---------------------------------------------------------------------------
# Schur evaluation

def schur_eval(lam: Partition, xs: Sequence, cap: int = DEFAULT_CAP, max_vars: int = 8):
    """Schur polynomial s_lam(xs) via the interlacing-array expansion.

    Sums monomial weights over all interlacing arrays with top row ``lam``,
    which is exact for int/Fraction inputs.  Returns 0 when lam has more
    parts than variables.
    """
    if lam.size > cap:
        raise ValueError(f"|lam|={lam.size} exceeds oracle cap {cap}")
    if len(xs) > max_vars:
        raise ValueError(f"{len(xs)} variables exceed the oracle limit {max_vars}")
    xs = tuple(xs)
    memo: dict[tuple[tuple[int, ...], int], object] = {}

    def rec(parts: Partition, n: int):
        if n == 0:
            return 1 if len(parts) == 0 else 0
        if len(parts) > n:
            return 0
        key = (parts.parts, n)
        if key in memo:
            return memo[key]
        x = xs[n - 1]
        total = 0
        for kappa in interlacing_below(parts, max_len=n - 1):
            total += rec(kappa, n - 1) * x ** (parts.size - kappa.size)
        memo[key] = total
        return total

    return rec(lam, len(xs))


def _det_exact(rows: list[list]) -> object:
    """Determinant by fraction-preserving Gaussian elimination."""
    n = len(rows)
    m = [list(r) for r in rows]
    det = m[0][0] * 0 + 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return det * 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = m[col][col]
        for r in range(col + 1, n):
            factor = m[r][col] / inv
            for cc in range(col, n):
                m[r][cc] -= factor * m[col][cc]
    return det


def schur_bialternant(lam: Partition, xs: Sequence):
    """Determinantal formula det[x_i^(lam_j + N - j)] / Vandermonde.

    Requires pairwise distinct variables; exact for Fraction inputs.  This is
    the independent cross-check of :func:`schur_eval`.
    """
    n = len(xs)
    if len(lam) > n:
        return 0
    exact = all(isinstance(x, (int, Fraction)) for x in xs)
    vals = list(xs) if exact else [Fraction(float(x)) for x in xs]
    rows = [[x ** (lam.part(j + 1) + n - (j + 1)) for j in range(n)] for x in vals]
    vandermonde = Fraction(1)
    for i in range(n):
        for j in range(i + 1, n):
            vandermonde *= vals[i] - vals[j]
    if vandermonde == 0:
        raise ValueError("bialternant formula needs distinct variables")
    det = _det_exact(rows)
    return det / vandermonde if exact else float(det / vandermonde)


@lru_cache(maxsize=None)
def _dim_cached(parts: tuple[int, ...]) -> int:
    if not parts:
        return 1
    total = 0
    ell = len(parts)
    for i in range(ell):
        nxt = parts[i + 1] if i + 1 < ell else 0
        if parts[i] > nxt:
            removed = parts[:i] + (parts[i] - 1,) + parts[i + 1:]
            while removed and removed[-1] == 0:
                removed = removed[:-1]
            total += _dim_cached(removed)
    return total


def dim_partition(lam: Partition) -> int:
    """Number of standard Young tableaux of shape lam (corner-peeling recursion)."""
    return _dim_cached(lam.parts)


def plancherel_weight(lam: Partition, t: float, cap: int = DEFAULT_CAP) -> float:
    """Plancherel specialization s_lam(rho_t) = t^|lam| dim(lam) / |lam|!."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if lam.size > cap:
        raise ValueError(f"|lam|={lam.size} exceeds oracle cap {cap}")
    n = lam.size
    return float(dim_partition(lam)) * t ** n / math.factorial(n)


# ---------------------------------------------------------------------------
# distributions

@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite support plus weights, with optional leak (unaccounted mass).

    ``sample_size`` marks empirical distributions built from counts, which is
    what enables chi-square comparisons in :func:`tasep_rewind.stats.distribution_distance`.
    """

    support: tuple
    weights: tuple
    leak: object = 0.0
    sample_size: int | None = None

    def __post_init__(self) -> None:
        if len(self.support) != len(self.weights):
            raise ValueError("support and weights must have equal length")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        total = sum(self.weights) + self.leak
        if abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"weights + leak must sum to 1, got {float(total)}")

    @classmethod
    def from_weights(cls, support: Sequence, weights: Sequence, leak=0) -> "DiscreteDistribution":
        total = sum(weights) + leak
        if total == 0:
            raise ValueError("all weights vanish")
        return cls(tuple(support), tuple(w / total for w in weights), leak / total if leak else leak)

    @classmethod
    def from_samples(cls, samples: Iterable) -> "DiscreteDistribution":
        counts: dict = {}
        n = 0
        for s in samples:
            counts[s] = counts.get(s, 0) + 1
            n += 1
        if n == 0:
            raise ValueError("no samples")
        support = tuple(counts)
        return cls(support, tuple(counts[s] / n for s in support), 0.0, n)

    def probability(self, state) -> float:
        try:
            return self.weights[self.support.index(state)]
        except ValueError:
            return 0.0

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.weights))

    def tv(self, other: "DiscreteDistribution") -> float:
        mine, theirs = self.as_dict(), other.as_dict()
        states = set(mine) | set(theirs)
        return float(sum(abs(mine.get(s, 0) - theirs.get(s, 0)) for s in states)) / 2.0


# ---------------------------------------------------------------------------
# c-Gibbs conditionals and exact level maps

def c_gibbs_conditional(top: Partition, c: Sequence, max_top: int = 6, max_depth: int = 5) -> DiscreteDistribution:
    """Exact conditional law of the array below a fixed top row.

    The weight of an array lam^(1) < ... < lam^(N) = top is
    prod_j c_j^(|lam^(j)| - |lam^(j-1)|); the normalizer is s_top(c).
    Pass Fractions in ``c`` for exact arithmetic.
    """
    n = len(c)
    if top.size > max_top:
        raise ValueError(f"|top|={top.size} exceeds enumeration cap {max_top}")
    if n > max_depth:
        raise ValueError(f"depth {n} exceeds enumeration cap {max_depth}")
    if len(top) > n:
        raise ValueError("top row has more parts than the depth allows")

    arrays: list[InterlacingArray] = []
    weights: list = []

    # Generating row j below row j+1 contributes c_(j+1)^(|lam^(j+1)| - |lam^(j)|);
    # the innermost row then adds its own factor c_1^(|lam^(1)|).
    def rec(j: int, above: Partition, rows_above: tuple[Partition, ...], weight) -> None:
        if j == 0:
            arrays.append(InterlacingArray(rows_above))
            weights.append(weight * c[0] ** above.size)
            return
        for kappa in interlacing_below(above, max_len=j):
            rec(j - 1, kappa, (kappa,) + rows_above, weight * c[j] ** (above.size - kappa.size))

    rec(n - 1, top, (top,), c[0] ** 0)
    total = sum(weights)
    probs = [w / total for w in weights]
    return DiscreteDistribution(tuple(arrays), tuple(probs))


def trunc_geom_pmf(bound: int, alpha) -> list:
    """pmf of the truncated geometric on {0..bound}; exact for Fraction alpha."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if bound == 0:
        return [alpha ** 0]
    return [(1 - alpha) * alpha ** k for k in range(bound)] + [alpha ** bound]


def _segment_bounds(a: InterlacingArray, j: int, k: int) -> tuple[int, int]:
    lo = max(a.entry(j - 1, k), a.entry(j + 1, k + 1))
    hi = min(a.entry(j - 1, k - 1), a.entry(j + 1, k))
    return int(lo), int(hi)


def enumerate_level_slice(a: InterlacingArray, j: int) -> list[Partition]:
    """All row-j values compatible with rows j-1 and j+1 of ``a``."""
    if not 1 <= j < a.depth:
        raise ValueError("need 1 <= j < depth")
    ranges = []
    for k in range(1, j + 1):
        lo, hi = _segment_bounds(a, j, k)
        ranges.append(range(lo, hi + 1))
    return [Partition(combo) for combo in itertools.product(*ranges)]


def level_transition_matrix(a: InterlacingArray, j: int, alpha, direction: str) -> tuple[list[Partition], list[list]]:
    """Exact transition matrix of L^(j)_alpha or R^(j)_alpha on the row-j slice.

    Entries are products of truncated-geometric pmfs, one independent factor
    per coordinate of the row.  Rows of the matrix sum to 1 exactly when
    ``alpha`` is a Fraction.
    """
    if direction not in ("L", "R"):
        raise ValueError("direction must be 'L' or 'R'")
    states = enumerate_level_slice(a, j)
    index = {s.parts: i for i, s in enumerate(states)}
    bounds = [_segment_bounds(a, j, k) for k in range(1, j + 1)]
    zero = alpha * 0
    matrix = [[zero for _ in states] for _ in states]
    for si, s in enumerate(states):
        per_entry = []
        for k in range(1, j + 1):
            lo, hi = bounds[k - 1]
            v = s.part(k)
            if direction == "L":
                pmf = trunc_geom_pmf(v - lo, alpha)
                per_entry.append({lo + y: p for y, p in enumerate(pmf)})
            else:
                pmf = trunc_geom_pmf(hi - v, alpha)
                per_entry.append({hi - y: p for y, p in enumerate(pmf)})
        for combo in itertools.product(*[sorted(d) for d in per_entry]):
            prob = per_entry[0][combo[0]]
            for k in range(1, j):
                prob = prob * per_entry[k][combo[k]]
            matrix[si][index[Partition(combo).parts]] += prob
    return states, matrix


def push_through_letters(
    states: Sequence[InterlacingArray],
    probs: Sequence,
    plan: Sequence[tuple[int, str, object]],
) -> list:
    """Push a distribution on arrays through resolved level-map letters.

    Each letter (row, direction, alpha) resamples one row by independent
    truncated-geometric moves inside the interlacing segments; ``states`` must
    be closed under such moves (any set of arrays sharing a top row is).
    Fractions stay exact throughout.
    """
    index = {s.rows: i for i, s in enumerate(states)}
    vec = list(probs)
    zero = vec[0] * 0
    for row_j, direction, alpha in plan:
        new = [zero] * len(vec)
        for si, s in enumerate(states):
            p = vec[si]
            if p == 0:
                continue
            per_entry = []
            for k in range(1, row_j + 1):
                lo = int(max(s.entry(row_j - 1, k), s.entry(row_j + 1, k + 1)))
                hi = int(min(s.entry(row_j - 1, k - 1), s.entry(row_j + 1, k)))
                v = int(s.entry(row_j, k))
                if direction == "L":
                    pmf = trunc_geom_pmf(v - lo, alpha)
                    per_entry.append([(lo + y, w) for y, w in enumerate(pmf)])
                else:
                    pmf = trunc_geom_pmf(hi - v, alpha)
                    per_entry.append([(hi - y, w) for y, w in enumerate(pmf)])
            for combo in itertools.product(*per_entry):
                w = p
                for _, pw in combo:
                    w = w * pw
                target = s.with_row(row_j, Partition(tuple(val for val, _ in combo)))
                new[index[target.rows]] += w
        vec = new
    return vec


# ---------------------------------------------------------------------------
# exact truncated transient laws (uniformization)

def uniformized_transient(q_matrix: np.ndarray, p0: np.ndarray, t: float, tol: float = 1e-14) -> np.ndarray:
    """exp(t Q) applied to p0 by uniformization with a Poisson-tail cutoff.

    Keeps every intermediate vector nonnegative; the truncation error is at
    most the discarded Poisson tail mass ``tol``.
    """
    rate = float(-q_matrix.diagonal().min())
    if rate <= 0.0:
        return p0.astype(float).copy()
    if rate * t > 700.0:
        raise ValueError("uniformization rate * t too large for a stable series")
    kernel = np.eye(q_matrix.shape[0]) + q_matrix / rate
    v = p0.astype(float).copy()
    weight = math.exp(-rate * t)
    out = weight * v
    covered = weight
    k = 0
    max_terms = int(rate * t + 12.0 * math.sqrt(rate * t + 1.0) + 60.0)
    while covered < 1.0 - tol and k < max_terms:
        k += 1
        v = v @ kernel
        weight *= rate * t / k
        out += weight * v
        covered += weight
    return out


def tasep_generator(states: Sequence[Partition], m: int, speed: Callable[[int], float]) -> tuple[np.ndarray, int]:
    """Generator of the box-adding chain on {|lam| <= m} plus an absorbing
    overflow state for jumps that would exceed the truncation.

    Returns (Q, overflow_index).  Box growth never re-enters the truncated
    set, so the restricted law is exact and the overflow mass is exactly the
    escape probability.
    """
    index = {s.parts: i for i, s in enumerate(states)}
    n = len(states) + 1
    ov = len(states)
    q_matrix = np.zeros((n, n))
    for s in states:
        i = index[s.parts]
        for row in addable_rows(s):
            rate = speed(row)
            if rate <= 0:
                raise ValueError("particle speeds must be positive")
            grown = s.with_part(row, s.part(row) + 1)
            j = index[grown.parts] if grown.size <= m else ov
            q_matrix[i, j] += rate
            q_matrix[i, i] -= rate
    return q_matrix, ov


def bhp_generator(states: Sequence[Partition]) -> np.ndarray:
    """Generator of the backwards process on displacement partitions.

    Particle k removes j boxes from row k at rate k for each j in
    {1..lam_k - lam_(k+1)}; every jump decreases |lam|, so the truncated
    space is invariant and there is no overflow state.
    """
    index = {s.parts: i for i, s in enumerate(states)}
    n = len(states)
    q_matrix = np.zeros((n, n))
    for s in states:
        i = index[s.parts]
        for k in range(1, len(s) + 1):
            gap = s.part(k) - s.part(k + 1)
            for drop in range(1, gap + 1):
                target = s.with_part(k, s.part(k) - drop)
                j = index[target.parts]
                q_matrix[i, j] += k
                q_matrix[i, i] -= k
    return q_matrix


def exact_ctmc_distribution(
    process: str,
    m: int,
    t: float,
    speed: Callable[[int], float] | None = None,
    start: Partition = Partition(),
) -> DiscreteDistribution:
    """Exact time-t law of TASEP or BHP on displacement partitions |lam| <= m.

    TASEP reports the escaped mass as ``leak`` (an exact truncation error
    bound); the BHP generator is closed on the truncated space, so its leak
    is identically zero.
    """
    if m > 20:
        raise ValueError("truncation too large for dense uniformization")
    if start.size > m:
        raise ValueError("start state lies outside the truncated space")
    states = partitions_up_to(m)
    index = {s.parts: i for i, s in enumerate(states)}
    if process == "tasep":
        q_matrix, ov = tasep_generator(states, m, speed or (lambda i: 1.0))
        p0 = np.zeros(len(states) + 1)
        p0[index[start.parts]] = 1.0
        p = uniformized_transient(q_matrix, p0, t)
        return DiscreteDistribution(tuple(states), tuple(p[:-1]), leak=float(p[ov]))
    if process == "bhp":
        q_matrix = bhp_generator(states)
        p0 = np.zeros(len(states))
        p0[index[start.parts]] = 1.0
        p = uniformized_transient(q_matrix, p0, t)
        return DiscreteDistribution(tuple(states), tuple(p), leak=0.0)
    raise ValueError(f"unknown process {process!r}")


def l_q_transition_matrix(states: Sequence[Partition], q: float) -> np.ndarray:
    """Exact one-step matrix of the discrete left map on displacement partitions.

    Row i of a partition moves to lam_(i+1) + Y_(q^i)(lam_i - lam_(i+1)) with
    independent draws, so each matrix row is a product distribution.  The
    image never grows, hence the matrix is closed on {|lam| <= m}.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    index = {s.parts: i for i, s in enumerate(states)}
    n = len(states)
    matrix = np.zeros((n, n))
    for s in states:
        i = index[s.parts]
        per_row: list[dict[int, float]] = []
        for k in range(1, len(s) + 1):
            lo = s.part(k + 1)
            pmf = trunc_geom_pmf(s.part(k) - lo, q ** k)
            per_row.append({lo + y: float(p) for y, p in enumerate(pmf)})
        if not per_row:
            matrix[i, i] += 1.0
            continue
        for combo in itertools.product(*[sorted(d) for d in per_row]):
            prob = 1.0
            for k, v in enumerate(combo):
                prob *= per_row[k][v]
            matrix[i, index[Partition(combo).parts]] += prob
    return matrix


# ---------------------------------------------------------------------------
# specializations

@dataclass(frozen=True)
class Specialization:
    """One-sided nonnegative specialization (alpha+, beta+, Plancherel gamma+)."""

    alpha: tuple[float, ...] = ()
    beta: tuple[float, ...] = ()
    gamma: float = 0.0

    def __post_init__(self) -> None:
        for name, seq in (("alpha", self.alpha), ("beta", self.beta)):
            for i, v in enumerate(seq):
                if v < 0:
                    raise ValueError(f"{name} parameters must be nonnegative")
                if i and seq[i - 1] < v:
                    raise ValueError(f"{name} parameters must weakly decrease")
        if self.beta and self.beta[0] > 1:
            raise ValueError("beta_1 must be at most 1")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def spec_transform(p: Specialization, q: float) -> Specialization:
    """Parameter transform induced by one pass of the iterated left map.

    alpha -> alpha q / (1 + alpha - alpha q), beta -> beta q / (1 - beta + beta q),
    gamma -> q gamma.  Applying with q1 then q2 equals applying once with q1 q2.
    """
    if not 0 < q <= 1:
        raise ValueError("q must lie in (0, 1]")
    if q == 1:
        return p
    alpha = tuple(a * q / (1 + a - a * q) for a in p.alpha)
    beta = tuple(b * q / (1 - b + b * q) for b in p.beta)
    return Specialization(alpha=alpha, beta=beta, gamma=q * p.gamma)


@dataclass(frozen=True)
class HarmonicCheck:
    lhs: float
    rhs: float
    gap: float
    tail_bound: float


def harmonic_transform_check(
    mu: Partition,
    n_levels: int,
    t: float,
    q: float,
    cutoff: int,
) -> HarmonicCheck:
    """Check the harmonic-family recursion for the Plancherel family.

    lhs truncates q^|mu| * sum_(mu < lam, lam_1 <= cutoff) phi_(N+1)(lam) with
    phi_(N+1)(lam) = exp(-t(1+q+...+q^N)) s_lam(rho_t); rhs is the closed form
    exp(-qt(1+...+q^(N-1))) s_mu(rho_(qt)).  The reported tail bound dominates
    the truncated mass via the Poisson tail of lam_1.
    """
    if len(mu) > n_levels:
        raise ValueError("mu has more parts than its level allows")
    geom_np1 = sum(q ** k for k in range(n_levels + 1))
    geom_n = sum(q ** k for k in range(n_levels))
    prefactor = q ** mu.size * math.exp(-t * geom_np1)
    cap = cutoff + mu.size + 1
    lhs = prefactor * sum(
        plancherel_weight(lam, t, cap=cap) for lam in interlacing_above(mu, cutoff)
    )
    rhs = math.exp(-q * t * geom_n) * plancherel_weight(mu, q * t, cap=cap)

    # Tail: s_lam(rho_t) <= t^|lam| / lam_1!  (hook lengths in the first row
    # dominate lam_1!), so summing the free first row beyond the cutoff gives
    # a Poisson tail; the bounded lower rows contribute the factor b_mu.
    b_mu = 1.0
    for i in range(2, len(mu) + 2):
        lo, hi = mu.part(i), mu.part(i - 1)
        b_mu *= sum(t ** v for v in range(lo, hi + 1))
    tail = prefactor * b_mu * math.exp(t) * float(poisson.sf(cutoff, t))
    return HarmonicCheck(lhs=lhs, rhs=rhs, gap=abs(lhs - rhs), tail_bound=tail)
