"""Distribution distances, pooled chi-square tests, and the replicated MC runner.

Every acceptance test funnels through the helpers here so that pooling rules
(expected cell counts >= 5) and p-value conventions are applied uniformly.
"""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Mapping

from scipy.stats import chi2

from .core import RngStream

__all__ = [
    "TestReport",
    "SampleBatch",
    "total_variation",
    "chi_square_fit",
    "chi_square_two_sample",
    "distribution_distance",
    "mc_runner",
]


@dataclass(frozen=True)
class TestReport:
    """Result of a chi-square test after cell pooling."""

    statistic: float
    df: int
    p_value: float
    n_cells: int
    n_raw_cells: int

    def as_dict(self) -> dict[str, Any]:
        return {
            "statistic": self.statistic,
            "df": self.df,
            "p_value": self.p_value,
            "n_cells": self.n_cells,
            "n_raw_cells": self.n_raw_cells,
        }


def total_variation(p: Mapping[Hashable, Any], q: Mapping[Hashable, Any]) -> float:
    """Half the L1 distance over the union of supports (missing mass = 0)."""
    if not p and not q:
        raise ValueError("empty supports")
    states = set(p) | set(q)
    acc = 0
    for s in states:
        acc += abs(p.get(s, 0) - q.get(s, 0))
    return float(acc) / 2.0


def _pool_cells(cells: list[tuple[float, ...]], min_expected: float, expected_index: int) -> list[tuple[float, ...]]:
    """Greedily merge cells, smallest expected first, until all meet the floor.

    ``cells`` are tuples whose component ``expected_index`` is the pooling key;
    merging adds tuples componentwise.
    """
    cells = sorted(cells, key=lambda c: c[expected_index])
    pooled: list[tuple[float, ...]] = []
    acc: tuple[float, ...] | None = None
    for cell in cells:
        acc = cell if acc is None else tuple(x + y for x, y in zip(acc, cell))
        if acc[expected_index] >= min_expected:
            pooled.append(acc)
            acc = None
    if acc is not None:
        if pooled:
            pooled[-1] = tuple(x + y for x, y in zip(pooled[-1], acc))
        else:
            pooled.append(acc)
    return pooled


def chi_square_fit(
    counts: Mapping[Hashable, int],
    probs: Mapping[Hashable, Any],
    min_expected: float = 5.0,
) -> TestReport:
    """One-sample chi-square of observed counts against exact cell probabilities.

    States observed but absent from ``probs`` are lumped with the residual
    probability mass into a single "other" cell, so deficient probability
    tables (truncated supports, leak mass) are handled without bias.
    """
    n = sum(counts.values())
    if n == 0:
        raise ValueError("no observations")
    listed = 0.0
    cells: list[tuple[float, float]] = []  # (observed, expected)
    for state, p in probs.items():
        p = float(p)
        listed += p
        cells.append((float(counts.get(state, 0)), n * p))
    other_obs = float(sum(c for s, c in counts.items() if s not in probs))
    other_exp = n * max(0.0, 1.0 - listed)
    if other_obs > 0 or other_exp > 0:
        cells.append((other_obs, other_exp))
    raw = len(cells)
    pooled = _pool_cells(cells, min_expected, expected_index=1)
    if len(pooled) < 2:
        return TestReport(0.0, 0, 1.0, len(pooled), raw)
    stat = sum((o - e) ** 2 / e for o, e in pooled)
    df = len(pooled) - 1
    return TestReport(float(stat), df, float(chi2.sf(stat, df)), len(pooled), raw)


def chi_square_two_sample(
    counts_a: Mapping[Hashable, int],
    counts_b: Mapping[Hashable, int],
    min_expected: float = 5.0,
) -> TestReport:
    """Two-sample chi-square homogeneity test with pooled expected counts."""
    na = sum(counts_a.values())
    nb = sum(counts_b.values())
    if na == 0 or nb == 0:
        raise ValueError("both samples must be nonempty")
    states = set(counts_a) | set(counts_b)
    cells: list[tuple[float, float, float]] = []  # (obs_a, obs_b, min expected)
    for s in states:
        oa = float(counts_a.get(s, 0))
        ob = float(counts_b.get(s, 0))
        tot = oa + ob
        ea = na * tot / (na + nb)
        eb = nb * tot / (na + nb)
        cells.append((oa, ob, min(ea, eb)))
    raw = len(cells)
    pooled = _pool_cells(cells, min_expected, expected_index=2)
    if len(pooled) < 2:
        return TestReport(0.0, 0, 1.0, len(pooled), raw)
    stat = 0.0
    for oa, ob, _ in pooled:
        tot = oa + ob
        ea = na * tot / (na + nb)
        eb = nb * tot / (na + nb)
        stat += (oa - ea) ** 2 / ea + (ob - eb) ** 2 / eb
    df = len(pooled) - 1
    return TestReport(float(stat), df, float(chi2.sf(stat, df)), len(pooled), raw)


def distribution_distance(p, q, min_expected: float = 5.0) -> tuple[float, float | None]:
    """(total variation, chi-square p-value when sample counts are available).

    ``p`` and ``q`` are DiscreteDistribution-like objects (``as_dict()`` plus
    optional ``sample_size``) or plain probability mappings.  A p-value is
    produced when at least one side carries counts: two empirical sides give
    the two-sample test, one empirical side is tested against the other as an
    exact law.
    """
    p_map = p.as_dict() if hasattr(p, "as_dict") else dict(p)
    q_map = q.as_dict() if hasattr(q, "as_dict") else dict(q)
    tv = total_variation(p_map, q_map)
    np_ = getattr(p, "sample_size", None)
    nq_ = getattr(q, "sample_size", None)
    p_value: float | None = None
    if np_ and nq_:
        ca = {s: round(w * np_) for s, w in p_map.items()}
        cb = {s: round(w * nq_) for s, w in q_map.items()}
        p_value = chi_square_two_sample(ca, cb, min_expected).p_value
    elif np_:
        counts = {s: round(w * np_) for s, w in p_map.items()}
        p_value = chi_square_fit(counts, q_map, min_expected).p_value
    elif nq_:
        counts = {s: round(w * nq_) for s, w in q_map.items()}
        p_value = chi_square_fit(counts, p_map, min_expected).p_value
    return tv, p_value


@dataclass
class SampleBatch:
    """Replicated simulation output, ordered by replica index."""

    seed: int
    n: int
    values: list = field(default_factory=list)

    def counts(self) -> Counter:
        return Counter(self.values)

    def mean(self) -> float:
        return sum(self.values) / len(self.values)


def mc_runner(
    task: Callable[[RngStream], Any],
    n: int,
    seed: int,
    threads: int = 1,
) -> SampleBatch:
    """Run ``task`` on n replicas, replica i drawing from RngStream(seed, i).

    The output is bit-reproducible given (task, n, seed): results are gathered
    in replica order regardless of execution interleaving, so the threaded
    path returns exactly what sequential execution does.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if threads <= 1:
        values = [task(RngStream(seed, i)) for i in range(n)]
    else:
        def worker(i: int):
            return task(RngStream(seed, i))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(worker, range(n)))
    return SampleBatch(seed=seed, n=n, values=values)
