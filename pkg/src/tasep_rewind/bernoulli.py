"""Corner-flip dynamics on Bernoulli random-walk trajectories.

A trajectory is tracked through its first m columns as weakly increasing
heights h_0 <= ... <= h_(m-1), column j holding delta_j = h_j - h_(j-1)
up-steps.  A corner at column j (delta_j >= 1) flips at rate j + h_j: the rate
equals the number of walk steps preceding the corner point, the convention
pinned by the exact window oracle below (rate = height alone fails it for
every column past the first).  The trailing up-run at the last tracked column
flips against a virtual right-step, which is the closure making the m-column
restriction autonomous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import nbinom

from .core import RngStream
from .schur_oracle import uniformized_transient

__all__ = [
    "WalkWindow",
    "sample_walk",
    "beta_tau",
    "simulate_D",
    "window_trajectory",
    "simulate_D_batch",
    "sample_walk_batch",
    "exact_window_check",
]


@dataclass(frozen=True)
class WalkWindow:
    """Heights of the walk over its first len(heights) columns."""

    heights: tuple[int, ...]

    def __post_init__(self) -> None:
        h = tuple(int(v) for v in self.heights)
        if any(v < 0 for v in h):
            raise ValueError("heights must be nonnegative")
        if any(h[i] > h[i + 1] for i in range(len(h) - 1)):
            raise ValueError("heights must weakly increase")
        object.__setattr__(self, "heights", h)

    @property
    def columns(self) -> int:
        return len(self.heights)

    def increments(self) -> tuple[int, ...]:
        prev = 0
        out = []
        for h in self.heights:
            out.append(h - prev)
            prev = h
        return tuple(out)


def beta_tau(beta: float, tau: float) -> float:
    """Up-step probability after running the corner flips for time tau."""
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    e = math.exp(-tau)
    return beta * e / (1 - beta + beta * e)


def sample_walk(beta: float, m: int, rng: RngStream) -> WalkWindow:
    """Walk with i.i.d. up-probability beta, tracked until m right-steps.

    Column increments are i.i.d. geometric: P(delta = k) = (1-beta) beta^k.
    """
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    if m < 1:
        raise ValueError("m must be >= 1")
    log_beta = math.log(beta)
    h = 0
    heights = []
    for _ in range(m):
        u = rng.random()
        delta = int(math.log(u) / log_beta) if u > 0 else 0
        h += delta
        heights.append(h)
    return WalkWindow(tuple(heights))


def _corner_rates(h: list[int]) -> list[float]:
    rates = []
    prev = 0
    for j, hj in enumerate(h):
        rates.append(float(j + hj) if hj > prev else 0.0)
        prev = hj
    return rates


def window_trajectory(w: WalkWindow, tau: float, rng: RngStream) -> tuple[WalkWindow, list[tuple[float, int]]]:
    """Run the corner flips for time tau; returns the window and the (time,
    column) log of every flip."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    h = list(w.heights)
    gen = rng.generator
    now = 0.0
    events: list[tuple[float, int]] = []
    while True:
        rates = _corner_rates(h)
        total = sum(rates)
        if total <= 0:
            break
        wait = float(gen.standard_exponential()) / total
        if now + wait > tau:
            break
        now += wait
        u = float(gen.random()) * total
        acc = 0.0
        col = len(h) - 1
        for j, r in enumerate(rates):
            acc += r
            if u < acc:
                col = j
                break
        h[col] -= 1
        events.append((now, col))
    return WalkWindow(tuple(h)), events


def simulate_D(w: WalkWindow, tau: float, rng: RngStream) -> WalkWindow:
    """Window after running the corner-flip dynamics for time tau."""
    return window_trajectory(w, tau, rng)[0]


def sample_walk_batch(beta: float, m: int, n: int, gen: np.random.Generator) -> np.ndarray:
    """n windows drawn from the beta walk, as an (n, m) height matrix."""
    u = gen.random((n, m))
    deltas = np.floor(np.log(u) / math.log(beta)).astype(np.int64)
    return np.cumsum(deltas, axis=1)


def simulate_D_batch(heights: np.ndarray, tau: float, gen: np.random.Generator) -> np.ndarray:
    """Replica-vectorized corner flips: each row of ``heights`` evolves as an
    independent window for time tau."""
    h = np.array(heights, dtype=np.int64)
    n, m = h.shape
    cols = np.arange(m, dtype=np.int64)
    now = np.zeros(n)
    alive = np.arange(n)
    while alive.size:
        sub = h[alive]
        prev = np.concatenate([np.zeros((sub.shape[0], 1), dtype=np.int64), sub[:, :-1]], axis=1)
        rates = np.where(sub > prev, cols + sub, 0).astype(float)
        total = rates.sum(axis=1)
        frozen = total <= 0
        waits = np.empty_like(total)
        waits[~frozen] = gen.standard_exponential(int((~frozen).sum())) / total[~frozen]
        waits[frozen] = np.inf
        t_new = now[alive] + waits
        active = t_new <= tau
        now[alive] = np.where(active, t_new, now[alive])
        if not active.any():
            break
        act_rows = alive[active]
        act_rates = rates[active]
        u = gen.random(act_rows.size) * total[active]
        chosen = (np.cumsum(act_rates, axis=1) <= u[:, None]).sum(axis=1)
        chosen = np.minimum(chosen, m - 1)
        h[act_rows, chosen] -= 1
        alive = act_rows
    return h


def _window_states(m: int, cap: int) -> list[tuple[int, ...]]:
    states: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...]) -> None:
        if len(prefix) == m:
            states.append(prefix)
            return
        lo = prefix[-1] if prefix else 0
        for v in range(lo, cap + 1):
            rec(prefix + (v,))

    rec(())
    return states


def exact_window_check(beta: float, tau: float, m: int = 2, cap: int | None = None) -> dict:
    """Exact finite-window oracle for the walk coupling.

    Builds the corner-flip generator on height vectors capped at ``cap``,
    transports the truncated product-geometric law by uniformization, and
    compares with the product-geometric law at the flowed parameter.  The cap
    is chosen so the initial mass above it stays below 1e-12 (heights only
    decrease, so the capped dynamics is exact on its domain).
    """
    if cap is None:
        cap = 1
        while float(nbinom.sf(cap, m, 1 - beta)) > 1e-12:
            cap += 1
    states = _window_states(m, cap)
    index = {s: i for i, s in enumerate(states)}
    n = len(states)
    q_matrix = np.zeros((n, n))
    for s in states:
        i = index[s]
        prev = 0
        for j, hj in enumerate(s):
            if hj > prev:
                target = s[:j] + (hj - 1,) + s[j + 1:]
                rate = float(j + hj)
                q_matrix[i, index[target]] += rate
                q_matrix[i, i] -= rate
            prev = hj

    def product_geometric(b: float) -> np.ndarray:
        vec = np.zeros(n)
        for s in states:
            deltas = [s[0]] + [s[j] - s[j - 1] for j in range(1, m)]
            vec[index[s]] = math.prod((1 - b) * b ** d for d in deltas)
        return vec

    p0 = product_geometric(beta)
    initial_tail = 1.0 - float(p0.sum())
    pt = uniformized_transient(q_matrix, p0, tau)
    target = product_geometric(beta_tau(beta, tau))
    tv = 0.5 * float(np.abs(pt - target).sum())
    return {
        "m": m,
        "cap": cap,
        "initial_tail": initial_tail,
        "target_tail": 1.0 - float(target.sum()),
        "tv": tv,
    }
