"""Backwards Hammersley-type process on configurations, and its discrete
precursor, the one-step left map with truncated-geometric jumps.

In displacement coordinates particle k sees g_k = d_k - d_(k+1) holes to its
left and jumps onto a uniformly chosen one at total rate k * g_k.  Every jump
removes boxes, so the step configuration (empty partition) is absorbing and
trajectories terminate after finitely many events regardless of the horizon.
"""

from __future__ import annotations

import numpy as np

from .core import ParticleConfig, Partition, RngStream, trunc_geom, trunc_geom_array

__all__ = [
    "simulate_bhp",
    "bhp_trajectory",
    "discrete_L_q",
    "discrete_L_q_batch",
]


def _run_bhp(d: list[int], duration: float, rng: RngStream) -> None:
    gen = rng.generator
    now = 0.0
    while d:
        total = 0.0
        for k in range(1, len(d) + 1):
            nxt = d[k] if k < len(d) else 0
            total += k * (d[k - 1] - nxt)
        if total <= 0.0:
            return
        wait = float(gen.standard_exponential()) / total
        if now + wait > duration:
            return
        now += wait
        u = float(gen.random()) * total
        acc = 0.0
        chosen = len(d)
        gap = 0
        for k in range(1, len(d) + 1):
            nxt = d[k] if k < len(d) else 0
            g = d[k - 1] - nxt
            acc += k * g
            if u < acc:
                chosen, gap = k, g
                break
        else:
            gap = d[-1]
        drop = rng.integer(1, gap)
        d[chosen - 1] -= drop
        if d[-1] == 0:
            d.pop()
        if __debug__:
            assert all(d[i] >= d[i + 1] > 0 for i in range(len(d) - 1)) and (not d or d[-1] > 0)


def simulate_bhp(x: ParticleConfig, tau: float, rng: RngStream) -> ParticleConfig:
    """Sample the backwards process at time tau started from ``x``."""
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    d = list(x.displacements.parts)
    _run_bhp(d, tau, rng)
    return ParticleConfig(Partition(tuple(d)))


def bhp_trajectory(x: ParticleConfig, times, rng: RngStream) -> list[ParticleConfig]:
    """Configurations at the given increasing times along one trajectory."""
    if any(s < 0 for s in times) or any(times[i] > times[i + 1] for i in range(len(times) - 1)):
        raise ValueError("times must be nonnegative and nondecreasing")
    d = list(x.displacements.parts)
    out: list[ParticleConfig] = []
    prev = 0.0
    for s in times:
        _run_bhp(d, s - prev, rng)
        out.append(ParticleConfig(Partition(tuple(d))))
        prev = s
    return out


def discrete_L_q(x: ParticleConfig, q: float, T: int, rng: RngStream) -> ParticleConfig:
    """Apply the one-step left map T times.

    One application maps d_i -> d_(i+1) + Y_(q^i)(d_i - d_(i+1)) with
    independent truncated-geometric draws, every row reading the pre-update
    state.  Equivalently x_i -> x_(i+1) + 1 + Y_(q^i)(gap_i).
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    if T < 1:
        raise ValueError("T must be >= 1")
    d = list(x.displacements.parts)
    for _ in range(T):
        if not d:
            break
        new = []
        for i in range(1, len(d) + 1):
            lo = d[i] if i < len(d) else 0
            new.append(lo + trunc_geom(d[i - 1] - lo, q ** i, rng))
        while new and new[-1] == 0:
            new.pop()
        if __debug__:
            assert all(new[i] >= new[i + 1] for i in range(len(new) - 1)), "output not interlacing-valid"
        d = new
    return ParticleConfig(Partition(tuple(d)))


def discrete_L_q_batch(disp: np.ndarray, q: float, T: int, gen: np.random.Generator) -> np.ndarray:
    """Vectorized left map across replicas.

    ``disp`` has one replica per row, columns are displacement rows padded
    with zeros; lengths never grow under the map, so the width is static.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    d = np.array(disp, dtype=np.int64)
    if d.ndim != 2:
        raise ValueError("disp must be 2-d (replicas x rows)")
    width = d.shape[1]
    for _ in range(T):
        new = np.zeros_like(d)
        for i in range(width):
            lo = d[:, i + 1] if i + 1 < width else np.zeros(d.shape[0], dtype=np.int64)
            new[:, i] = lo + trunc_geom_array(d[:, i] - lo, q ** (i + 1), gen)
        d = new
    return d
