"""Event-driven continuous-time TASEP from the step initial condition.

The state is the displacement partition d_i = x_i + i.  A particle can jump
iff its row of the partition is addable (the site to its right is free), so
the active set is finite at all times and the competing-exponential engine is
exact: draw Exp(total rate), then pick the jumping row proportionally to its
speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .core import ParticleConfig, Partition, RngStream

__all__ = [
    "SpeedPlan",
    "simulate_tasep",
    "tasep_trajectory",
    "height",
    "observables",
    "Observables",
    "holes_left_of_origin",
    "empirical_density",
]


@dataclass(frozen=True)
class SpeedPlan:
    """Particle speeds c_i > 0: homogeneous, geometric (ratio q), or explicit."""

    kind: str
    rate: float = 1.0
    ratio: float = 1.0
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("homogeneous", "geometric", "explicit"):
            raise ValueError(f"unknown speed plan kind {self.kind!r}")
        if self.kind in ("homogeneous", "geometric") and self.rate <= 0:
            raise ValueError("base rate must be positive")
        if self.kind == "geometric" and not 0 < self.ratio <= 1:
            raise ValueError("geometric ratio must lie in (0, 1]")
        if self.kind == "explicit" and any(v <= 0 for v in self.values):
            raise ValueError("explicit speeds must be positive")

    @classmethod
    def homogeneous(cls, rate: float = 1.0) -> "SpeedPlan":
        return cls("homogeneous", rate=rate)

    @classmethod
    def geometric(cls, ratio: float, rate: float = 1.0) -> "SpeedPlan":
        return cls("geometric", rate=rate, ratio=ratio)

    @classmethod
    def explicit(cls, values: Sequence[float]) -> "SpeedPlan":
        return cls("explicit", values=tuple(values))

    def speed(self, i: int) -> float:
        if i < 1:
            raise IndexError("particle index is 1-based")
        if self.kind == "homogeneous":
            return self.rate
        if self.kind == "geometric":
            return self.rate * self.ratio ** (i - 1)
        if i > len(self.values):
            raise IndexError(f"explicit speed plan has no entry for particle {i}")
        return self.values[i - 1]


def _active_rates(d: list[int], speed: Callable[[int], float]) -> tuple[list[int], list[float], float]:
    """Rows free to grow and their speeds.  Row 1 is always free; row i needs
    d_(i-1) > d_i; the first zero row (index len+1) is free whenever d is
    nonempty (its predecessor is positive)."""
    ell = len(d)
    rows = [1]
    for i in range(2, ell + 1):
        if d[i - 2] > d[i - 1]:
            rows.append(i)
    if ell >= 1:
        rows.append(ell + 1)
    rates = [speed(i) for i in rows]
    return rows, rates, sum(rates)


def _run_tasep(
    d: list[int],
    speed: Callable[[int], float],
    duration: float,
    rng: RngStream,
    rate_factor: float = 1.0,
) -> None:
    """Advance the displacement list in place for ``duration`` time units."""
    gen = rng.generator
    now = 0.0
    while True:
        rows, rates, total = _active_rates(d, speed)
        total *= rate_factor
        wait = float(gen.standard_exponential()) / total
        if now + wait > duration:
            return
        now += wait
        u = float(gen.random()) * total
        acc = 0.0
        chosen = rows[-1]
        for row, rate in zip(rows, rates):
            acc += rate * rate_factor
            if u < acc:
                chosen = row
                break
        if chosen == len(d) + 1:
            d.append(1)
        else:
            d[chosen - 1] += 1
            if __debug__ and chosen >= 2:
                assert d[chosen - 2] >= d[chosen - 1], "exclusion violated"


def simulate_tasep(
    initial: ParticleConfig,
    speeds: SpeedPlan,
    t: float,
    rng: RngStream,
) -> ParticleConfig:
    """Sample the TASEP configuration at time t started from ``initial``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    d = list(initial.displacements.parts)
    _run_tasep(d, speeds.speed, t, rng)
    return ParticleConfig(Partition(tuple(d)))


def tasep_trajectory(
    initial: ParticleConfig,
    speeds: SpeedPlan,
    times: Sequence[float],
    rng: RngStream,
) -> list[ParticleConfig]:
    """Configurations at the given increasing times, along one trajectory.

    Sharing a single event stream across the requested times is what the
    common-random-numbers estimators rely on.
    """
    if any(s < 0 for s in times) or any(times[i] > times[i + 1] for i in range(len(times) - 1)):
        raise ValueError("times must be nonnegative and nondecreasing")
    d = list(initial.displacements.parts)
    out: list[ParticleConfig] = []
    prev = 0.0
    for s in times:
        _run_tasep(d, speeds.speed, s - prev, rng)
        out.append(ParticleConfig(Partition(tuple(d))))
        prev = s
    return out


def height(x: ParticleConfig, site: int) -> int:
    """Interface height h = site + 2 #{i : x_i >= site}; equals |site| at step."""
    d = x.displacements.parts
    count = 0
    for i, di in enumerate(d, start=1):
        if di - i >= site:
            count += 1
    tail = -site - len(d)
    if tail > 0:
        count += tail
    return site + 2 * count


class Observables(NamedTuple):
    n0: int
    rightmost_gap_distance: int
    density: Callable


def observables(x: ParticleConfig) -> Observables:
    """(N0, D, density sampler) for a configuration.

    N0 counts particles at nonnegative sites.  D is the distance from the
    rightmost particle on the negative axis to the origin; D - 1 empty sites
    separate that particle from site 0 (see :func:`holes_left_of_origin`).
    """
    d = x.displacements.parts
    n0 = 0
    for i, di in enumerate(d, start=1):
        if di >= i:
            n0 += 1
        else:
            break
    first_negative = d[n0] - (n0 + 1) if n0 < len(d) else -(n0 + 1)

    def density(epsilon: float, z_min: float, z_max: float, bins: int) -> list[tuple[float, float]]:
        return empirical_density(x, epsilon, z_min, z_max, bins)

    return Observables(n0=n0, rightmost_gap_distance=-first_negative, density=density)


def holes_left_of_origin(x: ParticleConfig) -> int:
    """Number of empty sites in Z_<0 to the right of the rightmost negative
    particle; this (not the distance itself) is the weight appearing in the
    stationary-dynamics identity for N0."""
    return observables(x).rightmost_gap_distance - 1


def empirical_density(
    x: ParticleConfig,
    epsilon: float,
    z_min: float,
    z_max: float,
    bins: int,
) -> list[tuple[float, float]]:
    """Empirical measure eps * sum_x eta(x) delta_(eps x), binned over [z_min, z_max].

    Returns (bin center, density) pairs; the density of a fully packed region
    is 1 by construction.
    """
    if epsilon <= 0 or bins < 1 or z_max <= z_min:
        raise ValueError("need epsilon > 0, bins >= 1, z_max > z_min")
    width = (z_max - z_min) / bins
    counts = [0] * bins
    d = x.displacements.parts
    lo_site = math.floor(z_min / epsilon)

    def record(pos: int) -> None:
        z = pos * epsilon
        if z_min <= z < z_max:
            counts[int((z - z_min) / width)] += 1

    for i, di in enumerate(d, start=1):
        record(di - i)
    # packed tail: positions -(len+1), -(len+2), ... down to the window edge
    for i in range(len(d) + 1, -lo_site + 1):
        record(-i)
    return [
        (z_min + (b + 0.5) * width, counts[b] * epsilon / width)
        for b in range(bins)
    ]
