"""Stationary dynamics (TASEP sped by t running against the backwards
process), the N0 identity estimator, and the hydrodynamic profile formulas
with finite-difference PDE residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ParticleConfig, Partition, RngStream
from .tasep import SpeedPlan, holes_left_of_origin, observables, tasep_trajectory

__all__ = [
    "simulate_stationary",
    "CorollaryReport",
    "corollary_sides",
    "FanProfile",
    "tasep_profile",
    "bhp_profile",
    "density_profile",
    "pde_residual",
]


def simulate_stationary(
    x: ParticleConfig,
    t: float,
    duration: float,
    rng: RngStream,
    include_bhp: bool = True,
) -> ParticleConfig:
    """Run the merged process (TASEP at speed t plus backwards jumps at speed 1)
    for ``duration``; started from a sample of the time-t law it preserves it.

    With ``include_bhp=False`` the generator reduces to TASEP sped up by t.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    if duration < 0:
        raise ValueError("duration must be nonnegative")
    d = list(x.displacements.parts)
    gen = rng.generator
    now = 0.0
    while True:
        # forward side: addable rows at speed t each
        rows = [1]
        for i in range(2, len(d) + 1):
            if d[i - 2] > d[i - 1]:
                rows.append(i)
        if len(d) >= 1:
            rows.append(len(d) + 1)
        forward_total = t * len(rows)
        # backward side: particle k at rate k * gap
        backward = []
        backward_total = 0.0
        if include_bhp:
            for k in range(1, len(d) + 1):
                nxt = d[k] if k < len(d) else 0
                g = d[k - 1] - nxt
                if g > 0:
                    backward.append((k, g))
                    backward_total += k * g
        total = forward_total + backward_total
        if __debug__:
            assert abs(total - (forward_total + backward_total)) == 0.0
        wait = float(gen.standard_exponential()) / total
        if now + wait > duration:
            break
        now += wait
        u = float(gen.random()) * total
        if u < forward_total:
            row = rows[min(int(u / t), len(rows) - 1)]
            if row == len(d) + 1:
                d.append(1)
            else:
                d[row - 1] += 1
        else:
            u -= forward_total
            acc = 0.0
            chosen, gap = backward[-1]
            for k, g in backward:
                acc += k * g
                if u < acc:
                    chosen, gap = k, g
                    break
            d[chosen - 1] -= rng.integer(1, gap)
            if d and d[-1] == 0:
                d.pop()
    return ParticleConfig(Partition(tuple(d)))


@dataclass(frozen=True)
class CorollaryReport:
    """Both sides of d/dt E N0_t = (1/t) E[N0 * (holes left of the origin)]."""

    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    t: float
    dt: float
    n: int

    @property
    def combined_se(self) -> float:
        return math.hypot(self.se_lhs, self.se_rhs)

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "se_lhs": self.se_lhs,
            "se_rhs": self.se_rhs,
            "combined_se": self.combined_se,
            "gap": self.gap,
            "t": self.t,
            "dt": self.dt,
            "n": self.n,
        }


def corollary_sides(t: float, n: int, dt: float, seed: int, g=None) -> CorollaryReport:
    """Monte Carlo estimate of both sides of the stationary identity for E G(N0).

    The left side is a central finite difference of E G(N0) at t -+ dt over
    common random numbers (one trajectory recorded at three times).  The right
    side is -(1/t) E[N0 (G(N0-1) - G(N0)) S] with S the number of holes
    between the rightmost negative particle and the origin; for the default
    G(n) = n this is (1/t) E[N0 * S].
    """
    if not 0 < dt < t:
        raise ValueError("need 0 < dt < t")
    if g is None:
        g = lambda k: float(k)
    speeds = SpeedPlan.homogeneous(1.0)
    times = [t - dt, t, t + dt]
    diff_sum = 0.0
    diff_sq = 0.0
    rhs_sum = 0.0
    rhs_sq = 0.0
    start = ParticleConfig()
    for i in range(n):
        rng = RngStream(seed, i)
        lo, mid, hi = tasep_trajectory(start, speeds, times, rng)
        diff = (g(observables(hi).n0) - g(observables(lo).n0)) / (2.0 * dt)
        n0 = observables(mid).n0
        term = -(n0 * (g(n0 - 1) - g(n0)) * holes_left_of_origin(mid)) / t
        diff_sum += diff
        diff_sq += diff * diff
        rhs_sum += term
        rhs_sq += term * term
    lhs = diff_sum / n
    rhs = rhs_sum / n
    se_lhs = math.sqrt(max(diff_sq / n - lhs * lhs, 0.0) / n)
    se_rhs = math.sqrt(max(rhs_sq / n - rhs * rhs, 0.0) / n)
    return CorollaryReport(lhs=lhs, rhs=rhs, se_lhs=se_lhs, se_rhs=se_rhs, t=t, dt=dt, n=n)


@dataclass(frozen=True)
class FanProfile:
    """Rarefaction-fan density: 1 left of -edge(t), (edge-z)/(2 edge) inside,
    0 right of edge(t).  ``kind`` selects the time flow: "tasep" has
    edge(t) = t, "bhp_from" decays as edge(t) = exp(t0 - t)."""

    kind: str
    t0: float = 0.0

    def edge(self, t: float) -> float:
        if self.kind == "tasep":
            return t
        if self.kind == "bhp_from":
            return math.exp(self.t0 - t)
        raise ValueError(f"unknown profile kind {self.kind!r}")

    def density(self, t: float, z: float) -> float:
        e = self.edge(t)
        if z < -e:
            return 1.0
        if z > e:
            return 0.0
        return (e - z) / (2.0 * e)

    def tail_integral(self, t: float, z: float) -> float:
        """Closed form of the remaining mass integral from z to +infinity."""
        e = self.edge(t)
        if z > e:
            return 0.0
        if z < -e:
            return -z
        return (e - z) ** 2 / (4.0 * e)


def tasep_profile() -> FanProfile:
    return FanProfile("tasep")


def bhp_profile(t0: float) -> FanProfile:
    return FanProfile("bhp_from", t0=t0)


def density_profile(kind: str, z: float, t: float, t0: float = 0.0) -> float:
    """Closed-form hydrodynamic density at scaled position z."""
    if t <= 0:
        raise ValueError("t must be positive")
    if kind == "tasep":
        return tasep_profile().density(t, z)
    if kind == "bhp_from":
        return bhp_profile(t0).density(t, z)
    raise ValueError(f"unknown profile kind {kind!r}")


def pde_residual(profile, t: float, z: float, h: float) -> tuple[float, float]:
    """Central-difference residuals of the two hydrodynamic equations.

    First the conservation law d_t rho + d_z[rho(1-rho)]; second the backwards
    flux equation, which for a TASEP-time profile reads
    d_t rho + (1/t) d_z[(1-rho)/rho * I] with I the closed-form tail integral,
    and for a backwards-time profile d_t rho - d_z[(1-rho)/rho * I].
    The stencil must stay inside the rarefaction fan (flagged otherwise).
    """
    if h <= 0:
        raise ValueError("h must be positive")
    if t - h <= 0:
        raise ValueError("stencil leaves t > 0")
    edges = [profile.edge(s) for s in (t - h, t, t + h)]
    if abs(z) + h >= min(edges):
        raise ValueError("stencil touches the rarefaction-fan edge")

    def rho(s: float, w: float) -> float:
        return profile.density(s, w)

    d_t = (rho(t + h, z) - rho(t - h, z)) / (2.0 * h)

    def burgers_flux(w: float) -> float:
        r = rho(t, w)
        return r * (1.0 - r)

    burgers = d_t + (burgers_flux(z + h) - burgers_flux(z - h)) / (2.0 * h)

    def backward_flux(w: float) -> float:
        r = rho(t, w)
        return (1.0 - r) / r * profile.tail_integral(t, w)

    d_z_flux = (backward_flux(z + h) - backward_flux(z - h)) / (2.0 * h)
    if getattr(profile, "kind", "tasep") == "bhp_from":
        backward = d_t - d_z_flux
    else:
        backward = d_t + d_z_flux / t
    return burgers, backward
