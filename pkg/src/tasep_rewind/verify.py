"""Verification runners behind the CLI ``verify`` subcommands and the
acceptance suite.  Each runner returns a JSON-able report carrying a ``pass``
flag and the quantities it was judged on.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import numpy as np

from .bernoulli import beta_tau, exact_window_check, sample_walk_batch, simulate_D_batch
from .bhp import discrete_L_q, simulate_bhp
from .core import ParticleConfig, Partition, RngStream, packed_array
from .markov_maps import pushblock
from .schur_oracle import (
    Specialization,
    bhp_generator,
    c_gibbs_conditional,
    exact_ctmc_distribution,
    harmonic_transform_check,
    l_q_transition_matrix,
    partitions_up_to,
    push_through_letters,
    spec_transform,
    uniformized_transient,
)
from .stats import chi_square_fit, chi_square_two_sample
from .stationary import corollary_sides, simulate_stationary
from .tasep import SpeedPlan, height, observables, simulate_tasep
from .tilings import enumerate_tilings, qvol_distribution, sample_vol_mcmc, verify_measure_swap, vol

__all__ = [
    "check_reversal_exact",
    "check_reversal_mc",
    "check_qmap_exact",
    "check_qmap_mc",
    "check_gibbs_swap",
    "check_tiling_swap",
    "check_tiling_mcmc",
    "check_limit_shape",
    "check_corollary",
    "check_stationary",
    "check_pushblock",
    "check_bernoulli",
    "check_harmonic",
]

P_THRESHOLD = 1e-3


def check_reversal_exact(t: float = 0.5, tau: float = math.log(2.0), m: int = 12) -> dict:
    """Exact finite-state version of the time-reversal identity.

    Transports the exact truncated time-t law through the backwards semigroup
    and compares with the exact law at time exp(-tau) t; the truncation leak
    bounds the error budget.
    """
    mu_t = exact_ctmc_distribution("tasep", m, t)
    states = list(mu_t.support)
    q_bhp = bhp_generator(states)
    evolved = uniformized_transient(q_bhp, np.array(mu_t.weights), tau)
    target = exact_ctmc_distribution("tasep", m, math.exp(-tau) * t)
    tv = 0.5 * float(np.abs(evolved - np.array(target.weights)).sum())
    leak = max(float(mu_t.leak), float(target.leak))
    tol = 2.0 * leak + 1e-9
    return {
        "name": "reversal-exact",
        "t": t,
        "tau": tau,
        "m": m,
        "tv": tv,
        "leak": leak,
        "tolerance": tol,
        "pass": bool(tv <= tol and leak < 1e-6),
    }


def check_reversal_mc(
    t: float = 2.0,
    tau: float = math.log(2.0),
    n: int = 100_000,
    seed: int = 7101,
    k_particles: int = 5,
) -> dict:
    """Monte Carlo time-reversal check on the joint law of the first particles,
    with the no-BHP comparison as a negative control that must reject."""
    speeds = SpeedPlan.homogeneous(1.0)
    forward: Counter = Counter()
    rewound: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed, i)
        mid = simulate_tasep(ParticleConfig(), speeds, t, rng)
        forward[tuple(mid.positions(k_particles))] += 1
        back = simulate_bhp(mid, tau, rng)
        rewound[tuple(back.positions(k_particles))] += 1
    reference: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed + 1, i)
        x = simulate_tasep(ParticleConfig(), speeds, math.exp(-tau) * t, rng)
        reference[tuple(x.positions(k_particles))] += 1
    main = chi_square_two_sample(rewound, reference)
    control = chi_square_two_sample(forward, reference)
    return {
        "name": "reversal-mc",
        "t": t,
        "tau": tau,
        "n": n,
        "seed": seed,
        "p_value": main.p_value,
        "statistic": main.statistic,
        "df": main.df,
        "control_p_value": control.p_value,
        "pass": bool(main.p_value > P_THRESHOLD and control.p_value < 1e-6),
    }


def check_qmap_exact(q: float = 0.7, t: float = 0.5, m: int = 10) -> dict:
    """Exact check that the one-step left map pulls the geometric-speed law
    from time t back to time q t on the truncated space."""
    speed = lambda i: q ** (i - 1)
    mu_t = exact_ctmc_distribution("tasep", m, t, speed=speed)
    states = list(mu_t.support)
    matrix = l_q_transition_matrix(states, q)
    evolved = np.array(mu_t.weights) @ matrix
    target = exact_ctmc_distribution("tasep", m, q * t, speed=speed)
    tv = 0.5 * float(np.abs(evolved - np.array(target.weights)).sum())
    leak = max(float(mu_t.leak), float(target.leak))
    tol = 2.0 * leak + 1e-9
    return {
        "name": "qmap-exact",
        "q": q,
        "t": t,
        "m": m,
        "tv": tv,
        "leak": leak,
        "tolerance": tol,
        "pass": bool(tv <= tol),
    }


def check_qmap_mc(
    q: float = 0.7,
    t: float = 2.0,
    n: int = 100_000,
    seed: int = 7301,
    k_particles: int = 3,
) -> dict:
    """Monte Carlo version of the geometric-rate pullback on (x_1..x_k)."""
    speeds = SpeedPlan.geometric(q)
    mapped: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed, i)
        x = simulate_tasep(ParticleConfig(), speeds, t, rng)
        y = discrete_L_q(x, q, 1, rng)
        mapped[tuple(y.positions(k_particles))] += 1
    reference: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed + 1, i)
        x = simulate_tasep(ParticleConfig(), speeds, q * t, rng)
        reference[tuple(x.positions(k_particles))] += 1
    rep = chi_square_two_sample(mapped, reference)
    return {
        "name": "qmap-mc",
        "q": q,
        "t": t,
        "n": n,
        "seed": seed,
        "p_value": rep.p_value,
        "statistic": rep.statistic,
        "df": rep.df,
        "pass": bool(rep.p_value > P_THRESHOLD),
    }


def _random_gibbs_instance(rng: RngStream, max_depth: int = 4, max_top: int = 6):
    depth = rng.integer(2, max_depth)
    while True:
        parts = sorted((rng.integer(0, 3) for _ in range(depth)), reverse=True)
        top = Partition(tuple(parts))
        if top.size <= max_top and len(top) <= depth:
            break
    while True:
        c = tuple(Fraction(rng.integer(1, 9), rng.integer(1, 9)) for _ in range(depth))
        if len(set(c)) == depth:
            break
    j = rng.integer(1, depth - 1)
    return top, c, j


def check_gibbs_swap(n_instances: int = 25, seed: int = 7401) -> dict:
    """Exact parameter-swap property of the level maps on random instances.

    Pushing the c-Gibbs conditional through the applicable level map must give
    the swapped-parameter conditional (checked in exact rational arithmetic),
    and the opposite-direction map must undo it.
    """
    rng = RngStream(seed, 0)
    worst_swap = 0.0
    worst_round = 0.0
    for _ in range(n_instances):
        top, c, j = _random_gibbs_instance(rng)
        dist = c_gibbs_conditional(top, c)
        states = list(dist.support)
        if c[j - 1] > c[j]:
            first = (j, "L", c[j] / c[j - 1])
            second = (j, "R", c[j] / c[j - 1])
        else:
            first = (j, "R", c[j - 1] / c[j])
            second = (j, "L", c[j - 1] / c[j])
        pushed = push_through_letters(states, dist.weights, [first])
        swapped_c = list(c)
        swapped_c[j - 1], swapped_c[j] = swapped_c[j], swapped_c[j - 1]
        target = c_gibbs_conditional(top, tuple(swapped_c))
        target_by_state = dict(zip(target.support, target.weights))
        tv_swap = float(sum(abs(w - target_by_state[s]) for s, w in zip(states, pushed))) / 2
        back = push_through_letters(states, pushed, [second])
        tv_round = float(sum(abs(w - w0) for w, w0 in zip(back, dist.weights))) / 2
        worst_swap = max(worst_swap, tv_swap)
        worst_round = max(worst_round, tv_round)
    return {
        "name": "gibbs-swap",
        "instances": n_instances,
        "seed": seed,
        "tv_swap_max": worst_swap,
        "tv_roundtrip_max": worst_round,
        "pass": bool(worst_swap <= 1e-12 and worst_round <= 1e-12),
    }


def check_tiling_swap(a: int = 2, b: int = 2, c: int = 2, q: float = 0.8) -> dict:
    """Exact hexagon checks: swap of the q^(+-vol) measures, invariance under
    the squared map, and the enumeration count."""
    report = verify_measure_swap(a, b, c, q)
    expected_count = {(2, 2, 2): 20}.get((a, b, c))
    count_ok = expected_count is None or report["count"] == expected_count
    report.update(
        {
            "name": "tiling-swap",
            "a": a,
            "b": b,
            "c": c,
            "q": q,
            "pass": bool(report["tv_swap"] <= 1e-12 and report["tv_t2"] <= 1e-12 and count_ok),
        }
    )
    return report


def check_tiling_mcmc(
    a: int = 3,
    b: int = 3,
    c: int = 3,
    q: float = 0.8,
    n: int = 100_000,
    seed: int = 7601,
    burn_in: int = 24,
) -> dict:
    """MCMC convergence of the squared swap sampler to the exact q^(-vol) law,
    judged on the volume statistic at burn-in and at twice the burn-in."""
    tilings = enumerate_tilings(a, b, c)
    exact = qvol_distribution(tilings, Fraction(q).limit_denominator(10**6), sign=-1)
    vol_probs: dict[int, float] = {}
    for t, w in zip(tilings, exact.weights):
        vol_probs[vol(t)] = vol_probs.get(vol(t), 0.0) + float(w)
    reports = {}
    for label, sweeps in (("burn_in", burn_in), ("doubled", 2 * burn_in)):
        vols = sample_vol_mcmc(a, b, c, q, n, sweeps, seed)
        counts = Counter(int(v) for v in vols)
        reports[label] = chi_square_fit(counts, vol_probs)
    return {
        "name": "tiling-mcmc",
        "a": a,
        "b": b,
        "c": c,
        "q": q,
        "n": n,
        "seed": seed,
        "burn_in": burn_in,
        "p_value_burn_in": reports["burn_in"].p_value,
        "p_value": reports["doubled"].p_value,
        "statistic": reports["doubled"].statistic,
        "df": reports["doubled"].df,
        "pass": bool(reports["doubled"].p_value > P_THRESHOLD),
    }


def check_limit_shape(t: float = 200.0, runs: int = 10, seed: int = 7701, kappa_max: float = 0.8) -> dict:
    """Height-function limit shape: the run-averaged interface against the
    parabola (kappa^2 + 1)/2 in sup norm over |z/t| <= kappa_max."""
    speeds = SpeedPlan.homogeneous(1.0)
    kappas = [k / 40.0 for k in range(-int(kappa_max * 40), int(kappa_max * 40) + 1)]
    sums = [0.0] * len(kappas)
    for run in range(runs):
        x = simulate_tasep(ParticleConfig(), speeds, t, RngStream(seed, run))
        for idx, kappa in enumerate(kappas):
            sums[idx] += height(x, round(kappa * t)) / t
    sup_err = max(
        abs(s / runs - (kappa * kappa + 1.0) / 2.0) for s, kappa in zip(sums, kappas)
    )
    return {
        "name": "limit-shape",
        "t": t,
        "runs": runs,
        "seed": seed,
        "sup_error": sup_err,
        "tolerance": 0.06,
        "pass": bool(sup_err <= 0.06),
    }


def check_corollary(t: float = 1.0, dt: float = 0.05, n: int = 1_000_000, seed: int = 7801) -> dict:
    """Stationary-identity estimator: finite-difference growth of E N0 against
    the hole-weighted expectation, within three combined standard errors."""
    rep = corollary_sides(t, n, dt, seed)
    out = rep.as_dict()
    out.update(
        {
            "name": "corollary",
            "seed": seed,
            "pass": bool(rep.gap <= 3.0 * rep.combined_se),
        }
    )
    return out


def check_stationary(
    t: float = 1.0,
    duration: float = 1.0,
    n: int = 100_000,
    seed: int = 7901,
) -> dict:
    """Invariance of the time-t law under the merged dynamics, judged on N0."""
    speeds = SpeedPlan.homogeneous(1.0)
    before: Counter = Counter()
    after: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed, i)
        x = simulate_tasep(ParticleConfig(), speeds, t, rng)
        before[observables(x).n0] += 1
        y = simulate_stationary(x, t, duration, rng)
        after[observables(y).n0] += 1
    rep = chi_square_two_sample(before, after)
    return {
        "name": "stationary",
        "t": t,
        "duration": duration,
        "n": n,
        "seed": seed,
        "p_value": rep.p_value,
        "statistic": rep.statistic,
        "df": rep.df,
        "pass": bool(rep.p_value > P_THRESHOLD),
    }


def check_pushblock(
    depth: int = 5,
    t: float = 1.0,
    n: int = 100_000,
    seed: int = 8001,
    k_particles: int = 3,
) -> dict:
    """Push-block coupling: the array diagonal lam^(i)_i - i against TASEP."""
    speeds = SpeedPlan.homogeneous(1.0)
    diag: Counter = Counter()
    start = packed_array(depth)
    for i in range(n):
        rng = RngStream(seed, i)
        arr = pushblock(start, t, rng)
        diag[tuple(int(arr.entry(j, j)) - j for j in range(1, k_particles + 1))] += 1
    direct: Counter = Counter()
    for i in range(n):
        rng = RngStream(seed + 1, i)
        x = simulate_tasep(ParticleConfig(), speeds, t, rng)
        direct[tuple(x.positions(k_particles))] += 1
    rep = chi_square_two_sample(diag, direct)
    return {
        "name": "pushblock",
        "depth": depth,
        "t": t,
        "n": n,
        "seed": seed,
        "p_value": rep.p_value,
        "statistic": rep.statistic,
        "df": rep.df,
        "pass": bool(rep.p_value > P_THRESHOLD),
    }


def check_bernoulli(
    beta: float = 0.6,
    tau: float = 0.5,
    m: int = 30,
    n: int = 100_000,
    seed: int = 8101,
) -> dict:
    """Walk coupling: exact tiny-window oracle plus a Monte Carlo test of the
    per-column increments against the flowed geometric law."""
    exact = exact_window_check(beta, tau, m=2)
    gen = np.random.Generator(np.random.Philox(key=np.array([seed, 0], dtype=np.uint64)))
    heights = sample_walk_batch(beta, m, n, gen)
    evolved = simulate_D_batch(heights, tau, gen)
    increments = np.diff(np.concatenate([np.zeros((n, 1), dtype=np.int64), evolved], axis=1), axis=1)
    counts = Counter(int(v) for v in increments.ravel())
    b2 = beta_tau(beta, tau)
    probs = {k: (1 - b2) * b2 ** k for k in range(80)}
    rep = chi_square_fit(counts, probs)
    return {
        "name": "bernoulli",
        "beta": beta,
        "tau": tau,
        "beta_tau": b2,
        "m": m,
        "n": n,
        "seed": seed,
        "exact_tv": exact["tv"],
        "exact_cap": exact["cap"],
        "p_value": rep.p_value,
        "statistic": rep.statistic,
        "df": rep.df,
        "pass": bool(exact["tv"] <= 1e-10 and rep.p_value > P_THRESHOLD),
    }


def check_harmonic(
    t: float = 1.0,
    q: float = 0.5,
    cutoff: int = 40,
    n_random: int = 100,
    seed: int = 8201,
) -> dict:
    """Specialization-transform semigroup property plus the closed-form match
    of the harmonic-family recursion for the Plancherel family."""
    rng = RngStream(seed, 0)
    worst_semi = 0.0
    for _ in range(n_random):
        k_alpha = rng.integer(0, 3)
        k_beta = rng.integer(0, 3)
        alpha = tuple(sorted((rng.random() * 2.0 for _ in range(k_alpha)), reverse=True))
        beta = tuple(sorted((rng.random() for _ in range(k_beta)), reverse=True))
        p = Specialization(alpha=alpha, beta=beta, gamma=rng.random() * 3.0)
        q1 = 0.2 + 0.75 * rng.random()
        twice = spec_transform(spec_transform(p, q1), q1)
        once = spec_transform(p, q1 * q1)
        diffs = [abs(x - y) for x, y in zip(twice.alpha, once.alpha)]
        diffs += [abs(x - y) for x, y in zip(twice.beta, once.beta)]
        diffs.append(abs(twice.gamma - once.gamma))
        worst_semi = max(worst_semi, max(diffs))
    worst_gap = 0.0
    worst_bound = 0.0
    for mu in partitions_up_to(3):
        for n_levels in range(max(1, len(mu)), 4):
            res = harmonic_transform_check(mu, n_levels, t, q, cutoff)
            worst_gap = max(worst_gap, res.gap)
            worst_bound = max(worst_bound, res.tail_bound)
    return {
        "name": "harmonic",
        "t": t,
        "q": q,
        "cutoff": cutoff,
        "semigroup_max_diff": worst_semi,
        "harmonic_max_gap": worst_gap,
        "harmonic_max_tail_bound": worst_bound,
        "pass": bool(worst_semi <= 1e-12 and worst_gap <= 1e-8),
    }
