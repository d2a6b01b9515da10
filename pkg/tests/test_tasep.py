import math
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from tasep_rewind.core import ParticleConfig, Partition, RngStream
from tasep_rewind.schur_oracle import exact_ctmc_distribution
from tasep_rewind.stats import chi_square_fit
from tasep_rewind.tasep import (
    SpeedPlan,
    empirical_density,
    height,
    observables,
    simulate_tasep,
    tasep_trajectory,
)

STEP = ParticleConfig()


class TestSpeedPlan:
    def test_homogeneous(self):
        assert SpeedPlan.homogeneous(2.0).speed(17) == 2.0

    def test_geometric(self):
        plan = SpeedPlan.geometric(0.5)
        assert plan.speed(3) == pytest.approx(0.25)

    def test_explicit_out_of_range(self):
        plan = SpeedPlan.explicit([1.0, 2.0])
        with pytest.raises(IndexError):
            plan.speed(3)

    def test_validation(self):
        with pytest.raises(ValueError):
            SpeedPlan.geometric(1.5)
        with pytest.raises(ValueError):
            SpeedPlan.explicit([1.0, 0.0])


class TestSimulate:
    def test_time_zero_unchanged(self):
        x = ParticleConfig.from_displacements([3, 1])
        assert simulate_tasep(x, SpeedPlan.homogeneous(), 0.0, RngStream(1, 0)) == x

    def test_first_particle_free_poisson(self):
        # x_1 is never blocked: E[x_1(t)] = t - 1
        t, n = 1.5, 30_000
        total = 0
        for i in range(n):
            x = simulate_tasep(STEP, SpeedPlan.homogeneous(), t, RngStream(123, i))
            total += x.position(1)
        mean = total / n
        sigma = math.sqrt(t / n)
        assert abs(mean - (t - 1.0)) < 4.5 * sigma

    def test_no_jump_probability(self):
        # from step only x_1 can move; P(no jump by t) = exp(-c_1 t)
        t, n = 0.7, 40_000
        c1 = 0.8
        stay = sum(
            simulate_tasep(STEP, SpeedPlan.geometric(0.5, rate=c1), t, RngStream(321, i)).is_step()
            for i in range(n)
        )
        p = math.exp(-c1 * t)
        assert abs(stay / n - p) < 4.5 * math.sqrt(p * (1 - p) / n)

    def test_displacements_grow_monotonically(self):
        snaps = tasep_trajectory(STEP, SpeedPlan.homogeneous(), [0.5, 1.0, 2.0], RngStream(9, 0))
        sizes = [s.displacements.size for s in snaps]
        assert sizes == sorted(sizes)

    def test_matches_exact_oracle(self):
        # law of the displacement partition restricted to |lam| <= 8 at t = 0.5
        m, t, n = 8, 0.5, 100_000
        oracle = exact_ctmc_distribution("tasep", m, t)
        probs = {s: float(w) for s, w in zip(oracle.support, oracle.weights)}
        counts: Counter = Counter()
        overflow = 0
        for i in range(n):
            x = simulate_tasep(STEP, SpeedPlan.homogeneous(), t, RngStream(777, i))
            lam = x.displacements
            if lam.size <= m:
                counts[lam] += 1
            else:
                overflow += 1
        counts["overflow"] = overflow
        probs["overflow"] = float(oracle.leak)
        rep = chi_square_fit(counts, probs)
        assert rep.p_value > 1e-3


class TestHeight:
    def test_step_is_absolute_value(self):
        for site in (-3, 0, 4):
            assert height(STEP, site) == abs(site)

    def test_one_jump(self):
        x = ParticleConfig.from_positions([0, -2, -3])
        assert height(x, 0) == 2

    @given(st.lists(st.integers(0, 6), max_size=5), st.integers(-10, 10))
    def test_slope_is_plus_minus_one(self, parts, site):
        x = ParticleConfig(Partition(tuple(sorted(parts, reverse=True))))
        assert height(x, site) - height(x, site + 1) in (-1, 1)


class TestObservables:
    def test_step(self):
        obs = observables(STEP)
        assert obs.n0 == 0 and obs.rightmost_gap_distance == 1

    def test_two_right_of_origin(self):
        x = ParticleConfig.from_positions([2, 0, -3, -4])
        obs = observables(x)
        assert obs.n0 == 2 and obs.rightmost_gap_distance == 3

    def test_density_sampler_totals(self):
        x = ParticleConfig.from_positions([2, 0, -3, -4])
        hist = observables(x).density(0.5, -3.0, 2.0, 5)
        # mass recovers the particle count in the window [-6, 4) in site units:
        # particles at 2, 0, -3, -4 plus the packed tail -5, -6
        total = sum(rho for _, rho in hist) * 1.0 / 0.5
        assert total == pytest.approx(6, abs=1e-9)

    def test_density_approaches_profile(self):
        # run-averaged empirical density vs (t - z)/2t; bins kept wide because
        # density fluctuations are KPZ-correlated, not iid site noise
        t, runs = 200.0, 10
        acc = None
        for i in range(runs):
            x = simulate_tasep(STEP, SpeedPlan.homogeneous(), t, RngStream(555, i))
            hist = empirical_density(x, 1.0 / t, -0.8, 0.8, 8)
            vals = [rho for _, rho in hist]
            acc = vals if acc is None else [a + v for a, v in zip(acc, vals)]
        sup_err = max(abs(total / runs - (1.0 - z) / 2.0) for (z, _), total in zip(hist, acc))
        assert sup_err < 0.06
