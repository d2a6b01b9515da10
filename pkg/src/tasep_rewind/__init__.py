"""Event-driven simulators for the TASEP time-reversal machinery, with exact
finite-state oracles and seeded statistical verification."""

from .core import (
    InterlacingArray,
    ParticleConfig,
    Partition,
    RngStream,
    config_to_partition,
    packed_array,
    partition_to_config,
    trunc_geom,
    validate_array,
)
from .tasep import SpeedPlan, height, observables, simulate_tasep
from .bhp import discrete_L_q, simulate_bhp
from .markov_maps import SpectralParams, bhp_array, iterated_L_q, pushblock, swap_level, t2_mcmc, t_map
from .stationary import corollary_sides, density_profile, pde_residual, simulate_stationary
from .bernoulli import WalkWindow, beta_tau, sample_walk, simulate_D
from .tilings import HexTiling, enumerate_tilings, render_svg, vol
from .schur_oracle import (
    DiscreteDistribution,
    Specialization,
    c_gibbs_conditional,
    exact_ctmc_distribution,
    harmonic_transform_check,
    plancherel_weight,
    schur_eval,
    spec_transform,
)
from .stats import distribution_distance, mc_runner

__version__ = "0.1.0"
