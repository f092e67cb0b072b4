"""Granular-gas kinetics driven by a particle thermal bath: DSMC particle
solver, steady-state computation, and spectral analysis of the linearized
collision operators."""

__version__ = "0.1.0"

from .collisions import (
    BathParams,
    RestitutionParams,
    WeightParams,
    energy_change,
    maxwellian_density,
    maxwellian_sample,
    post_collision_n,
    post_collision_sigma,
    theta_sharp,
    weight_m,
)
from .diagnostics import (
    MomentRecord,
    RadialProfile,
    RateFit,
    collision_frequency_nu,
    fit_exponential_rate,
    inequality_suite,
    moments,
    radial_profile,
    weighted_distance,
    weighted_norm_estimate,
)
from .engine import ParticleEnsemble, SimConfig, run
from .linop import (
    OperatorMatrix,
    SpectrumReport,
    SplitParams,
    VelocityGrid,
    assemble_bath_operator,
    assemble_linearized,
    assemble_split,
    kernel_bound_check,
    kernel_k_e,
    spectrum,
)
from .steady import SteadyStateResult, alpha_sweep, compute_steady_state, perturbation_relaxation
