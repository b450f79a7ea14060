"""flocklab: simulation and verification lab for self-organized alignment
dynamics - particle models with symmetric, relative-influence, leader and
vision-cone couplings, active-set contraction checks, flocking certificates,
and the 1D pressureless hydrodynamic limit."""

from .activeset import (
    ActionBound,
    ActiveSetReport,
    DecayReport,
    active_sets,
    default_theta_schedule,
    lemma_action_bound,
    verify_diameter_decay,
)
from .dynamics import (
    AgentEnsemble,
    DensityField,
    ModelSpec,
    TrajectoryRecord,
    UniformGrid,
    build_matrix,
    bulk_momentum,
    diameters,
    empirical_density,
    kinetic_consistency_check,
    rhs,
    simulate,
    step,
)
from .errors import FlockLabError, ScenarioError, StabilityError
from .flocking import (
    FlockingCertificate,
    certify,
    energy,
    fit_exponential_rate,
    solve_flock_diameter,
)
from .hydro import (
    HydroState1D,
    LagrangianParticles,
    hydro_certify,
    hydro_diameters,
    lagrangian_rhs,
    nonlocal_average,
    step_eulerian,
    step_lagrangian,
)
from .influence import (
    InfluenceFunction,
    InfluenceMatrix,
    build_cs,
    build_leader,
    build_mt,
    build_vision,
    eval_influence,
    range_integral,
    tail_integral,
)
from .rng import PRNG_ID, SplitMix64

__all__ = [
    "ActionBound",
    "ActiveSetReport",
    "AgentEnsemble",
    "DecayReport",
    "DensityField",
    "FlockLabError",
    "FlockingCertificate",
    "HydroState1D",
    "InfluenceFunction",
    "InfluenceMatrix",
    "LagrangianParticles",
    "ModelSpec",
    "PRNG_ID",
    "ScenarioError",
    "SplitMix64",
    "StabilityError",
    "TrajectoryRecord",
    "UniformGrid",
    "active_sets",
    "build_cs",
    "build_leader",
    "build_matrix",
    "build_mt",
    "build_vision",
    "bulk_momentum",
    "certify",
    "default_theta_schedule",
    "diameters",
    "empirical_density",
    "energy",
    "eval_influence",
    "fit_exponential_rate",
    "hydro_certify",
    "hydro_diameters",
    "kinetic_consistency_check",
    "lagrangian_rhs",
    "lemma_action_bound",
    "nonlocal_average",
    "range_integral",
    "rhs",
    "simulate",
    "solve_flock_diameter",
    "step",
    "step_eulerian",
    "step_lagrangian",
    "tail_integral",
    "verify_diameter_decay",
]

__version__ = "0.1.0"
