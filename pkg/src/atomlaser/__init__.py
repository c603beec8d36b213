"""Single-atom cavity laser: steady states, forces, cooling, trajectories."""

__version__ = "0.1.0"

from .params import SystemParams, coupling, grad_coupling
from .trajectory import Trajectory
from .lamb import (
    LambState,
    LambSteady,
    RotatingSteady,
    lamb_rhs,
    threshold_coupling,
    threshold_coupling_exact,
    emission_rate_lamb,
    saturated_inversion,
    lamb_steady_state,
    rotating_steady_state,
    force_lamb,
    continuity_residual,
    integrate_internal,
    integrate_coupled,
    instantaneous_force,
)
from .moments import (
    MomentVector,
    MomentSolution,
    NoPhysicalRootError,
    system_matrix,
    emission_rate,
    det4,
    solve_inversion,
    solve_self_consistent,
    solve_fixed_point,
    rate_equation_rhs,
    mean_force,
)
from .motion import (
    MotionCoefficients,
    EquilibriumSummary,
    first_order_response,
    friction,
    friction_from_response,
    noise_covariance,
    diffusion_field,
    diffusion_from_noise,
    diffusion_recoil,
    potential,
    potential_depth,
    position_average,
    motion_coefficients,
    equilibrium_temperature,
    inversion_gradient,
)
from .goodcavity import (
    OperatingPoint,
    gc_temperature,
    gc_min_temperature,
    gc_convergence_check,
    minimize_temperature_numeric,
)
from .stochsim import (
    CoefficientTable,
    EnsembleStats,
    simulate,
    simulate_ensemble,
    step_doubling_check,
    ensemble_stats,
)

__all__ = [
    "SystemParams",
    "coupling",
    "grad_coupling",
    "Trajectory",
    "LambState",
    "LambSteady",
    "RotatingSteady",
    "lamb_rhs",
    "threshold_coupling",
    "threshold_coupling_exact",
    "emission_rate_lamb",
    "saturated_inversion",
    "lamb_steady_state",
    "rotating_steady_state",
    "force_lamb",
    "continuity_residual",
    "integrate_internal",
    "integrate_coupled",
    "instantaneous_force",
    "MomentVector",
    "MomentSolution",
    "NoPhysicalRootError",
    "system_matrix",
    "emission_rate",
    "det4",
    "solve_inversion",
    "solve_self_consistent",
    "solve_fixed_point",
    "rate_equation_rhs",
    "mean_force",
    "MotionCoefficients",
    "EquilibriumSummary",
    "first_order_response",
    "friction",
    "friction_from_response",
    "noise_covariance",
    "diffusion_field",
    "diffusion_from_noise",
    "diffusion_recoil",
    "potential",
    "potential_depth",
    "position_average",
    "motion_coefficients",
    "equilibrium_temperature",
    "inversion_gradient",
    "OperatingPoint",
    "gc_temperature",
    "gc_min_temperature",
    "gc_convergence_check",
    "minimize_temperature_numeric",
    "CoefficientTable",
    "EnsembleStats",
    "simulate",
    "simulate_ensemble",
    "step_doubling_check",
    "ensemble_stats",
]
