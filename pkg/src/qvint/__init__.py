"""Quaternion variational integrators for coupled rigid and morphing bodies."""

from .diagnostics import (
    ErrorReport,
    TrajectoryRecord,
    drift_slope,
    energy_error,
    momentum_errors,
    net_pitch,
    pitch_213,
    running_max,
    summarize,
)
from .integrators import (
    MidpointCache,
    NewtonResult,
    SingularJacobianError,
    SolverConfig,
    StepResult,
    initial_midpoint_cache,
    reversed_midpoint_cache,
    integrate,
    momentum_scale,
    newton_solve,
    residual_left,
    residual_mid,
    step_left,
    step_mid,
    step_rk_baseline,
    velocities_from_momenta,
)
from .model import (
    BodyState,
    CoefficientSet,
    MorphingSchedule,
    RigidParams,
    canonical_momenta,
    constant_schedule,
    energy_grad_omega,
    energy_grad_xdot,
    identify_rigid_params,
    kinetic_energy,
    physical_momenta,
    point_mass_coefficients,
    preset_free_body,
    preset_morphing,
    rigid_coefficients,
    skew,
    wing_motion,
)
from .quat import (
    cayley_map,
    cg_step,
    conj,
    exp_map,
    identity_quat,
    log_map,
    nlerp_mid,
    normalize,
    quat_mul,
    rotate_to_body,
    rotate_to_earth,
    slerp_mid,
)

__version__ = "0.1.0"

__all__ = [
    "BodyState",
    "CoefficientSet",
    "ErrorReport",
    "MidpointCache",
    "MorphingSchedule",
    "NewtonResult",
    "RigidParams",
    "SingularJacobianError",
    "SolverConfig",
    "StepResult",
    "TrajectoryRecord",
    "canonical_momenta",
    "cayley_map",
    "cg_step",
    "conj",
    "constant_schedule",
    "drift_slope",
    "energy_error",
    "energy_grad_omega",
    "energy_grad_xdot",
    "exp_map",
    "identify_rigid_params",
    "identity_quat",
    "initial_midpoint_cache",
    "reversed_midpoint_cache",
    "integrate",
    "kinetic_energy",
    "log_map",
    "momentum_errors",
    "momentum_scale",
    "net_pitch",
    "newton_solve",
    "nlerp_mid",
    "normalize",
    "physical_momenta",
    "pitch_213",
    "point_mass_coefficients",
    "preset_free_body",
    "preset_morphing",
    "quat_mul",
    "residual_left",
    "residual_mid",
    "rigid_coefficients",
    "rotate_to_body",
    "rotate_to_earth",
    "running_max",
    "skew",
    "slerp_mid",
    "step_left",
    "step_mid",
    "step_rk_baseline",
    "summarize",
    "velocities_from_momenta",
    "wing_motion",
    "__version__",
]
