"""Nonholonomic single-track vehicle models and path-following control.

Closed-form bicycle models (skate and rigid-wheel contact, constrained or
force/torque-driven, assigned or torque steering), the transformation to
path coordinates, bounded nonlinear path-following and longitudinal
controllers, linearized stability analysis, and a scenario simulator.
"""

from .params import ControlGains, VehicleParams, GRAVITY
from .path import (CurvatureProfile, PathQuery, PathTable, build_path,
                   curvature_at, frame_rates, frame_rates_inverse,
                   reconstruct_pose, wrap_angle)
from .models import (ConstraintForces, DriveInput, Environment, Variant,
                     constraining_forces, constraint_residuals,
                     drivetrain_split, eom_rhs, lateral_acceleration,
                     pseudo_velocity_determinant, resistance_pseudo_force)
from .pathframe import TrackPoint, pathframe_rhs
from .control import (DrivingForce, SteerCommand, WrapperSpec, driving_force,
                      feedback_steer, feedforward_steer, longitudinal_accel,
                      preview_max_curvature, steer_derivative_chain,
                      steering_saturation, steering_torque, target_speed,
                      wrapper, wrapper_deriv)
from .analysis import (EquivalenceReport, EquivalenceScenario, LinearModel,
                       StabilityVerdict, kinematic_stability,
                       linearize_kinematic, linearize_longitudinal,
                       linearize_steering, routh_hurwitz_kinematic,
                       stability_grid, verify_equivalence)
from .sim import (FIGURES, Scenario, SimTrace, integrate, named_scenario,
                  rk4_step, run_scenario)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
