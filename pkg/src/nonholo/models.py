"""Closed-form single-track vehicle models in absolute coordinates.

Ten variants are provided: eight primary models (skate vs rigid wheel,
constrained speed vs force/torque driven, assigned steering vs steering
torque), an alternate-pseudo-velocity form of the force-driven skate model
that is regular for every steering angle, and the yaw-rate form obtained by
the Lagrangian route, which is singular at gamma = 0.

All functions are pure; the kinematic no-slip constraints are solved exactly
by the closed forms, so constraint residuals evaluated on the returned
derivatives vanish to machine precision at any state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import BadSplit, LagrangeSingularity, SteeringSingularity
from .params import GRAVITY, VehicleParams

GAMMA_GUARD = 1e-9  # distance from the singular angle at which guards trip


class Variant(Enum):
    SKATE_KINEMATIC = "skate_kinematic"
    SKATE_FORCE = "skate_force"
    SKATE_TORQUE_STEER = "skate_torque_steer"
    SKATE_FORCE_TORQUE_STEER = "skate_force_torque_steer"
    WHEEL_KINEMATIC = "wheel_kinematic"
    WHEEL_TORQUE = "wheel_torque"
    WHEEL_TORQUE_STEER = "wheel_torque_steer"
    WHEEL_TORQUE_TORQUE_STEER = "wheel_torque_torque_steer"
    SKATE_FORCE_ALT_PSEUDO = "skate_force_alt_pseudo"
    SKATE_FORCE_LAGRANGE = "skate_force_lagrange"


STATE_FIELDS: dict[Variant, tuple[str, ...]] = {
    Variant.SKATE_KINEMATIC: ("x_G", "y_G", "psi"),
    Variant.SKATE_FORCE: ("x_G", "y_G", "psi", "sigma1"),
    Variant.SKATE_TORQUE_STEER: ("x_G", "y_G", "psi", "gamma", "sigma2"),
    Variant.SKATE_FORCE_TORQUE_STEER:
        ("x_G", "y_G", "psi", "gamma", "sigma1", "sigma2"),
    Variant.WHEEL_KINEMATIC: ("x_G", "y_G", "psi", "phi_R", "phi_F"),
    Variant.WHEEL_TORQUE: ("x_G", "y_G", "psi", "sigma1", "phi_R", "phi_F"),
    Variant.WHEEL_TORQUE_STEER:
        ("x_G", "y_G", "psi", "gamma", "sigma2", "phi_R", "phi_F"),
    Variant.WHEEL_TORQUE_TORQUE_STEER:
        ("x_G", "y_G", "psi", "gamma", "sigma1", "sigma2", "phi_R", "phi_F"),
    Variant.SKATE_FORCE_ALT_PSEUDO: ("x_G", "y_G", "psi", "sigma1_hat"),
    Variant.SKATE_FORCE_LAGRANGE: ("x_G", "y_G", "psi", "sigma1_bar"),
}

# inputs each variant consumes; anything else must stay zero
INPUT_FIELDS: dict[Variant, tuple[str, ...]] = {
    Variant.SKATE_KINEMATIC: ("gamma",),
    Variant.SKATE_FORCE: ("gamma", "gamma_dot", "gamma_ddot", "F_R", "F_F"),
    Variant.SKATE_TORQUE_STEER: ("T_s",),
    Variant.SKATE_FORCE_TORQUE_STEER: ("T_s", "F_R", "F_F"),
    Variant.WHEEL_KINEMATIC: ("gamma",),
    Variant.WHEEL_TORQUE: ("gamma", "gamma_dot", "gamma_ddot", "T_R", "T_F"),
    Variant.WHEEL_TORQUE_STEER: ("T_s",),
    Variant.WHEEL_TORQUE_TORQUE_STEER: ("T_s", "T_R", "T_F"),
    Variant.SKATE_FORCE_ALT_PSEUDO:
        ("gamma", "gamma_dot", "gamma_ddot", "F_R", "F_F"),
    Variant.SKATE_FORCE_LAGRANGE:
        ("gamma", "gamma_dot", "gamma_ddot", "F_R", "F_F"),
}

CONSTRAINED_SPEED = frozenset({
    Variant.SKATE_KINEMATIC, Variant.SKATE_TORQUE_STEER,
    Variant.WHEEL_KINEMATIC, Variant.WHEEL_TORQUE_STEER,
})

WHEEL_VARIANTS = frozenset({
    Variant.WHEEL_KINEMATIC, Variant.WHEEL_TORQUE,
    Variant.WHEEL_TORQUE_STEER, Variant.WHEEL_TORQUE_TORQUE_STEER,
})


@dataclass(frozen=True)
class DriveInput:
    """Inputs for one evaluation of the equations of motion.

    Only the fields relevant to the chosen variant may be non-zero; the
    assigned-steering force/torque-driven closed forms additionally need the
    first two derivatives of the steering command.
    """

    gamma: float = 0.0
    gamma_dot: float = 0.0
    gamma_ddot: float = 0.0
    F_R: float = 0.0
    F_F: float = 0.0
    T_R: float = 0.0
    T_F: float = 0.0
    T_s: float = 0.0

    def validate_for(self, variant: Variant) -> None:
        allowed = INPUT_FIELDS[variant]
        for name in ("gamma", "gamma_dot", "gamma_ddot",
                     "F_R", "F_F", "T_R", "T_F", "T_s"):
            if name not in allowed and getattr(self, name) != 0.0:
                raise ValueError(
                    f"input {name} is not used by {variant.value} and must be zero")


@dataclass(frozen=True)
class Environment:
    """Resistance environment: rolling resistance, air drag, grade, wind."""

    zeta: float = 0.0     # rolling resistance coefficient
    rho: float = 0.0      # air drag coefficient [kg/m]
    g: float = GRAVITY
    theta: float = 0.0    # road inclination [rad]
    v_w: float = 0.0      # headwind speed [m/s]


def _guard_gamma(gamma: float) -> None:
    if abs(gamma) >= 0.5 * math.pi - GAMMA_GUARD:
        raise SteeringSingularity(
            f"|gamma| = {abs(gamma):.9f} rad at the tan(gamma) singularity")


def resistance_pseudo_force(F_R: float, F_F: float, gamma: float,
                            sigma1: float, env: Environment,
                            params: VehicleParams) -> float:
    """Longitudinal pseudo-force including rolling, grade and drag losses."""
    _guard_gamma(gamma)
    m1 = params.m1
    return (F_R + F_F / math.cos(gamma)
            - env.zeta * m1 * env.g * math.cos(env.theta)
            - m1 * env.g * math.sin(env.theta)
            - env.rho * (env.v_w + sigma1) ** 2)


def eom_rhs(variant: Variant, state, u: DriveInput, params: VehicleParams,
            V: float | None = None, env: Environment | None = None) -> np.ndarray:
    """Right-hand side of the chosen model's equations of motion.

    ``state`` is ordered per ``STATE_FIELDS[variant]``. Constrained-speed
    variants take the constant longitudinal speed ``V``; it is a parameter,
    never integrated. ``env``, when given, replaces the driving pseudo-force
    with the resistance-corrected one in the force/torque driven variants.
    """
    u.validate_for(variant)
    y = np.asarray(state, dtype=float)
    if len(y) != len(STATE_FIELDS[variant]):
        raise ValueError(
            f"{variant.value} expects {len(STATE_FIELDS[variant])} states, got {len(y)}")
    if variant in CONSTRAINED_SPEED:
        if V is None or V <= 0.0:
            raise ValueError(f"{variant.value} needs constant speed V > 0")
    l, d = params.l, params.d
    m1, m2 = params.m1, params.m2
    J_F = params.J_F
    psi = y[2]

    if variant is Variant.SKATE_FORCE_ALT_PSEUDO:
        g_, s1h = u.gamma, y[3]
        cg, sg = math.cos(g_), math.sin(g_)
        denom = m1 * cg * cg + m2 * sg * sg
        out = np.empty(4)
        out[0] = s1h * (math.cos(psi) * cg - d / l * math.sin(psi) * sg)
        out[1] = s1h * (math.sin(psi) * cg + d / l * math.cos(psi) * sg)
        out[2] = s1h * sg / l
        out[3] = (u.F_R * cg + u.F_F
                  + (m1 - m2) * s1h * u.gamma_dot * sg * cg
                  - J_F / l * u.gamma_ddot * sg) / denom
        return out

    if variant is Variant.SKATE_FORCE_LAGRANGE:
        g_, s1b = u.gamma, y[3]
        if abs(g_) <= GAMMA_GUARD:
            raise LagrangeSingularity(
                f"gamma = {g_:.3e}: yaw-rate pseudo-velocity is singular at 0")
        _guard_gamma(g_)
        t = math.tan(g_)
        cot = 1.0 / t
        Pi1 = u.F_R + u.F_F / math.cos(g_)
        if env is not None:
            # sigma1 on the constraint manifold equals l*sigma1_bar/tan(gamma)
            Pi1 = resistance_pseudo_force(u.F_R, u.F_F, g_, l * s1b / t, env, params)
        out = np.empty(4)
        out[0] = (l * math.cos(psi) * cot - d * math.sin(psi)) * s1b
        out[1] = (l * math.sin(psi) * cot + d * math.cos(psi)) * s1b
        out[2] = s1b
        out[3] = (Pi1 * t / l
                  + m1 * u.gamma_dot * s1b / (math.sin(g_) * math.cos(g_))
                  - J_F / l ** 2 * u.gamma_ddot * t * t) / (m1 + m2 * t * t)
        return out

    # the eight primary variants share the planar kinematics block
    torque_steer = variant in (Variant.SKATE_TORQUE_STEER,
                               Variant.SKATE_FORCE_TORQUE_STEER,
                               Variant.WHEEL_TORQUE_STEER,
                               Variant.WHEEL_TORQUE_TORQUE_STEER)
    g_ = y[3] if torque_steer else u.gamma
    _guard_gamma(g_)
    t = math.tan(g_)
    cg = math.cos(g_)
    wheel = variant in WHEEL_VARIANTS
    if variant in CONSTRAINED_SPEED:
        sp = V
    else:
        sp = y[4] if torque_steer else y[3]

    out = np.empty(len(y))
    out[0] = sp * (math.cos(psi) - d / l * math.sin(psi) * t)
    out[1] = sp * (math.sin(psi) + d / l * math.cos(psi) * t)
    out[2] = sp * t / l

    if wheel:
        out[-2] = sp / params.r
        out[-1] = sp / (params.r * cg)

    if variant in (Variant.SKATE_KINEMATIC, Variant.WHEEL_KINEMATIC):
        return out

    if variant in (Variant.SKATE_TORQUE_STEER, Variant.WHEEL_TORQUE_STEER):
        sigma2 = y[4]
        out[3] = sigma2
        out[4] = u.T_s / J_F - V * sigma2 / (l * cg * cg)
        return out

    if variant in (Variant.SKATE_FORCE, Variant.WHEEL_TORQUE):
        Pi1 = (u.T_R + u.T_F / cg) / params.r if wheel \
            else u.F_R + u.F_F / cg
        if env is not None:
            F_R = u.T_R / params.r if wheel else u.F_R
            F_F = u.T_F / params.r if wheel else u.F_F
            Pi1 = resistance_pseudo_force(F_R, F_F, g_, sp, env, params)
        out[3] = (Pi1 - m2 * t / cg ** 2 * sp * u.gamma_dot
                  - J_F / l * u.gamma_ddot * t) / (m1 + m2 * t * t)
        return out

    # force/torque driven with steering torque
    sigma1, sigma2 = y[4], y[5]
    out[3] = sigma2
    if wheel:
        Pi1 = (u.T_R + u.T_F / cg) / params.r
        if env is not None:
            Pi1 = resistance_pseudo_force(u.T_R / params.r, u.T_F / params.r,
                                          g_, sigma1, env, params)
    else:
        Pi1 = u.F_R + u.F_F / cg
        if env is not None:
            Pi1 = resistance_pseudo_force(u.F_R, u.F_F, g_, sigma1, env, params)
    m2r = m2 - J_F / l ** 2
    denom = m1 + m2r * t * t
    out[4] = (Pi1 - m2r * t / cg ** 2 * sigma1 * sigma2
              - u.T_s / l * t) / denom
    out[5] = (-Pi1 * t / l - m1 / (l * cg * cg) * sigma1 * sigma2
              + u.T_s / J_F * (m1 + m2 * t * t)) / denom
    return out


def constraint_residuals(variant: Variant, state, derivative, u: DriveInput,
                         params: VehicleParams,
                         V: float | None = None) -> np.ndarray:
    """Left-hand sides of the kinematic constraints for the given derivative.

    Two lateral no-slip rows for every variant, a constant-speed row for the
    constrained-speed variants, two rolling rows for the wheel variants.
    """
    y = np.asarray(state, dtype=float)
    dy = np.asarray(derivative, dtype=float)
    torque_steer = variant in (Variant.SKATE_TORQUE_STEER,
                               Variant.SKATE_FORCE_TORQUE_STEER,
                               Variant.WHEEL_TORQUE_STEER,
                               Variant.WHEEL_TORQUE_TORQUE_STEER)
    g_ = y[3] if torque_steer else u.gamma
    psi = y[2]
    xd, yd, pd = dy[0], dy[1], dy[2]
    l, d = params.l, params.d
    res = [
        xd * math.sin(psi) - yd * math.cos(psi) + d * pd,
        xd * math.sin(psi + g_) - yd * math.cos(psi + g_)
        - (l - d) * pd * math.cos(g_),
    ]
    if variant in CONSTRAINED_SPEED:
        res.append(xd * math.cos(psi) + yd * math.sin(psi) - V)
    if variant in WHEEL_VARIANTS:
        res.append(xd * math.cos(psi) + yd * math.sin(psi) - params.r * dy[-2])
        res.append(xd * math.cos(psi + g_) + yd * math.sin(psi + g_)
                   + (l - d) * pd * math.sin(g_) - params.r * dy[-1])
    return np.array(res)


@dataclass(frozen=True)
class ConstraintForces:
    """Lateral constraining forces at the contact points and their ratios."""

    F_R_lat: float
    F_F_lat: float
    mu_R: float
    mu_F: float

    @property
    def lambda1(self) -> float:
        return -self.F_R_lat

    @property
    def lambda2(self) -> float:
        return -self.F_F_lat


def constraining_forces(sigma1: float, gamma: float, gamma_dot: float,
                        gamma_ddot: float, F_R: float, F_F: float,
                        params: VehicleParams,
                        g: float = GRAVITY) -> ConstraintForces:
    """Lateral forces that realize the no-slip constraints (skate force model).

    The force-to-weight ratios mu normalize by the static axle loads and
    approximate the friction demanded to keep rolling without sliding.
    """
    _guard_gamma(gamma)
    l, d = params.l, params.d
    m1, m2, m4 = params.m1, params.m2, params.m4
    t = math.tan(gamma)
    cg = math.cos(gamma)
    Pi1 = F_R + F_F / cg
    D = m1 + m2 * t * t
    J_F = params.J_F

    Ftil_R = (-(m2 - m4) * t / D * Pi1
              + (m1 - m4) * sigma1 ** 2 / l * t
              + m4 * sigma1 * gamma_dot / cg ** 2
              - (m1 + m4 * t * t) / D
              * (m2 * sigma1 * gamma_dot / cg ** 2 + J_F / l * gamma_ddot))
    Ftil_F = ((m2 * F_R * t / cg + (m2 - m1) * F_F * t
               + m1 * m2 * sigma1 * gamma_dot / cg ** 3
               + m1 * J_F / l * gamma_ddot / cg) / D
              + m4 * sigma1 ** 2 * t / (l * cg))
    mu_R = Ftil_R * l / (m1 * g * (l - d))
    mu_F = Ftil_F * l / (m1 * g * d)
    return ConstraintForces(Ftil_R, Ftil_F, mu_R, mu_F)


def drivetrain_split(F_res: float, beta: float) -> tuple[float, float]:
    """Split a resultant driving force between rear and front axles."""
    if not 0.0 <= beta <= 1.0:
        raise BadSplit(f"torque split ratio {beta} outside [0, 1]")
    return beta * F_res, (1.0 - beta) * F_res


def lateral_acceleration(speed: float, gamma: float, l: float) -> float:
    """Lateral acceleration of the rear axle centre: speed^2 * tan(gamma) / l."""
    _guard_gamma(gamma)
    return speed ** 2 * math.tan(gamma) / l


PSEUDO_CHOICES = ("sigma1", "psidot", "xGdot", "yGdot", "frontwheel")


def pseudo_velocity_determinant(choice: str, psi: float, gamma: float,
                                params: VehicleParams) -> float:
    """Determinant of the constraint+pseudo-velocity coefficient matrix.

    Zero marks configurations where the chosen pseudo-velocity cannot
    parameterize the generalized velocities.
    """
    l, d = params.l, params.d
    if choice == "sigma1":
        return l * math.cos(gamma)
    if choice == "psidot":
        return math.sin(gamma)
    if choice == "xGdot":
        return l * math.cos(psi) * math.cos(gamma) \
            - d * math.sin(psi) * math.sin(gamma)
    if choice == "yGdot":
        return l * math.sin(psi) * math.cos(gamma) \
            + d * math.cos(psi) * math.sin(gamma)
    if choice == "frontwheel":
        return l
    raise ValueError(f"unknown pseudo-velocity choice {choice!r}; "
                     f"expected one of {PSEUDO_CHOICES}")
