"""Path-following and longitudinal controllers.

The steering command is a feedforward term that exactly traces the local
curvature plus a bounded nonlinear feedback on lateral and yaw errors. The
feedback is shaped by a "wrapper": an odd, bounded, monotone saturation
function with unit slope at the origin, drawn from the one-parameter family

    g_n'(x) = (1 + (c x)^2)^(-n/2),   n = 2, 3, ..., inf

whose bound constant c is fixed so that g_n(inf) = g_sat. n = 2 is the
arctangent wrapper used throughout; n = inf is the hard clamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import SteeringSingularity, TubeSingularity
from .params import ControlGains, VehicleParams
from .path import TUBE_EPS, CurvatureProfile

LAWS = ("linear", "nonlinear", "wrapped")


@dataclass(frozen=True)
class WrapperSpec:
    """Family index n (2, 3, ... or math.inf) and saturation bound."""

    n: float
    g_sat: float

    def __post_init__(self):
        if self.g_sat <= 0.0:
            raise ValueError("g_sat must be positive")
        if self.n != math.inf and (self.n < 2 or int(self.n) != self.n):
            raise ValueError("n must be an integer >= 2 or inf")


def _bound_constant(n: int, g_sat: float) -> float:
    """c such that the antiderivative of (1+(cx)^2)^(-n/2) saturates at g_sat."""
    if n == 2:
        return math.pi / (2.0 * g_sat)
    if n == 3:
        return 1.0 / g_sat
    ratio = 1.0
    k = n
    while k >= 4:
        ratio *= (k - 3) / (k - 2)
        k -= 2
    if n % 2 == 0:
        return ratio * math.pi / (2.0 * g_sat)
    return ratio / g_sat


def wrapper(spec: WrapperSpec, x: float) -> float:
    """Evaluate the wrapper g_n(x)."""
    if spec.n == math.inf:
        return min(max(x, -spec.g_sat), spec.g_sat)
    n = int(spec.n)
    c = _bound_constant(n, spec.g_sat)
    u = c * x
    log1pu2 = math.log1p(u * u)
    if n % 2 == 0:
        val = math.atan(u)
        k = 4
    else:
        val = u * math.exp(-0.5 * log1pu2)
        k = 5
    # ascending recurrence G_k = (k-3)/(k-2) G_{k-2} + u/((k-2)(1+u^2)^(k/2-1))
    while k <= n:
        val = (k - 3) / (k - 2) * val \
            + u * math.exp(-(0.5 * k - 1.0) * log1pu2) / (k - 2)
        k += 2
    # the recurrence can land one ulp past the bound; the bound is a contract
    return min(max(val / c, -spec.g_sat), spec.g_sat)


def wrapper_deriv(spec: WrapperSpec, x: float) -> float:
    """Slope g_n'(x); equals 1 at the origin for every member."""
    if spec.n == math.inf:
        return 1.0 if abs(x) < spec.g_sat else 0.0
    c = _bound_constant(int(spec.n), spec.g_sat)
    return math.exp(-0.5 * spec.n * math.log1p((c * x) ** 2))


def feedforward_steer(kappa_ref: float, l: float) -> float:
    """Steering angle that exactly traces curvature kappa_ref."""
    return math.atan(kappa_ref * l)


def feedback_steer(e_C: float, theta_C: float, gains: ControlGains,
                   gamma_sat: float | None = None, law: str = "wrapped",
                   wrapper_n: float = 2) -> float:
    """Feedback steering on the lateral and yaw errors.

    laws: 'linear'    k1*theta + k1*k2*e
          'nonlinear' k1*(theta + arctan(k2*e))
          'wrapped'   g(k1*(theta + arctan(k2*e))), |output| < gamma_sat
    """
    k1, k2 = gains.k1, gains.k2
    if law == "linear":
        return k1 * theta_C + k1 * k2 * e_C
    if law == "nonlinear":
        return k1 * (theta_C + math.atan(k2 * e_C))
    if law == "wrapped":
        if gamma_sat is None or gamma_sat <= 0.0:
            raise ValueError("wrapped law needs gamma_sat > 0")
        return wrapper(WrapperSpec(wrapper_n, gamma_sat),
                       k1 * (theta_C + math.atan(k2 * e_C)))
    raise ValueError(f"unknown law {law!r}; expected one of {LAWS}")


def desired_heading(e_C: float, gains: ControlGains) -> float:
    """Relative yaw the nonlinear law steers toward: -arctan(k2*e)."""
    return -math.atan(gains.k2 * e_C)


def steering_saturation(speed: float, gains: ControlGains,
                        params: VehicleParams) -> float:
    """Lateral-acceleration-limited steering bound; gamma_max at rest."""
    if speed <= 0.0:
        return params.gamma_max
    return min(params.gamma_max,
               math.atan(gains.a_lat_max * params.l / speed ** 2))


def steering_torque(gamma: float, gamma_des: float,
                    gains: ControlGains) -> float:
    """Low-level servo torque tracking gamma_des, bounded by T_sat."""
    return wrapper(WrapperSpec(2, gains.T_sat), gains.k_s * (gamma - gamma_des))


def target_speed(kappa_m: float, gains: ControlGains) -> float:
    """Speed keeping lateral acceleration within bound for curvature kappa_m."""
    if kappa_m < 0.0:
        raise ValueError("kappa_m must be non-negative")
    if kappa_m == 0.0:
        return gains.v_max
    return min(gains.v_max, math.sqrt(gains.a_lat_max / kappa_m))


def preview_max_curvature(profile: CurvatureProfile, s: float,
                          preview_dist: float) -> float:
    """max |kappa| over the preview window [s, s + preview_dist] (exact)."""
    if profile.kind == "straight":
        return 0.0
    if profile.kind == "circle":
        return abs(profile.kappa_const)
    two_pi = 2.0 * math.pi
    a = (two_pi * s / profile.s_T) % two_pi
    width = two_pi * preview_dist / profile.s_T
    if width >= two_pi:
        return profile.kappa_max
    b = a + width
    # kappa peaks where cos crosses its minimum, i.e. at odd multiples of pi
    if math.floor((b - math.pi) / two_pi) >= math.ceil((a - math.pi) / two_pi):
        min_cos = -1.0
    else:
        min_cos = min(math.cos(a), math.cos(b))
    return 0.5 * profile.kappa_max * (1.0 - min_cos)


def longitudinal_accel(sigma1: float, v_des: float,
                       gains: ControlGains) -> float:
    """Desired longitudinal acceleration, bounded by a_long_max."""
    return wrapper(WrapperSpec(2, gains.a_long_max),
                   gains.k_a * (sigma1 - v_des))


@dataclass(frozen=True)
class DrivingForce:
    """Feedback-linearizing rear driving force with its diagnostic terms."""

    F_R: float
    iota: float
    a1: float
    a2: float


def driving_force(a_des: float, gamma: float, gamma_dot: float,
                  gamma_ddot: float, sigma1: float,
                  params: VehicleParams) -> DrivingForce:
    """Rear-wheel-drive force for which the closed loop obeys sigma1' = a_des.

    F_R = m1*((1 + iota)*a_des + a1 + a2); iota and a1, a2 quantify how far
    the exact inverse is from the naive F_R = m1*a_des.
    """
    if abs(gamma) >= 0.5 * math.pi - 1e-9:
        raise SteeringSingularity(f"|gamma| = {abs(gamma):.9f} rad")
    m1, m2, J_F, l = params.m1, params.m2, params.J_F, params.l
    t = math.tan(gamma)
    cg = math.cos(gamma)
    iota = m2 / m1 * t * t
    a1 = m2 / m1 * math.sin(gamma) / cg ** 3 * gamma_dot * sigma1
    a2 = J_F / (m1 * l) * gamma_ddot * t
    return DrivingForce(m1 * ((1.0 + iota) * a_des + a1 + a2), iota, a1, a2)


@dataclass(frozen=True)
class SteerCommand:
    """Steering command with its split and, when requested, derivatives."""

    gamma_des: float
    gamma_ff: float
    gamma_fb: float
    gamma_dot: float = 0.0
    gamma_ddot: float = 0.0


def steer_derivative_chain(s: float, e: float, theta: float, speed: float,
                           speed_dot: float, profile: CurvatureProfile,
                           gains: ControlGains, gamma_sat: float,
                           params: VehicleParams) -> SteerCommand:
    """Steering command and its first two time derivatives along the flow.

    Differentiates gamma = arctan(kappa(s)*l) + g2(k1*(theta + arctan(k2*e)))
    through the path-frame kinematics; curvature derivatives come from the
    profile's closed forms. gamma_sat is treated as a constant here (it is
    refreshed from the current speed by the caller between evaluations).
    speed_dot is the instantaneous sigma1' (zero for constrained speed).
    """
    l = params.l
    k1, k2 = gains.k1, gains.k2
    kappa = profile.kappa(s)
    kp = profile.kappa_prime(s)
    kpp = profile.kappa_second(s)

    one = 1.0 - kappa * e
    if abs(one) < TUBE_EPS:
        raise TubeSingularity(f"1 - kappa*e = {one:.3e} at s = {s:.3f}")

    gamma_ff = math.atan(kappa * l)
    fb1 = k1 * (theta + math.atan(k2 * e))
    c = math.pi / (2.0 * gamma_sat)
    gamma_fb = math.atan(c * fb1) / c
    gamma = gamma_ff + gamma_fb

    ct, st = math.cos(theta), math.sin(theta)
    sdot = speed * ct / one
    edot = speed * st
    thetadot = speed * math.tan(gamma) / l - kappa * sdot

    kdot = kp * sdot
    den_e = 1.0 + (k2 * e) ** 2
    fb1_dot = k1 * (thetadot + k2 * edot / den_e)
    den_ff = 1.0 + (l * kappa) ** 2
    den_fb = 1.0 + (c * fb1) ** 2
    gamma_dot = l * kdot / den_ff + fb1_dot / den_fb

    cg = math.cos(gamma)
    sddot = (speed_dot * ct - speed * thetadot * st) / one \
        + speed * ct * (edot * kappa + e * kdot) / one ** 2
    eddot = speed_dot * st + speed * thetadot * ct
    thetaddot = (speed_dot * math.tan(gamma) / l
                 + speed * gamma_dot / (l * cg * cg)
                 - speed * kappa * ct * (edot * kappa + e * kdot) / one ** 2
                 - (speed_dot * kappa * ct + speed * kdot * ct
                    - speed * kappa * thetadot * st) / one)
    kddot = kp * sddot + kpp * sdot * sdot
    fb1_ddot = k1 * (thetaddot
                     + (k2 * eddot * den_e - 2.0 * k2 ** 3 * e * edot ** 2)
                     / den_e ** 2)
    gamma_ddot = ((l * kddot * den_ff - 2.0 * l ** 3 * kappa * kdot ** 2)
                  / den_ff ** 2
                  + (fb1_ddot * den_fb - 2.0 * c * c * fb1 * fb1_dot ** 2)
                  / den_fb ** 2)
    return SteerCommand(gamma, gamma_ff, gamma_fb, gamma_dot, gamma_ddot)
