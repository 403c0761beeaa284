"""Linearized closed loops, stability criteria, and model-equivalence checks.

The linearizations are taken about the perfect-tracking motion on a path of
constant curvature kappa_star. Coefficient matrices are validated in the test
suite against central finite differences of the nonlinear closed-loop
right-hand sides, which also arbitrates the printed-coefficient ambiguities
noted in the decisions ledger.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateEquilibrium, ModelGuardError, SingularEncounter
from .models import DriveInput, Variant, eom_rhs
from .params import ControlGains, VehicleParams


@dataclass(frozen=True)
class LinearModel:
    """x' = A x + B w with named states and disturbance inputs."""

    A: np.ndarray
    B: np.ndarray
    states: tuple[str, ...]
    inputs: tuple[str, ...] = ()

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.A)

    def max_real(self) -> float:
        return float(np.max(self.eigenvalues().real))

    def is_stable(self) -> bool:
        return self.max_real() < 0.0


@dataclass(frozen=True)
class StabilityVerdict:
    eigenvalues: tuple[complex, ...]
    stable: bool
    criterion_stable: bool

    @property
    def agree(self) -> bool:
        return self.stable == self.criterion_stable


def linearize_kinematic(kappa_star: float, V: float, l: float,
                        k1: float, k2: float,
                        full: bool = False) -> LinearModel:
    """Lateral error dynamics of the kinematic closed loop.

    Returns the 2x2 (e, theta) block by default, or the 3-state form with the
    longitudinal row when ``full``. The disturbance matrix is identically
    zero: curvature perturbations do not enter the linearized error dynamics,
    so the loop tracks varying-curvature paths exactly.
    """
    one = 1.0 + kappa_star ** 2 * l ** 2
    a_e = V / l * (k1 * k2 * one - kappa_star ** 2 * l)
    a_th = V / l * k1 * one
    A2 = np.array([[0.0, V], [a_e, a_th]])
    if not full:
        return LinearModel(A2, np.zeros((2, 1)), ("e", "theta"), ("kappa",))
    A = np.zeros((3, 3))
    A[0, 1] = V * kappa_star
    A[1:, 1:] = A2
    return LinearModel(A, np.zeros((3, 1)), ("s", "e", "theta"), ("kappa",))


def routh_hurwitz_kinematic(kappa_star: float, l: float,
                            k1: float, k2: float) -> bool:
    """Closed-form stability condition of the kinematic lateral loop."""
    bound = kappa_star ** 2 * l / (1.0 + kappa_star ** 2 * l ** 2)
    return k1 < 0.0 and k1 * k2 < bound


def kinematic_stability(kappa_star: float, V: float, l: float,
                        k1: float, k2: float) -> StabilityVerdict:
    model = linearize_kinematic(kappa_star, V, l, k1, k2)
    eig = model.eigenvalues()
    return StabilityVerdict(tuple(eig), bool(np.max(eig.real) < 0.0),
                            routh_hurwitz_kinematic(kappa_star, l, k1, k2))


def stability_grid(k1_values, k2_values, kappa_star: float, V: float, l: float,
                   boundary_band: float = 1e-8):
    """Sweep (k1, k2); yields rows (k1, k2, criterion, max_real, agree, near).

    Points within ``boundary_band`` of the closed-form stability boundary are
    flagged ``near`` and excluded from agreement statistics by callers.
    """
    bound = kappa_star ** 2 * l / (1.0 + kappa_star ** 2 * l ** 2)
    rows = []
    for k1 in k1_values:
        for k2 in k2_values:
            verdict = kinematic_stability(kappa_star, V, l, k1, k2)
            near = abs(k1) < boundary_band or abs(k1 * k2 - bound) < boundary_band
            rows.append((float(k1), float(k2), verdict.criterion_stable,
                         float(np.max(np.real(verdict.eigenvalues))),
                         verdict.agree, near))
    return rows


def linearize_steering(kappa_star: float, V: float, params: VehicleParams,
                       gains: ControlGains,
                       t_L: float | None = None) -> LinearModel:
    """Lateral loop with steering-torque dynamics: states (e, theta, gamma, sigma2).

    Disturbance inputs are (kappa, kappa_prime); look-ahead only changes the
    disturbance matrix, adding the V*t_L*kappa_prime feedthrough.
    """
    l, J_F = params.l, params.J_F
    k1, k2, k_s = gains.k1, gains.k2, gains.k_s
    one = 1.0 + kappa_star ** 2 * l ** 2
    A = np.array([
        [0.0, V, 0.0, 0.0],
        [-V * kappa_star ** 2, 0.0, V / l * one, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-k_s * k1 * k2 / J_F, -k_s * k1 / J_F, k_s / J_F, -V / l * one],
    ])
    tl = gains.t_L if t_L is None else t_L
    gain_k = -k_s * l / (J_F * one)
    B = np.array([
        [0.0, 0.0],
        [-V, 0.0],
        [0.0, 0.0],
        [gain_k, gain_k * V * tl],
    ])
    return LinearModel(A, B, ("e", "theta", "gamma", "sigma2"),
                       ("kappa", "kappa_prime"))


def linearize_longitudinal(kappa_star: float, params: VehicleParams,
                           gains: ControlGains) -> LinearModel:
    """Coupled lateral/longitudinal loop about the curvature-limited speed.

    The equilibrium speed is sqrt(a_lat_max/|kappa_star|); it must not
    saturate at v_max, so kappa_star = 0 (and any curvature low enough to cap
    the target speed) has no such equilibrium.
    """
    if kappa_star == 0.0:
        raise DegenerateEquilibrium(
            "kappa_star = 0: target speed saturates at v_max")
    sigma_star = math.sqrt(gains.a_lat_max / abs(kappa_star))
    if sigma_star > gains.v_max:
        raise DegenerateEquilibrium(
            f"target speed {sigma_star:.3f} m/s saturates at v_max = "
            f"{gains.v_max:.3f} m/s")
    l = params.l
    k1, k2, k_a = gains.k1, gains.k2, gains.k_a
    one = 1.0 + kappa_star ** 2 * l ** 2
    A = np.array([
        [0.0, sigma_star * kappa_star, 0.0, 1.0],
        [0.0, 0.0, sigma_star, 0.0],
        [0.0, sigma_star / l * (k1 * k2 * one - kappa_star ** 2 * l),
         sigma_star / l * k1 * one, 0.0],
        [0.0, 0.0, 0.0, k_a],
    ])
    # d v_des / d kappa_m = -sigma_star / (2 |kappa_star|)
    B = np.zeros((4, 1))
    B[3, 0] = k_a * sigma_star / (2.0 * abs(kappa_star))
    return LinearModel(A, B, ("s", "e", "theta", "sigma1"), ("kappa_m",))


# -- cross-model equivalence ------------------------------------------------

@dataclass(frozen=True)
class EquivalenceScenario:
    """Open-loop input signals and initial state for an equivalence run."""

    duration: float
    dt: float
    x0: float = 0.0
    y0: float = 0.0
    psi0: float = 0.0
    sigma1_0: float = 15.0
    gamma_fn: Callable[[float], tuple[float, float, float]] = \
        field(default=lambda t: (0.0, 0.0, 0.0))
    F_R_fn: Callable[[float], float] = field(default=lambda t: 0.0)
    F_F_fn: Callable[[float], float] = field(default=lambda t: 0.0)


def _sine_steer(amp: float, omega: float, offset: float = 0.0):
    def fn(t: float):
        return (offset + amp * math.sin(omega * t),
                amp * omega * math.cos(omega * t),
                -amp * omega ** 2 * math.sin(omega * t))
    return fn


DEFAULT_SCENARIOS = {
    "skate_wheel": EquivalenceScenario(
        duration=10.0, dt=1e-3, sigma1_0=15.0,
        gamma_fn=_sine_steer(0.3, 0.5),
        F_R_fn=lambda t: 300.0 + 200.0 * math.sin(0.3 * t),
        F_F_fn=lambda t: 100.0 * math.cos(0.7 * t)),
    "appell_lagrange": EquivalenceScenario(
        duration=10.0, dt=1e-3, sigma1_0=15.0,
        gamma_fn=_sine_steer(0.15, 0.5, offset=0.3),
        F_R_fn=lambda t: 200.0 + 100.0 * math.sin(0.4 * t)),
    "alt_pseudo": EquivalenceScenario(
        duration=10.0, dt=1e-3, sigma1_0=15.0,
        gamma_fn=_sine_steer(0.4, 0.6),
        F_R_fn=lambda t: 250.0 + 150.0 * math.sin(0.45 * t),
        F_F_fn=lambda t: 80.0 * math.sin(0.9 * t)),
}


@dataclass(frozen=True)
class EquivalenceReport:
    pair: str
    max_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol


def _integrate_open_loop(variant: Variant, y0, sc: EquivalenceScenario,
                         params: VehicleParams, to_torque: bool):
    y = np.array(y0, dtype=float)
    n = int(round(sc.duration / sc.dt))
    out = np.empty((n + 1, len(y)))
    out[0] = y
    r = params.r
    for i in range(n):
        t = i * sc.dt

        def rhs(tt, yy):
            g, gd, gdd = sc.gamma_fn(tt)
            fr, ff = sc.F_R_fn(tt), sc.F_F_fn(tt)
            if to_torque:
                u = DriveInput(gamma=g, gamma_dot=gd, gamma_ddot=gdd,
                               T_R=r * fr, T_F=r * ff)
            else:
                u = DriveInput(gamma=g, gamma_dot=gd, gamma_ddot=gdd,
                               F_R=fr, F_F=ff)
            return eom_rhs(variant, yy, u, params)

        try:
            h = sc.dt
            a = rhs(t, y)
            b = rhs(t + 0.5 * h, y + 0.5 * h * a)
            c = rhs(t + 0.5 * h, y + 0.5 * h * b)
            d = rhs(t + h, y + h * c)
            y = y + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
        except ModelGuardError as exc:
            raise SingularEncounter(
                f"{variant.value} hit a guard at t = {t:.4f} s: {exc}") from exc
        if not np.all(np.isfinite(y)):
            raise SingularEncounter(
                f"{variant.value} diverged at t = {t:.4f} s "
                f"(state left its validity region)")
        out[i + 1] = y
    return out


def verify_equivalence(pair: str, params: VehicleParams,
                       scenario: EquivalenceScenario | None = None,
                       tol: float | None = None) -> EquivalenceReport:
    """Integrate an equivalent model pair and report the worst state deviation.

    Pairs: 'skate_wheel' (driving torques T = r*F reproduce the skate model),
    'appell_lagrange' (yaw-rate pseudo-velocity form, valid away from
    gamma = 0), 'alt_pseudo' (front-wheel-speed pseudo-velocity, regular
    across gamma = 0).
    """
    if pair not in DEFAULT_SCENARIOS:
        raise ValueError(f"unknown pair {pair!r}")
    sc = scenario or DEFAULT_SCENARIOS[pair]
    default_tol = {"skate_wheel": 1e-9, "appell_lagrange": 1e-6,
                   "alt_pseudo": 1e-9}[pair]
    tol = default_tol if tol is None else tol

    base0 = [sc.x0, sc.y0, sc.psi0, sc.sigma1_0]
    ref = _integrate_open_loop(Variant.SKATE_FORCE, base0, sc, params,
                               to_torque=False)

    if pair == "skate_wheel":
        other = _integrate_open_loop(
            Variant.WHEEL_TORQUE, base0 + [0.0, 0.0], sc, params,
            to_torque=True)
        mapped = other[:, :4]
    elif pair == "alt_pseudo":
        g0 = sc.gamma_fn(0.0)[0]
        alt0 = base0[:3] + [sc.sigma1_0 / math.cos(g0)]
        other = _integrate_open_loop(
            Variant.SKATE_FORCE_ALT_PSEUDO, alt0, sc, params, to_torque=False)
        mapped = other.copy()
        n = mapped.shape[0]
        for i in range(n):
            g = sc.gamma_fn(i * sc.dt)[0]
            mapped[i, 3] = other[i, 3] * math.cos(g)
    else:
        # the yaw-rate form breaks down near gamma = 0 (cot gamma unbounded);
        # reject scenarios whose steering signal enters that band
        n_scan = int(round(sc.duration / sc.dt))
        min_gamma = min(abs(sc.gamma_fn(k * sc.dt)[0]) for k in range(n_scan + 1))
        if min_gamma < 1e-3:
            raise SingularEncounter(
                f"steering signal reaches |gamma| = {min_gamma:.2e}: "
                f"the yaw-rate pseudo-velocity form is singular at gamma = 0")
        g0 = sc.gamma_fn(0.0)[0]
        lag0 = base0[:3] + [sc.sigma1_0 * math.tan(g0) / params.l]
        other = _integrate_open_loop(
            Variant.SKATE_FORCE_LAGRANGE, lag0, sc, params, to_torque=False)
        mapped = other.copy()
        n = mapped.shape[0]
        for i in range(n):
            g = sc.gamma_fn(i * sc.dt)[0]
            mapped[i, 3] = other[i, 3] * params.l / math.tan(g)

    dev = float(np.max(np.abs(mapped - ref)))
    return EquivalenceReport(pair, dev, tol)
