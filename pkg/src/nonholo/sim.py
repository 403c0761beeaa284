"""Fixed-step simulation of (model, controller, path) combinations.

The closed loop is integrated with classical fourth-order Runge-Kutta; the
controller is a pure function of the state and is evaluated inside every
stage, so invariant manifolds of the continuous closed loop (exact tracking
of the kinematic model) are preserved by the integrator. Traces are fully
deterministic given (scenario, dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .control import (WrapperSpec, driving_force, longitudinal_accel,
                      preview_max_curvature, steer_derivative_chain,
                      steering_saturation, target_speed, wrapper)
from .errors import GuardTripped, ModelGuardError, TubeSingularity
from .models import Variant, constraining_forces
from .params import ControlGains, VehicleParams
from .path import CurvatureProfile, PathTable, build_path

MODES = ("none", "steer_only", "steer_torque", "steer_longitudinal")

TRACE_COLUMNS = (
    "t", "x_G", "y_G", "psi", "gamma", "sigma1", "sigma2",
    "s_C", "e_C", "theta_C", "gamma_des", "gamma_ff", "gamma_fb",
    "T_s", "F_R", "a_des", "v_des", "a_lat", "iota", "a1", "a2",
    "mu_R", "mu_F", "resid_max",
)


@dataclass(frozen=True)
class Scenario:
    """A full simulation setup; see :func:`named_scenario` for the figures."""

    name: str
    variant: Variant
    profile: CurvatureProfile
    mode: str
    duration: float
    dt: float = 1e-3
    V: float = 20.0
    e0: float = 0.0
    theta0: float = 0.0
    s0: float = 0.0
    sigma1_0: float = 20.0
    gamma0: float = 0.0
    sigma2_0: float = 0.0
    path_length: float | None = None
    path_step: float = 0.1
    params: VehicleParams = field(default_factory=VehicleParams)
    gains: ControlGains = field(default_factory=ControlGains)
    law: str = "wrapped"
    wrapper_n: int = 2

    def __post_init__(self):
        if self.dt <= 0.0 or self.duration < self.dt:
            raise ValueError("need dt > 0 and duration >= dt")
        if self.mode not in MODES:
            raise ValueError(f"unknown controller mode {self.mode!r}")
        kappa0 = self.profile.kappa(self.s0)
        if abs(kappa0 * self.e0) >= 1.0:
            raise ValueError("initial state outside the curvature tube")


class SimTrace:
    """Time-indexed log of states, commands and diagnostics."""

    def __init__(self, data: dict[str, np.ndarray | None]):
        self.data = data
        for name in TRACE_COLUMNS:
            data.setdefault(name, None)

    def __getitem__(self, name: str) -> np.ndarray:
        col = self.data[name]
        if col is None:
            raise KeyError(f"column {name} not recorded for this scenario")
        return col

    def has(self, name: str) -> bool:
        return self.data.get(name) is not None

    @property
    def t(self) -> np.ndarray:
        return self.data["t"]

    def to_csv(self, path) -> None:
        n = len(self.t)
        cols = [self.data[name] for name in TRACE_COLUMNS]
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(TRACE_COLUMNS) + "\n")
            for i in range(n):
                fh.write(",".join(
                    "" if c is None else f"{c[i]:.12g}" for c in cols) + "\n")
        return None

    def summary(self) -> dict[str, float]:
        e = self["e_C"]
        t = self.t
        out = {
            "rms_e": float(np.sqrt(np.mean(e ** 2))),
            "max_abs_e": float(np.max(np.abs(e))),
            "final_e": float(e[-1]),
        }
        tail = t >= t[-1] / 2.0
        out["rms_e_tail"] = float(np.sqrt(np.mean(e[tail] ** 2)))
        inside = np.abs(e) < 0.05
        if inside[-1]:
            idx = np.nonzero(~inside)[0]
            out["settle_time"] = float(t[idx[-1] + 1]) if len(idx) else 0.0
        else:
            out["settle_time"] = math.inf
        out["zero_crossings"] = count_zero_crossings(e)
        if self.has("a_lat"):
            out["peak_a_lat"] = float(np.max(np.abs(self["a_lat"])))
        return out


def count_zero_crossings(e, dead_band: float = 1e-9) -> int:
    """Sign changes of a signal, ignoring values inside the dead band."""
    live = np.asarray(e)[np.abs(e) > dead_band]
    if len(live) < 2:
        return 0
    return int(np.count_nonzero(np.diff(np.sign(live)) != 0))


def rk4_step(rhs, t: float, y, h: float):
    """One classical Runge-Kutta step for a state stored as a sequence."""
    n = len(y)
    a = rhs(t, y)
    yb = [y[i] + 0.5 * h * a[i] for i in range(n)]
    b = rhs(t + 0.5 * h, yb)
    yc = [y[i] + 0.5 * h * b[i] for i in range(n)]
    c = rhs(t + 0.5 * h, yc)
    yd = [y[i] + h * c[i] for i in range(n)]
    d = rhs(t + h, yd)
    return [y[i] + h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i])
            for i in range(n)]


def integrate(rhs, y0, dt: float, duration: float, step_hook=None,
              t0: float = 0.0):
    """Fixed-step RK4 over [t0, t0 + duration]; returns (t, states) arrays.

    ``step_hook(t, y)``, when given, runs once at the start of every step
    (zero-order-hold controllers update their held values there). Model
    singularity guards raised by ``rhs`` are re-raised as
    :class:`GuardTripped` carrying the offending time.
    """
    n_steps = int(round(duration / dt))
    y = list(y0)
    ts = np.empty(n_steps + 1)
    ys = np.empty((n_steps + 1, len(y)))
    ts[0] = t0
    ys[0] = y
    for k in range(n_steps):
        t = t0 + k * dt
        try:
            if step_hook is not None:
                step_hook(t, y)
            y = rk4_step(rhs, t, y, dt)
        except ModelGuardError as exc:
            raise GuardTripped(t, exc) from exc
        ts[k + 1] = t + dt
        ys[k + 1] = y
    return ts, ys


# -- closed-loop right-hand sides -------------------------------------------

def _feedback_fn(sc: Scenario):
    k1, k2 = sc.gains.k1, sc.gains.k2
    if sc.law == "linear":
        return lambda e, th, gsat: k1 * th + k1 * k2 * e
    if sc.law == "nonlinear":
        return lambda e, th, gsat: k1 * (th + math.atan(k2 * e))
    if sc.law == "wrapped" and sc.wrapper_n == 2:
        def fb(e, th, gsat):
            c = math.pi / (2.0 * gsat)
            return math.atan(c * k1 * (th + math.atan(k2 * e))) / c
        return fb
    if sc.law == "wrapped":
        n = sc.wrapper_n

        def fb(e, th, gsat):
            return wrapper(WrapperSpec(n, gsat),
                           k1 * (th + math.atan(k2 * e)))
        return fb
    raise ValueError(f"unknown steering law {sc.law!r}")


def _make_loop(sc: Scenario):
    """Build (y0, rhs, probe) for the scenario's controller mode.

    ``probe(t, y)`` re-evaluates the controller at a committed state and
    returns the diagnostics row used for the trace.
    """
    prof = sc.profile
    params, gains = sc.params, sc.gains
    l, d = params.l, params.d
    m1, m2, J_F = params.m1, params.m2, params.J_F
    fb = _feedback_fn(sc)

    if sc.mode in ("none", "steer_only"):
        V = sc.V
        gsat = steering_saturation(V, gains, params)
        steer_off = sc.mode == "none"

        def rhs(t, y):
            s, e, th = y
            kap = prof.kappa(s)
            gamma = 0.0 if steer_off else math.atan(kap * l) + fb(e, th, gsat)
            one = 1.0 - kap * e
            if abs(one) < 1e-9:
                raise TubeSingularity(f"1 - kappa*e = {one:.3e}")
            sd = V * math.cos(th) / one
            return (sd, V * math.sin(th),
                    V * math.tan(gamma) / l - kap * sd)

        def probe(t, y):
            s, e, th = y
            kap = prof.kappa(s)
            gff = 0.0 if steer_off else math.atan(kap * l)
            gfb = 0.0 if steer_off else fb(e, th, gsat)
            gamma = gff + gfb
            return {"gamma": gamma, "gamma_des": gamma, "gamma_ff": gff,
                    "gamma_fb": gfb, "sigma1": V,
                    "a_lat": V * V * math.tan(gamma) / l}

        return [sc.s0, sc.e0, sc.theta0], rhs, probe

    if sc.mode == "steer_torque":
        V = sc.V
        gsat = steering_saturation(V, gains, params)
        t_L = gains.t_L
        k_s, T_sat = gains.k_s, gains.T_sat
        cT = math.pi / (2.0 * T_sat)

        def command(s, e, th):
            return math.atan(prof.kappa(s + V * t_L) * l) + fb(e, th, gsat)

        def rhs(t, y):
            s, e, th, g, s2 = y
            gdes = command(s, e, th)
            T_s = math.atan(cT * k_s * (g - gdes)) / cT
            kap = prof.kappa(s)
            one = 1.0 - kap * e
            if abs(one) < 1e-9:
                raise TubeSingularity(f"1 - kappa*e = {one:.3e}")
            cg = math.cos(g)
            sd = V * math.cos(th) / one
            return (sd, V * math.sin(th),
                    V * math.tan(g) / l - kap * sd,
                    s2, T_s / J_F - V * s2 / (l * cg * cg))

        def probe(t, y):
            s, e, th, g, s2 = y
            gff = math.atan(prof.kappa(s + V * t_L) * l)
            gfb = fb(e, th, gsat)
            gdes = gff + gfb
            T_s = math.atan(cT * k_s * (g - gdes)) / cT
            return {"gamma": g, "sigma2": s2, "gamma_des": gdes,
                    "gamma_ff": gff, "gamma_fb": gfb, "T_s": T_s,
                    "sigma1": V, "a_lat": V * V * math.tan(g) / l}

        return [sc.s0, sc.e0, sc.theta0, sc.gamma0, sc.sigma2_0], rhs, probe

    # steer_longitudinal: force-driven skate model, rear wheel drive,
    # feedback-linearizing force from the steering-derivative chain
    if sc.law != "wrapped" or sc.wrapper_n != 2:
        raise ValueError("longitudinal mode uses the wrapped n=2 steering law")
    if gains.t_L != 0.0:
        raise ValueError("the steering-derivative chain is specialized to "
                         "t_L = 0; look-ahead applies to the torque-steer mode")
    preview = gains.preview_dist
    k_a = gains.k_a

    def rhs(t, y):
        s, e, th, s1 = y
        gsat = steering_saturation(s1, gains, params)
        v_des = target_speed(preview_max_curvature(prof, s, preview), gains)
        a_des = longitudinal_accel(s1, v_des, gains)
        cmd = steer_derivative_chain(s, e, th, s1, a_des, prof, gains,
                                     gsat, params)
        F = driving_force(a_des, cmd.gamma_des, cmd.gamma_dot,
                          cmd.gamma_ddot, s1, params)
        kap = prof.kappa(s)
        one = 1.0 - kap * e
        if abs(one) < 1e-9:
            raise TubeSingularity(f"1 - kappa*e = {one:.3e}")
        g = cmd.gamma_des
        tg = math.tan(g)
        cg = math.cos(g)
        sd = s1 * math.cos(th) / one
        s1d = (F.F_R - m2 * tg / (cg * cg) * s1 * cmd.gamma_dot
               - J_F / l * cmd.gamma_ddot * tg) / (m1 + m2 * tg * tg)
        return (sd, s1 * math.sin(th),
                s1 * tg / l - kap * sd, s1d)

    def probe(t, y):
        s, e, th, s1 = y
        gsat = steering_saturation(s1, gains, params)
        v_des = target_speed(preview_max_curvature(prof, s, preview), gains)
        a_des = longitudinal_accel(s1, v_des, gains)
        cmd = steer_derivative_chain(s, e, th, s1, a_des, prof, gains,
                                     gsat, params)
        F = driving_force(a_des, cmd.gamma_des, cmd.gamma_dot,
                          cmd.gamma_ddot, s1, params)
        forces = constraining_forces(s1, cmd.gamma_des, cmd.gamma_dot,
                                     cmd.gamma_ddot, F.F_R, 0.0, params)
        return {"gamma": cmd.gamma_des, "sigma1": s1,
                "gamma_des": cmd.gamma_des, "gamma_ff": cmd.gamma_ff,
                "gamma_fb": cmd.gamma_fb, "F_R": F.F_R, "a_des": a_des,
                "v_des": v_des,
                "a_lat": s1 * s1 * math.tan(cmd.gamma_des) / l,
                "iota": F.iota, "a1": F.a1, "a2": F.a2,
                "mu_R": forces.mu_R, "mu_F": forces.mu_F}

    return [sc.s0, sc.e0, sc.theta0, sc.sigma1_0], rhs, probe


def _build_table(sc: Scenario) -> PathTable:
    length = sc.path_length
    if length is None and sc.profile.kind == "straight":
        length = sc.V * sc.duration * 1.1 + 100.0
    return build_path(sc.profile, step=sc.path_step, length=length)


def run_scenario(sc: Scenario, table: PathTable | None = None) -> SimTrace:
    """Integrate the scenario and assemble the full diagnostic trace."""
    if table is None:
        table = _build_table(sc)
    y0, rhs, probe = _make_loop(sc)
    ts, ys = integrate(rhs, y0, sc.dt, sc.duration)

    keys = sorted(probe(ts[0], list(ys[0])).keys())
    diag = {k: np.empty(len(ts)) for k in keys}
    for i in range(len(ts)):
        row = probe(ts[i], list(ys[i]))
        for k in keys:
            diag[k][i] = row[k]

    s_arr, e_arr, th_arr = ys[:, 0], ys[:, 1], ys[:, 2]
    xc, yc, psic = table.pose_at_many(s_arr)
    psi = psic + th_arr
    x_R = xc - e_arr * np.sin(psic)
    y_R = yc + e_arr * np.cos(psic)
    data: dict[str, np.ndarray | None] = {
        "t": ts,
        "s_C": s_arr, "e_C": e_arr, "theta_C": th_arr,
        "x_G": x_R + sc.params.d * np.cos(psi),
        "y_G": y_R + sc.params.d * np.sin(psi),
        "psi": psi,
    }
    data.update(diag)
    data["resid_max"] = _constraint_residual_rows(sc, table, ys, diag)
    return SimTrace(data)


def _constraint_residual_rows(sc: Scenario, table: PathTable, ys, diag):
    """Max no-slip residual per row, from the reconstructed absolute rates."""
    s_arr, e_arr, th_arr = ys[:, 0], ys[:, 1], ys[:, 2]
    kap = np.array([sc.profile.kappa(s) for s in s_arr])
    _, _, psic = table.pose_at_many(s_arr)
    psi = psic + th_arr
    gamma = diag["gamma"]
    sp = diag["sigma1"]
    l, d = sc.params.l, sc.params.d

    one = 1.0 - kap * e_arr
    sdot = sp * np.cos(th_arr) / one
    edot = sp * np.sin(th_arr)
    thdot = sp * np.tan(gamma) / l - kap * sdot
    psidot = kap * sdot + thdot
    x_Rdot = one * sdot * np.cos(psic) - edot * np.sin(psic)
    y_Rdot = one * sdot * np.sin(psic) + edot * np.cos(psic)
    x_Gdot = x_Rdot - d * psidot * np.sin(psi)
    y_Gdot = y_Rdot + d * psidot * np.cos(psi)

    r1 = x_Gdot * np.sin(psi) - y_Gdot * np.cos(psi) + d * psidot
    r2 = (x_Gdot * np.sin(psi + gamma) - y_Gdot * np.cos(psi + gamma)
          - (l - d) * psidot * np.cos(gamma))
    rows = [np.abs(r1), np.abs(r2)]
    if sc.mode in ("none", "steer_only", "steer_torque"):
        rows.append(np.abs(x_Gdot * np.cos(psi) + y_Gdot * np.sin(psi) - sp))
    return np.max(rows, axis=0)


# -- named scenarios reproducing the experiments -----------------------------

def named_scenario(name: str, params: VehicleParams | None = None,
                   gains: ControlGains | None = None,
                   dt: float = 1e-3) -> Scenario:
    """Built-in scenario definitions for the reference experiments."""
    params = params or VehicleParams()
    gains = gains or ControlGains()
    base = dict(params=params, gains=gains, dt=dt)
    if name == "fig13":
        return Scenario(name=name, variant=Variant.SKATE_KINEMATIC,
                        profile=CurvatureProfile.straight(), mode="steer_only",
                        duration=30.0, V=20.0, e0=-10.0, theta0=0.0, **base)
    if name == "fig14":
        return Scenario(name=name, variant=Variant.SKATE_KINEMATIC,
                        profile=CurvatureProfile.circle(200.0),
                        mode="steer_only", duration=35.0, V=20.0,
                        e0=-10.0, theta0=math.radians(20.0), **base)
    if name == "fig16":
        return Scenario(name=name, variant=Variant.SKATE_KINEMATIC,
                        profile=CurvatureProfile.periodic(4, 250.0),
                        mode="steer_only", duration=50.0, V=20.0,
                        e0=-10.0, **base)
    if name == "fig17":
        return Scenario(name=name, variant=Variant.SKATE_TORQUE_STEER,
                        profile=CurvatureProfile.periodic(4, 250.0),
                        mode="steer_torque", duration=50.0, V=20.0,
                        e0=-10.0, **base)
    if name == "fig18":
        base["gains"] = replace(gains, t_L=0.3)
        return Scenario(name=name, variant=Variant.SKATE_TORQUE_STEER,
                        profile=CurvatureProfile.periodic(4, 250.0),
                        mode="steer_torque", duration=50.0, V=20.0,
                        e0=-10.0, **base)
    if name == "fig20":
        return Scenario(name=name, variant=Variant.SKATE_FORCE,
                        profile=CurvatureProfile.periodic(4, 250.0),
                        mode="steer_longitudinal", duration=60.0,
                        e0=-10.0, sigma1_0=20.0, **base)
    if name == "fig21":
        base["gains"] = replace(gains, a_lat_max=12.0)
        return Scenario(name=name, variant=Variant.SKATE_FORCE,
                        profile=CurvatureProfile.periodic(4, 50.0),
                        mode="steer_longitudinal", duration=30.0,
                        e0=-10.0, sigma1_0=20.0, **base)
    raise ValueError(f"unknown scenario {name!r}; known: {sorted(FIGURES)}")


FIGURES = ("fig13", "fig14", "fig16", "fig17", "fig18", "fig20", "fig21")
