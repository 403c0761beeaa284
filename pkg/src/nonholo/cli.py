"""Command-line front end: scenarios, stability maps, sweeps, path export.

Exit codes: 0 success, 2 configuration error (first offending key named),
3 model guard tripped during integration (message carries time and guard).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analysis import stability_grid
from .config import dump_config, scenario_from_config
from .control import WrapperSpec, wrapper, wrapper_deriv
from .errors import ConfigError, GuardTripped, NonholoError
from .models import (Variant, DriveInput, constraining_forces,
                     constraint_residuals, eom_rhs)
from .params import VehicleParams
from .path import CurvatureProfile, build_path
from .sim import FIGURES, Scenario, SimTrace, named_scenario, run_scenario
from .svgplot import Panel, figure_panels


def _out_dir(args) -> Path:
    out = os.environ.get("NONHOLO_OUT") or args.out or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _plot_trace(trace: SimTrace, scenario: Scenario, out: Path) -> Path:
    from .sim import _build_table
    table = _build_table(scenario)
    traj = Panel("trajectory", "x [m]", "y [m]", equal_aspect=True)
    traj.add("path", table.x, table.y)
    traj.add("vehicle", trace["x_G"], trace["y_G"])
    errors = Panel("tracking errors", "t [s]", "e [m] / theta [rad]")
    errors.add("e_C", trace.t, trace["e_C"])
    errors.add("theta_C", trace.t, trace["theta_C"])
    steer = Panel("steering", "t [s]", "angle [rad]")
    steer.add("gamma_des", trace.t, trace["gamma_des"])
    steer.add("gamma_ff", trace.t, trace["gamma_ff"])
    steer.add("gamma_fb", trace.t, trace["gamma_fb"])
    if trace.has("T_s"):
        steer.add("gamma", trace.t, trace["gamma"])
    accel = Panel("accelerations", "t [s]", "a [m/s^2]")
    accel.add("a_lat", trace.t, trace["a_lat"])
    if trace.has("a_des"):
        accel.add("a_des", trace.t, trace["a_des"])
    panels = [traj, errors, steer, accel]
    if trace.has("v_des"):
        speeds = Panel("speeds", "t [s]", "v [m/s]")
        speeds.add("sigma1", trace.t, trace["sigma1"])
        speeds.add("v_des", trace.t, trace["v_des"])
        ratios = Panel("force-to-weight ratios", "t [s]", "mu")
        ratios.add("mu_R", trace.t, trace["mu_R"])
        ratios.add("mu_F", trace.t, trace["mu_F"])
        panels += [speeds, ratios]
    dest = out / f"{scenario.name}.svg"
    figure_panels(panels, dest)
    return dest


def _print_summary(scenario: Scenario, trace: SimTrace) -> None:
    s = trace.summary()
    settle = "never" if math.isinf(s["settle_time"]) else f"{s['settle_time']:.2f} s"
    crossings = s["zero_crossings"]
    overshoot = "no overshoot" if crossings <= 1 else f"{crossings} e_C zero crossings"
    print(f"{scenario.name}: settle(|e|<0.05m) = {settle}, {overshoot}, "
          f"rms e_C = {s['rms_e']:.4g} m (tail {s['rms_e_tail']:.4g} m), "
          f"peak |a_lat| = {s.get('peak_a_lat', float('nan')):.3f} m/s^2, "
          f"max residual = {float(np.max(trace['resid_max'])):.3g}")


def cmd_simulate(args) -> int:
    out = _out_dir(args)
    if args.figure == "randomcheck":
        return _random_audit(args, out)
    try:
        if args.config:
            text = Path(args.config).read_text(encoding="utf-8")
            scenario, output = scenario_from_config(text, source=args.config)
            if not args.out and not os.environ.get("NONHOLO_OUT"):
                out = Path(output["dir"])
                out.mkdir(parents=True, exist_ok=True)
            if args.plot is None:
                args.plot = output["plot"]
        elif args.figure:
            scenario = named_scenario(args.figure)
        else:
            print("simulate needs --figure or --config", file=sys.stderr)
            return 2
        if args.dt:
            scenario = replace(scenario, dt=args.dt)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.dump_config:
        print(dump_config(scenario), end="")
        return 0
    try:
        trace = run_scenario(scenario)
    except GuardTripped as exc:
        print(f"guard tripped: {exc}", file=sys.stderr)
        return 3
    trace.to_csv(out / "trace.csv")
    _print_summary(scenario, trace)
    if args.plot is None or args.plot:
        dest = _plot_trace(trace, scenario, out)
        print(f"wrote {out / 'trace.csv'} and {dest}")
    else:
        print(f"wrote {out / 'trace.csv'}")
    return 0


def _random_audit(args, out: Path) -> int:
    """Randomized property audit: constraint residuals and force oracles."""
    rng = np.random.default_rng(args.seed or 0)
    params = VehicleParams()
    worst_resid = 0.0
    for variant in Variant:
        if variant is Variant.SKATE_FORCE_LAGRANGE:
            continue
        for _ in range(200):
            y, u, V = _random_state(rng, variant, params)
            dy = eom_rhs(variant, y, u, params, V=V)
            res = constraint_residuals(variant, y, dy, u, params, V=V)
            worst_resid = max(worst_resid, float(np.max(np.abs(res))))
    worst_mu = 0.0
    for _ in range(200):
        sigma1 = rng.uniform(2.0, 30.0)
        gamma = rng.uniform(0.05, 0.5) * rng.choice([-1.0, 1.0])
        forces = constraining_forces(sigma1, gamma, rng.uniform(-0.5, 0.5),
                                     rng.uniform(-1.0, 1.0),
                                     rng.uniform(-2000, 2000),
                                     rng.uniform(-2000, 2000), params)
        worst_mu = max(worst_mu, abs(forces.mu_R), abs(forces.mu_F))
    print(f"randomcheck(seed={args.seed or 0}): max residual = {worst_resid:.3e}, "
          f"max |mu| sampled = {worst_mu:.3f}")
    ok = worst_resid < 1e-12
    print("randomcheck:", "PASS" if ok else "FAIL")
    return 0 if ok else 1


def _random_state(rng, variant, params):
    from .models import CONSTRAINED_SPEED, STATE_FIELDS, WHEEL_VARIANTS
    fields = STATE_FIELDS[variant]
    y = []
    for name in fields:
        if name in ("x_G", "y_G"):
            y.append(rng.uniform(-50, 50))
        elif name in ("psi", "phi_R", "phi_F"):
            y.append(rng.uniform(-math.pi, math.pi))
        elif name == "gamma":
            y.append(rng.uniform(-1.3, 1.3))
        elif name.startswith("sigma1"):
            y.append(rng.uniform(1.0, 30.0))
        else:
            y.append(rng.uniform(-1.0, 1.0))
    gamma = rng.uniform(-1.3, 1.3)
    kwargs = {}
    if "gamma" not in fields:
        kwargs["gamma"] = gamma
        if variant not in CONSTRAINED_SPEED:
            kwargs["gamma_dot"] = rng.uniform(-0.5, 0.5)
            kwargs["gamma_ddot"] = rng.uniform(-1.0, 1.0)
    if variant in WHEEL_VARIANTS:
        if variant not in CONSTRAINED_SPEED:
            kwargs["T_R"] = rng.uniform(-500, 500)
            kwargs["T_F"] = rng.uniform(-500, 500)
    elif variant not in CONSTRAINED_SPEED:
        kwargs["F_R"] = rng.uniform(-2000, 2000)
        kwargs["F_F"] = rng.uniform(-2000, 2000)
    if "sigma2" in fields and "T_s" in _allowed(variant):
        kwargs["T_s"] = rng.uniform(-1.0, 1.0)
    V = rng.uniform(5.0, 30.0) if variant in CONSTRAINED_SPEED else None
    return y, DriveInput(**kwargs), V


def _allowed(variant):
    from .models import INPUT_FIELDS
    return INPUT_FIELDS[variant]


def cmd_stability(args) -> int:
    out = _out_dir(args)
    try:
        k1 = np.linspace(args.k1[0], args.k1[1], int(args.k1[2]))
        k2 = np.linspace(args.k2[0], args.k2[1], int(args.k2[2]))
        kappas = [float(v) for v in args.kappa.split(",")]
        if len(k1) < 1 or len(k2) < 1:
            raise ValueError("empty grid")
    except (ValueError, IndexError) as exc:
        print(f"bad grid ranges: {exc}", file=sys.stderr)
        return 2
    params = VehicleParams()
    dest = out / "stability.csv"
    agree_n, total = 0, 0
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write("k1,k2,kappa_star,criterion,eig_max_real,agree\n")
        for kappa in kappas:
            for row in stability_grid(k1, k2, kappa, args.speed, params.l):
                k1v, k2v, crit, eig_max, agree, near = row
                fh.write(f"{k1v:.12g},{k2v:.12g},{kappa:.12g},"
                         f"{int(crit)},{eig_max:.12g},{int(agree)}\n")
                if not near:
                    total += 1
                    agree_n += int(agree)
    pct = 100.0 * agree_n / total if total else 100.0
    print(f"stability map: {total} grid points outside boundary band, "
          f"criterion/eigenvalue agreement {pct:.2f}%")
    print(f"wrote {dest}")
    if len(k1) == 1 and len(k2) == 1 and len(kappas) == 1:
        from .analysis import kinematic_stability
        verdict = kinematic_stability(kappas[0], args.speed, params.l,
                                      float(k1[0]), float(k2[0]))
        eigs = ", ".join(f"{z:.6g}" for z in verdict.eigenvalues)
        print(f"k1={k1[0]:g} k2={k2[0]:g} kappa*={kappas[0]:g}: "
              f"{'stable' if verdict.stable else 'unstable'}, eigenvalues [{eigs}]")
    return 0


SWEEP_PARAMS = ("t_L", "wrapper_n", "a_lat_max", "N", "s_T")


def _run_concurrently(scenarios):
    """Independent sweep runs share no mutable state; fan them out."""
    if len(scenarios) < 2 or (os.cpu_count() or 1) < 2:
        return [run_scenario(sc) for sc in scenarios]
    from concurrent.futures import ProcessPoolExecutor
    try:
        with ProcessPoolExecutor(
                max_workers=min(len(scenarios), os.cpu_count())) as pool:
            return list(pool.map(run_scenario, scenarios))
    except (OSError, RuntimeError):
        return [run_scenario(sc) for sc in scenarios]


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    if args.param not in SWEEP_PARAMS:
        print(f"unknown sweep parameter {args.param!r}; "
              f"expected one of {SWEEP_PARAMS}", file=sys.stderr)
        return 2
    try:
        values = [float(v) for v in args.values.split(",")]
    except ValueError as exc:
        print(f"bad values: {exc}", file=sys.stderr)
        return 2

    if args.param == "wrapper_n":
        return _sweep_wrapper(values, out)
    if args.param == "N":
        return _sweep_paths([CurvatureProfile.periodic(int(v), args.s_T)
                             for v in values], out)
    if args.param == "s_T":
        return _sweep_paths([CurvatureProfile.periodic(4, v) for v in values],
                            out)

    base = args.figure or ("fig17" if args.param == "t_L" else "fig20")
    scenarios = []
    for value in values:
        scenario = named_scenario(base, dt=args.dt or 1e-3)
        if args.param == "t_L":
            scenario = replace(scenario,
                               gains=replace(scenario.gains, t_L=value))
        else:
            scenario = replace(scenario,
                               gains=replace(scenario.gains, a_lat_max=value))
        scenarios.append(scenario)
    try:
        traces = _run_concurrently(scenarios)
    except GuardTripped as exc:
        print(f"guard tripped during sweep: {exc}", file=sys.stderr)
        return 3
    rows = []
    for value, trace in zip(values, traces):
        tail = trace.t >= trace.t[-1] * 0.4
        rms = float(np.sqrt(np.mean(trace["e_C"][tail] ** 2)))
        rows.append((value, rms))
        trace.to_csv(out / f"trace_{args.param}_{value:g}.csv")
        print(f"{args.param} = {value:g}: post-transient rms e_C = {rms:.5g} m")
    dest = out / f"sweep_{args.param}.csv"
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write(f"{args.param},rms_e\n")
        for value, rms in rows:
            fh.write(f"{value:.12g},{rms:.12g}\n")
    best = min(rows, key=lambda r: r[1])
    print(f"minimum rms e_C = {best[1]:.5g} m at {args.param} = {best[0]:g}")
    print(f"wrote {dest}")
    return 0


def _sweep_wrapper(values, out: Path) -> int:
    xs = np.linspace(-6.0, 6.0, 601)
    dest = out / "wrapper_curves.csv"
    panels = [Panel("wrapper g_n(x)", "x", "g_n(x)"),
              Panel("downscale factor g_n'(x)", "x", "g_n'(x)")]
    with open(dest, "w", encoding="utf-8") as fh:
        fh.write("x," + ",".join(f"g_{v:g},gp_{v:g}" for v in values) + "\n")
        cols = []
        for v in values:
            spec = WrapperSpec(math.inf if math.isinf(v) else int(v), 1.0)
            g = [wrapper(spec, float(x)) for x in xs]
            gp = [wrapper_deriv(spec, float(x)) for x in xs]
            cols.append((g, gp))
            panels[0].add(f"n={v:g}", xs, g)
            panels[1].add(f"n={v:g}", xs, gp)
        for i, x in enumerate(xs):
            fh.write(f"{x:.12g}," + ",".join(
                f"{c[0][i]:.12g},{c[1][i]:.12g}" for c in cols) + "\n")
    figure_panels(panels, out / "wrapper_curves.svg")
    print(f"wrote {dest} and {out / 'wrapper_curves.svg'}")
    return 0


def _sweep_paths(profiles, out: Path) -> int:
    panel = Panel("closed paths", "x [m]", "y [m]", equal_aspect=True)
    for prof in profiles:
        table = build_path(prof)
        label = f"N={prof.N}, s_T={prof.s_T:g}"
        table.to_csv(out / f"path_N{prof.N}_sT{prof.s_T:g}.csv")
        panel.add(label, table.x, table.y)
        print(f"{label}: perimeter {table.perimeter:.1f} m, closed")
    figure_panels([panel], out / "paths.svg", columns=1)
    print(f"wrote {out / 'paths.svg'}")
    return 0


def cmd_path(args) -> int:
    out = _out_dir(args)
    try:
        if args.kind == "straight":
            profile = CurvatureProfile.straight()
            if not args.length:
                raise ValueError("straight path needs --length")
        elif args.kind == "circle":
            profile = CurvatureProfile.circle(args.radius)
        else:
            profile = CurvatureProfile.periodic(args.N, args.s_T)
        table = build_path(profile, step=args.step, length=args.length)
    except (ValueError, NonholoError) as exc:
        print(f"path error: {exc}", file=sys.stderr)
        return 2
    dest = out / "path.csv"
    table.to_csv(dest)
    closed = "closed" if table.closed else "open"
    print(f"wrote {dest}: {len(table.s)} samples, length {table.length:.2f} m, "
          f"{closed}")
    if args.plot is None or args.plot:
        panel = Panel("path", "x [m]", "y [m]", equal_aspect=True)
        panel.add(args.kind, table.x, table.y)
        figure_panels([panel], out / "path.svg", columns=1)
        print(f"wrote {out / 'path.svg'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonholo",
        description="Nonholonomic single-track vehicle models and "
                    "path-following control")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output directory (default: out, "
                                     "override with NONHOLO_OUT)")
        p.add_argument("--dt", type=float, help="integration step [s]")
        p.add_argument("--seed", type=int,
                       help="seed for the randomized property checks")
        p.add_argument("--plot", action="store_true", default=None,
                       dest="plot", help="emit SVG plots (default)")
        p.add_argument("--no-plot", action="store_false", dest="plot",
                       help="skip SVG plots")

    p_sim = sub.add_parser("simulate", help="run a scenario or named figure")
    p_sim.add_argument("--figure", choices=list(FIGURES) + ["randomcheck"],
                       help="named scenario")
    p_sim.add_argument("--config", help="scenario config file")
    p_sim.add_argument("--dump-config", action="store_true",
                       help="print the canonical config and exit")
    common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_st = sub.add_parser("stability", help="criterion vs eigenvalue map")
    p_st.add_argument("--k1", nargs=3, type=float, default=[-2.0, 0.5, 50],
                      metavar=("MIN", "MAX", "N"))
    p_st.add_argument("--k2", nargs=3, type=float, default=[-0.05, 0.1, 50],
                      metavar=("MIN", "MAX", "N"))
    p_st.add_argument("--kappa", default="0,0.005,0.012566370614359173",
                      help="comma-separated kappa* values")
    p_st.add_argument("--speed", type=float, default=20.0)
    common(p_st)
    p_st.set_defaults(func=cmd_stability)

    p_sw = sub.add_parser("sweep", help="parameter sweeps")
    p_sw.add_argument("--param", required=True,
                      help=f"one of {SWEEP_PARAMS}")
    p_sw.add_argument("--values", required=True,
                      help="comma-separated values")
    p_sw.add_argument("--figure", help="base scenario for trace sweeps")
    p_sw.add_argument("--s-T", dest="s_T", type=float, default=250.0,
                      help="period for N sweeps")
    common(p_sw)
    p_sw.set_defaults(func=cmd_sweep)

    p_pa = sub.add_parser("path", help="generate and export a path")
    p_pa.add_argument("--kind", choices=("straight", "circle", "periodic"),
                      default="periodic")
    p_pa.add_argument("--N", type=int, default=4)
    p_pa.add_argument("--s-T", dest="s_T", type=float, default=250.0)
    p_pa.add_argument("--radius", type=float, default=200.0)
    p_pa.add_argument("--length", type=float)
    p_pa.add_argument("--step", type=float, default=0.1)
    common(p_pa)
    p_pa.set_defaults(func=cmd_path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
