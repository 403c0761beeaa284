#!/usr/bin/env python3
"""Look-ahead time sweep on the torque-steering loop (servo phase-lag study)."""

import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from nonholo.sim import named_scenario, run_scenario
from nonholo.svgplot import Panel, figure_panels


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    panel = Panel("lateral deviation vs look-ahead time", "t [s]", "e_C [m]")
    rows = []
    for t_L in (0.0, 0.1, 0.3, 0.5, 0.7):
        sc = named_scenario("fig17")
        sc = replace(sc, gains=replace(sc.gains, t_L=t_L))
        trace = run_scenario(sc)
        tail = trace.t >= 20.0
        rms = float(np.sqrt(np.mean(trace["e_C"][tail] ** 2)))
        rows.append((t_L, rms))
        panel.add(f"t_L = {t_L:g} s", trace.t[::20], trace["e_C"][::20])
        print(f"t_L = {t_L:g} s: post-transient rms e_C = {rms:.4f} m")
    best = min(rows, key=lambda r: r[1])
    print(f"minimum rms at t_L = {best[0]:g} s")
    figure_panels([panel], out / "lookahead_sweep.svg", columns=1)
    print(f"wrote {out / 'lookahead_sweep.svg'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
