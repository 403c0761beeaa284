"""Plain-text scenario configuration with nested blocks.

Grammar (one item per line, ``#`` starts a comment):

    block_name {
        key = value
        ...
    }

Blocks: ``vehicle`` (keys of the flat parameter file), ``path`` (kind plus
profile fields), ``controller`` (gains, law, wrapper index, look-ahead),
``sim`` (model, timing, initial errors) and ``output``. Unknown blocks or
keys are rejected; all units are SI. ``dump_config`` emits the canonical
form, which re-parses to an identical scenario.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .errors import ConfigError
from .models import Variant
from .params import PARAM_KEYS, ControlGains, VehicleParams
from .path import CurvatureProfile
from .sim import MODES, Scenario

_PATH_KEYS = ("kind", "radius", "kappa_max", "s_T", "N", "step", "length")
_CONTROLLER_KEYS = ("mode", "law", "wrapper_n", "k1", "k2", "k_s", "T_sat",
                    "k_a", "a_lat_max", "a_long_max", "v_max", "t_L",
                    "preview_dist")
_SIM_KEYS = ("model", "dt", "duration", "V", "e0", "theta0", "s0",
             "sigma1_0", "gamma0", "sigma2_0")
_OUTPUT_KEYS = ("dir", "plot")
_BLOCKS = {"vehicle": PARAM_KEYS, "path": _PATH_KEYS,
           "controller": _CONTROLLER_KEYS, "sim": _SIM_KEYS,
           "output": _OUTPUT_KEYS}

_GAIN_KEYS = ("k1", "k2", "k_s", "T_sat", "k_a", "a_lat_max", "a_long_max",
              "v_max", "t_L", "preview_dist")


def parse_blocks(text: str, source: str = "<config>") -> dict[str, dict[str, str]]:
    blocks: dict[str, dict[str, str]] = {}
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.endswith("{"):
            name = line[:-1].strip()
            if current is not None:
                raise ConfigError(f"{source}:{lineno}: nested block {name!r}")
            if name not in _BLOCKS:
                raise ConfigError(f"{source}:{lineno}: unknown block {name!r}")
            if name in blocks:
                raise ConfigError(f"{source}:{lineno}: duplicate block {name!r}")
            blocks[name] = {}
            current = name
        elif line == "}":
            if current is None:
                raise ConfigError(f"{source}:{lineno}: unmatched '}}'")
            current = None
        else:
            if current is None:
                raise ConfigError(f"{source}:{lineno}: statement outside a block")
            if "=" not in line:
                raise ConfigError(f"{source}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _BLOCKS[current]:
                raise ConfigError(
                    f"{source}:{lineno}: unknown key {key!r} in block {current!r}")
            if key in blocks[current]:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            blocks[current][key] = value.strip()
    if current is not None:
        raise ConfigError(f"{source}: unterminated block {current!r}")
    return blocks


def _floats(block: dict[str, str], source: str) -> dict[str, float]:
    out = {}
    for key, value in block.items():
        try:
            out[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"{source}: key {key!r}: bad number {value!r}") from exc
    return out


def _profile_from(block: dict[str, str], source: str) -> CurvatureProfile:
    kind = block.get("kind", "straight")
    vals = _floats({k: v for k, v in block.items()
                    if k not in ("kind",)}, source)
    if kind == "straight":
        return CurvatureProfile.straight()
    if kind == "circle":
        if "radius" in vals:
            return CurvatureProfile.circle(vals["radius"])
        if "kappa_max" in vals:
            return CurvatureProfile.circle(1.0 / vals["kappa_max"])
        raise ConfigError(f"{source}: circle path needs key 'radius'")
    if kind == "periodic":
        try:
            N = int(vals["N"])
            s_T = vals["s_T"]
        except KeyError as exc:
            raise ConfigError(f"{source}: periodic path needs key {exc}") from exc
        if "kappa_max" in vals:
            prof = CurvatureProfile(kind="periodic", kappa_max=vals["kappa_max"],
                                    s_T=s_T, N=N)
        else:
            prof = CurvatureProfile.periodic(N, s_T)
        return prof
    raise ConfigError(f"{source}: unknown path kind {kind!r}")


def scenario_from_config(text: str, source: str = "<config>") -> tuple[Scenario, dict]:
    """Parse a config into a Scenario plus the output-block settings."""
    blocks = parse_blocks(text, source)
    params = VehicleParams()
    if "vehicle" in blocks:
        params = VehicleParams(**_floats(blocks["vehicle"], source))

    gains = ControlGains()
    law, wrapper_n, mode = "wrapped", 2, "steer_only"
    if "controller" in blocks:
        cb = dict(blocks["controller"])
        mode = cb.pop("mode", mode)
        law = cb.pop("law", law)
        wrapper_text = cb.pop("wrapper_n", None)
        if wrapper_text is not None:
            wrapper_n = math.inf if wrapper_text == "inf" else int(wrapper_text)
        gains = replace(gains, **_floats(cb, source))
    if mode not in MODES:
        raise ConfigError(f"{source}: unknown controller mode {mode!r}")

    profile = CurvatureProfile.straight()
    path_step, path_length = 0.1, None
    if "path" in blocks:
        profile = _profile_from(blocks["path"], source)
        pv = _floats({k: v for k, v in blocks["path"].items()
                      if k in ("step", "length")}, source)
        path_step = pv.get("step", 0.1)
        path_length = pv.get("length")

    sim_kwargs: dict = {}
    variant = Variant.SKATE_KINEMATIC
    if "sim" in blocks:
        sb = dict(blocks["sim"])
        model = sb.pop("model", None)
        if model is not None:
            try:
                variant = Variant(model)
            except ValueError as exc:
                raise ConfigError(f"{source}: unknown model {model!r}") from exc
        sim_kwargs = _floats(sb, source)
    duration = sim_kwargs.pop("duration", 30.0)

    output = {"dir": "out", "plot": True}
    if "output" in blocks:
        ob = blocks["output"]
        output["dir"] = ob.get("dir", "out")
        plot_text = ob.get("plot", "true").lower()
        if plot_text not in ("true", "false"):
            raise ConfigError(f"{source}: key 'plot': expected true/false")
        output["plot"] = plot_text == "true"

    try:
        scenario = Scenario(name="config", variant=variant, profile=profile,
                            mode=mode, duration=duration, params=params,
                            gains=gains, law=law, wrapper_n=wrapper_n,
                            path_step=path_step, path_length=path_length,
                            **sim_kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    return scenario, output


def dump_config(sc: Scenario, output: dict | None = None) -> str:
    """Canonical config text for a scenario; re-parses identically."""
    output = output or {"dir": "out", "plot": True}
    lines = ["vehicle {"]
    for key in PARAM_KEYS:
        lines.append(f"    {key} = {getattr(sc.params, key):.17g}")
    lines.append("}")
    lines.append("path {")
    lines.append(f"    kind = {sc.profile.kind}")
    if sc.profile.kind == "circle":
        lines.append(f"    radius = {1.0 / sc.profile.kappa_const:.17g}")
    elif sc.profile.kind == "periodic":
        lines.append(f"    N = {sc.profile.N}")
        lines.append(f"    s_T = {sc.profile.s_T:.17g}")
        lines.append(f"    kappa_max = {sc.profile.kappa_max:.17g}")
    lines.append(f"    step = {sc.path_step:.17g}")
    if sc.path_length is not None:
        lines.append(f"    length = {sc.path_length:.17g}")
    lines.append("}")
    lines.append("controller {")
    lines.append(f"    mode = {sc.mode}")
    lines.append(f"    law = {sc.law}")
    n_text = "inf" if sc.wrapper_n == math.inf else str(int(sc.wrapper_n))
    lines.append(f"    wrapper_n = {n_text}")
    for key in _GAIN_KEYS:
        lines.append(f"    {key} = {getattr(sc.gains, key):.17g}")
    lines.append("}")
    lines.append("sim {")
    lines.append(f"    model = {sc.variant.value}")
    for key in ("dt", "duration", "V", "e0", "theta0", "s0",
                "sigma1_0", "gamma0", "sigma2_0"):
        lines.append(f"    {key} = {getattr(sc, key):.17g}")
    lines.append("}")
    lines.append("output {")
    lines.append(f"    dir = {output['dir']}")
    lines.append(f"    plot = {'true' if output['plot'] else 'false'}")
    lines.append("}")
    return "\n".join(lines) + "\n"
