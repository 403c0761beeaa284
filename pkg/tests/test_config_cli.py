import pytest

from nonholo.cli import main
from nonholo.config import dump_config, scenario_from_config
from nonholo.errors import ConfigError
from nonholo.models import Variant
from nonholo.params import VehicleParams, load_params, save_params
from nonholo.sim import named_scenario

MINIMAL = """
path {
    kind = periodic
    N = 4
    s_T = 250
}
controller {
    mode = steer_only
    t_L = 0.1
}
sim {
    model = skate_kinematic
    duration = 5
    e0 = -3
}
output {
    dir = results
    plot = false
}
"""


class TestConfig:
    def test_minimal_parse(self):
        sc, output = scenario_from_config(MINIMAL)
        assert sc.profile.N == 4
        assert sc.duration == 5.0
        assert sc.e0 == -3.0
        assert sc.gains.t_L == 0.1
        assert sc.variant is Variant.SKATE_KINEMATIC
        assert output == {"dir": "results", "plot": False}

    def test_round_trip(self):
        for name in ("fig13", "fig16", "fig20"):
            sc = named_scenario(name)
            text = dump_config(sc)
            back, _ = scenario_from_config(text)
            back = type(back)(**{**back.__dict__, "name": sc.name})
            assert back == sc

    def test_unknown_key_named(self):
        bad = "sim {\n    wheelbase = 2.5\n}\n"
        with pytest.raises(ConfigError, match="wheelbase"):
            scenario_from_config(bad)

    def test_unknown_block_named(self):
        with pytest.raises(ConfigError, match="tires"):
            scenario_from_config("tires {\n}\n")

    def test_bad_number_named(self):
        with pytest.raises(ConfigError, match="duration"):
            scenario_from_config("sim {\n    duration = soon\n}\n")

    def test_param_file_round_trip(self, tmp_path):
        params = VehicleParams(m=1500.0, r=0.31)
        dest = tmp_path / "vehicle.par"
        save_params(params, dest)
        assert load_params(dest) == params

    def test_param_file_rejects_unknown_key(self, tmp_path):
        dest = tmp_path / "vehicle.par"
        dest.write_text("l=2.5\nwheel=1\n")
        with pytest.raises(ValueError, match="wheel"):
            load_params(dest)


class TestCli:
    def test_simulate_figure_no_plot(self, tmp_path, capsys):
        rc = main(["simulate", "--figure", "fig13", "--no-plot",
                   "--dt", "0.005", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "no overshoot" in out
        assert (tmp_path / "trace.csv").exists()
        assert not (tmp_path / "fig13.svg").exists()

    def test_simulate_figure_with_plot(self, tmp_path):
        rc = main(["simulate", "--figure", "fig14", "--dt", "0.005",
                   "--out", str(tmp_path)])
        assert rc == 0
        svg = (tmp_path / "fig14.svg").read_text()
        assert svg.startswith("<svg")
        assert "polyline" in svg

    def test_simulate_config(self, tmp_path, capsys):
        cfg = tmp_path / "case.cfg"
        cfg.write_text(MINIMAL)
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path),
                   "--no-plot"])
        assert rc == 0
        assert (tmp_path / "trace.csv").exists()

    def test_simulate_malformed_config_exit_2(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("sim {\n    warpdrive = 1\n}\n")
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 2
        assert "warpdrive" in capsys.readouterr().err

    def test_simulate_guard_exit_3(self, tmp_path, capsys):
        cfg = tmp_path / "guard.cfg"
        cfg.write_text(
            "path {\n    kind = circle\n    radius = 200\n}\n"
            "controller {\n    mode = none\n}\n"
            "sim {\n    duration = 15\n    V = 20\n    theta0 = 1.5707963\n"
            "    dt = 0.005\n}\n")
        rc = main(["simulate", "--config", str(cfg), "--out", str(tmp_path)])
        assert rc == 3
        err = capsys.readouterr().err
        assert "guard tripped" in err and "t=" in err

    def test_dump_config_round_trip(self, tmp_path, capsys):
        rc = main(["simulate", "--figure", "fig16", "--dump-config",
                   "--out", str(tmp_path)])
        assert rc == 0
        text = capsys.readouterr().out
        sc, _ = scenario_from_config(text)
        assert sc.profile.N == 4
        assert sc.duration == 50.0

    def test_env_var_overrides_out(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("NONHOLO_OUT", str(tmp_path / "envdir"))
        rc = main(["simulate", "--figure", "fig13", "--no-plot",
                   "--dt", "0.01"])
        assert rc == 0
        assert (tmp_path / "envdir" / "trace.csv").exists()

    def test_stability_map(self, tmp_path, capsys):
        rc = main(["stability", "--k1", "-2", "0.5", "12", "--k2", "-0.05",
                   "0.1", "12", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "agreement 100.00%" in out
        lines = (tmp_path / "stability.csv").read_text().splitlines()
        assert lines[0] == "k1,k2,kappa_star,criterion,eig_max_real,agree"
        assert len(lines) == 1 + 12 * 12 * 3

    def test_stability_single_point(self, tmp_path, capsys):
        rc = main(["stability", "--k1", "-0.5", "-0.5", "1",
                   "--k2", "0.02", "0.02", "1", "--kappa", "0",
                   "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "stable" in out
        assert "-0.4526" in out or "-0.45265" in out

    def test_stability_bad_ranges_exit_2(self, tmp_path, capsys):
        rc = main(["stability", "--kappa", "zero", "--out", str(tmp_path)])
        assert rc == 2

    def test_sweep_unknown_param_exit_2(self, tmp_path, capsys):
        rc = main(["sweep", "--param", "bogus", "--values", "1",
                   "--out", str(tmp_path)])
        assert rc == 2

    def test_sweep_lookahead(self, tmp_path, capsys):
        rc = main(["sweep", "--param", "t_L", "--values", "0,0.3",
                   "--dt", "0.01", "--out", str(tmp_path)])
        assert rc == 0
        out = capsys.readouterr().out
        assert "minimum rms e_C" in out
        body = (tmp_path / "sweep_t_L.csv").read_text().splitlines()
        assert body[0] == "t_L,rms_e"
        rms = {float(r.split(",")[0]): float(r.split(",")[1])
               for r in body[1:]}
        assert rms[0.3] < rms[0.0]

    def test_sweep_wrapper_curves(self, tmp_path):
        rc = main(["sweep", "--param", "wrapper_n", "--values", "2,3,5,1000",
                   "--out", str(tmp_path)])
        assert rc == 0
        header = (tmp_path / "wrapper_curves.csv").read_text().splitlines()[0]
        assert header.startswith("x,g_2,gp_2,g_3")
        assert (tmp_path / "wrapper_curves.svg").exists()

    def test_sweep_paths(self, tmp_path, capsys):
        rc = main(["sweep", "--param", "N", "--values", "2,3,4,5",
                   "--out", str(tmp_path)])
        assert rc == 0
        for n in (2, 3, 4, 5):
            assert (tmp_path / f"path_N{n}_sT250.csv").exists()
        assert (tmp_path / "paths.svg").exists()

    def test_path_export(self, tmp_path, capsys):
        rc = main(["path", "--kind", "periodic", "--N", "4", "--s-T", "250",
                   "--out", str(tmp_path), "--no-plot"])
        assert rc == 0
        lines = (tmp_path / "path.csv").read_text().splitlines()
        assert lines[0] == "s,x,y,psi,kappa"
        assert len(lines) == 1 + 10001

    def test_path_straight_needs_length(self, tmp_path, capsys):
        rc = main(["path", "--kind", "straight", "--out", str(tmp_path)])
        assert rc == 2

    def test_randomcheck(self, tmp_path, capsys):
        rc = main(["simulate", "--figure", "randomcheck", "--seed", "7",
                   "--out", str(tmp_path)])
        assert rc == 0
        assert "PASS" in capsys.readouterr().out
