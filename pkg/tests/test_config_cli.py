import json

import numpy as np
import pytest

from bardina.checkpoint import STEADY_STATE_TIME, read_checkpoint
from bardina.cli import (
    EXIT_CHECK,
    EXIT_CONFIG,
    EXIT_NONCONV,
    EXIT_OK,
    main,
)
from bardina.config import ConfigError, RunConfig, load_config, parse_config

BASE_INI = """\
[grid]
n = 8
[params]
alpha = 1.0
beta = 1.0
nu = 0.5
[initial]
kind = random_band
amplitude = 0.3
seed = 4
k_min = 1
k_max = 2
[force]
kind = shear
amplitude = 0.2
[time]
dt = 0.02
t_end = 0.5
sample_every = 5
"""


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = RunConfig()
        again = parse_config(cfg.serialize())
        assert again == cfg

    def test_parse_serialize_fixed_point(self):
        cfg = parse_config(BASE_INI)
        again = parse_config(cfg.serialize())
        assert again == cfg
        assert again.digest() == cfg.digest()

    def test_values_land(self):
        cfg = parse_config(BASE_INI)
        assert cfg.grid.n == 8
        assert cfg.params.nu == 0.5
        assert cfg.initial.kind == "random_band"
        assert cfg.force.kind == "shear"
        assert cfg.dt == 0.02
        assert cfg.sample_every == 5

    def test_no_force_section_means_none(self):
        cfg = parse_config("[grid]\nn = 8\n")
        assert cfg.force is None
        assert "kind = none" in cfg.serialize()

    def test_bad_time_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[time]\ndt = -0.1\n")

    def test_bad_decay_mode_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[decay]\nmode = sideways\n")

    def test_bad_grid_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("[grid]\nn = 7\n")

    def test_malformed_text_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("not an ini file][")

    def test_load_config(self, tmp_path):
        p = tmp_path / "run.ini"
        p.write_text(BASE_INI)
        assert load_config(p) == parse_config(BASE_INI)


def run_cli(tmp_path, subcommand, ini, out_name="out"):
    cfg = tmp_path / f"{subcommand}.ini"
    cfg.write_text(ini)
    out = tmp_path / out_name
    code = main([subcommand, "--config", str(cfg), "--out", str(out)])
    return code, out


class TestCliSubcommands:
    def test_simulate(self, tmp_path):
        code, out = run_cli(tmp_path, "simulate", BASE_INI)
        assert code == EXIT_OK
        report = json.loads((out / "simulate_report.json").read_text())
        assert report["pass"]
        assert (out / "trajectory.csv").exists()
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header.startswith("t,l2_sq,h1dot_sq")
        _, _, t = read_checkpoint(out / "final_state.bard")
        assert abs(t - 0.5) <= 1e-12
        meta = json.loads((out / "run_meta.json").read_text())
        assert meta["subcommand"] == "simulate"
        assert "config_sha256" in meta and "timestamp" in meta

    def test_stationary(self, tmp_path):
        code, out = run_cli(tmp_path, "stationary", BASE_INI)
        assert code == EXIT_OK
        report = json.loads((out / "stationary_report.json").read_text())
        assert report["converged"] and report["pass"]
        _, _, t = read_checkpoint(out / "stationary.bard")
        assert t == STEADY_STATE_TIME

    def test_bound(self, tmp_path):
        ini = BASE_INI.replace("nu = 0.5", "nu = 1.0") + "[bound]\nf_norm = 1.0\n"
        code, out = run_cli(tmp_path, "bound", ini)
        assert code == EXIT_OK
        report = json.loads((out / "bound_report.json").read_text())
        assert abs(report["dimension_bound"] - 27.22912689189904) <= 1e-9
        assert report["eta_regime"] == "zero"

    def test_lyapunov(self, tmp_path):
        ini = BASE_INI + "[lyapunov]\nm_list = 1 2\nframe_seed = 3\n"
        code, out = run_cli(tmp_path, "lyapunov", ini)
        assert code == EXIT_OK
        report = json.loads((out / "lyapunov_report.json").read_text())
        assert report["pass"]
        assert (out / "lyapunov.csv").exists()

    def test_gap(self, tmp_path):
        code, out = run_cli(tmp_path, "gap", BASE_INI)
        assert code == EXIT_OK
        report = json.loads((out / "gap_report.json").read_text())
        assert report["pass"]
        assert report["eta"] is not None

    def test_decay_zero_force(self, tmp_path):
        ini = BASE_INI + "[decay]\nmode = zero_force\np_list = 2.0 inf\n"
        code, out = run_cli(tmp_path, "decay", ini)
        assert code == EXIT_OK
        report = json.loads((out / "decay_report.json").read_text())
        assert report["check_name"] == "zero_force_decay"
        assert report["pass"]

    def test_decay_steady(self, tmp_path):
        ini = BASE_INI.replace("t_end = 0.5", "t_end = 2.0") + "[decay]\nmode = steady\n"
        code, out = run_cli(tmp_path, "decay", ini)
        assert code == EXIT_OK
        report = json.loads((out / "decay_report.json").read_text())
        assert report["check_name"] == "steady_convergence"
        assert report["pass"]


class TestCliErrors:
    def test_missing_config_file(self, tmp_path):
        code = main(["simulate", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path)])
        assert code == EXIT_CONFIG

    def test_invalid_config(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[grid]\nn = 7\n")
        code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert code == EXIT_CONFIG

    def test_nonconvergence_exit(self, tmp_path):
        ini = BASE_INI.replace(
            "kind = shear\namplitude = 0.2",
            "kind = random_band\namplitude = 500.0\nseed = 9",
        ) + "[stationary]\nmax_iter = 30\n"
        code, out = run_cli(tmp_path, "stationary", ini)
        assert code == EXIT_NONCONV
        report = json.loads((out / "stationary_report.json").read_text())
        assert not report["converged"]


class TestDeterminism:
    def test_repeat_runs_byte_identical(self, tmp_path):
        _, out1 = run_cli(tmp_path, "simulate", BASE_INI, out_name="r1")
        _, out2 = run_cli(tmp_path, "simulate", BASE_INI, out_name="r2")
        for name in ("trajectory.csv", "simulate_report.json",
                     "final_state.bard", "effective_config.ini"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
