"""Tests for config parsing and the command-line interface."""

import csv

import numpy as np
import pytest
from click.testing import CliRunner

from mgsim.errors import ConfigError
from mgsim.config import (
    get_bool, get_float, get_floats, get_int, get_ints, get_str, parse_config,
)
from mgsim.cli import main


class TestParseConfig:
    def test_sections_and_comments(self):
        cfg = parse_config(
            "top = 1\n"
            "[phys]\n"
            "eps_kappa = 0.01  # diffusivity\n"
            "\n"
            "# whole-line comment\n"
            "[run]\n"
            "dt = 0.5\n"
            "scheme = if_rk4\n"
        )
        assert cfg == {"top": "1", "phys.eps_kappa": "0.01",
                       "run.dt": "0.5", "run.scheme": "if_rk4"}

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_config("[a]\nx = 1\nx = 2\n")

    def test_missing_equals(self):
        with pytest.raises(ConfigError):
            parse_config("[a]\njust some words\n")

    def test_empty_section(self):
        with pytest.raises(ConfigError):
            parse_config("[]\n")

    def test_typed_getters(self):
        cfg = parse_config(
            "[a]\nx = 3\ny = 2.5\nz = true\nw = hello\n"
            "fs = 0.3, 0.5\nis = 1,2,3\n")
        assert get_int(cfg, "a.x") == 3
        assert get_float(cfg, "a.y") == 2.5
        assert get_bool(cfg, "a.z") is True
        assert get_str(cfg, "a.w") == "hello"
        assert get_floats(cfg, "a.fs") == (0.3, 0.5)
        assert get_ints(cfg, "a.is") == (1, 2, 3)
        assert get_int(cfg, "a.missing", 7) == 7
        assert get_str(cfg, "a.missing", None) is None

    def test_typed_getter_errors(self):
        cfg = parse_config("[a]\nx = notanint\nb = maybe\nn = nan\n")
        with pytest.raises(ConfigError):
            get_int(cfg, "a.x")
        with pytest.raises(ConfigError):
            get_bool(cfg, "a.b")
        with pytest.raises(ConfigError):
            get_float(cfg, "a.n")
        with pytest.raises(ConfigError):
            get_float(cfg, "a.absent")


EVOLVE_CFG = """
[phys]
eps_kappa = 0.05
gamma = 1.0

[grid]
n = 16

[run]
dt = 0.02
t_end = 0.1
record_every = 1
"""


class TestCli:
    def setup_method(self):
        self.runner = CliRunner()

    def test_version(self):
        res = self.runner.invoke(main, ["--version"])
        assert res.exit_code == 0
        assert "mg" in res.output

    def test_symbol_scan(self, tmp_path):
        out = tmp_path / "scan.csv"
        res = self.runner.invoke(
            main, ["symbol-scan", "--kmax", "4", "--out", str(out)])
        assert res.exit_code == 0, res.output
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k1", "k2", "k3", "m1", "m2", "m3", "abs",
                           "ratio_abs_over_k"]
        # every k in the box except the origin (k3 = 0 rows carry zeros)
        assert len(rows) - 1 == 9 ** 3 - 1
        assert "max |M(k)|/|k|" in res.output

    def test_symbol_scan_plane_filter(self, tmp_path):
        out = tmp_path / "scan.csv"
        res = self.runner.invoke(
            main, ["symbol-scan", "--kmax", "4", "--plane", "1/1",
                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        with open(out) as fh:
            rows = list(csv.reader(fh))[1:]
        assert all(r[0] == r[1] for r in rows)

    def test_eigen_single_mode(self):
        res = self.runner.invoke(main, ["eigen", "--k1", "1", "--k2", "1"])
        assert res.exit_code == 0, res.output
        assert "sigma* = 0.101986939259" in res.output

    def test_eigen_stable_exits_2(self):
        res = self.runner.invoke(
            main, ["eigen", "--k1", "2", "--k2", "2", "--eps-kappa", "0.05"])
        assert res.exit_code == 2
        assert "stable" in res.output

    def test_eigen_requires_a_mode_choice(self):
        res = self.runner.invoke(main, ["eigen"])
        assert res.exit_code == 1
        assert "choose exactly one" in res.output

    def test_eigen_optimize(self, tmp_path):
        out = tmp_path / "modes.csv"
        res = self.runner.invoke(
            main, ["eigen", "--optimize", "6", "--eps-kappa", "0.02",
                   "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert "fastest mode in [1, 6]^2: (4, 3)" in res.output
        with open(out) as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "k1"
        assert float(rows[1][4]) == pytest.approx(0.3139239187, rel=1e-9)

    def test_eigen_sweep(self):
        res = self.runner.invoke(
            main, ["eigen", "--sweep", "nondiffusive", "--j-max", "5"])
        assert res.exit_code == 0, res.output
        assert "verdict: diverging" in res.output

    def test_evolve_roundtrip(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(EVOLVE_CFG)
        diag = tmp_path / "out" / "diag.csv"
        field = tmp_path / "out" / "final.txt"
        res = self.runner.invoke(main, [
            "evolve", "--config", str(cfg),
            "--init", "mode:1,1,2,0.5",
            "--out-diag", str(diag), "--out-field", str(field),
        ])
        assert res.exit_code == 0, res.output
        with open(diag) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "l2", "linf", "hs", "off_plane",
                           "energy_residual"]
        assert len(rows) - 1 == 6  # t = 0 plus 5 recorded steps
        manifest = (tmp_path / "out" / "manifest.txt").read_text()
        assert "run.dt = 0.02" in manifest
        assert "grid.n1 = 16" in manifest
        assert "wall_seconds" in manifest
        # the written snapshot reloads as a valid init
        res2 = self.runner.invoke(main, [
            "evolve", "--config", str(cfg),
            "--init", f"snapshot:{field}",
            "--out-diag", str(tmp_path / "out2" / "diag.csv"),
        ])
        assert res2.exit_code == 0, res2.output

    def test_evolve_mode_requires_vertical(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(EVOLVE_CFG)
        res = self.runner.invoke(main, [
            "evolve", "--config", str(cfg), "--init", "mode:1,1,0",
            "--out-diag", str(tmp_path / "d.csv"),
        ])
        assert res.exit_code == 1
        assert "k3 != 0" in res.output

    def test_evolve_missing_required_key(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("[grid]\nn = 16\n")
        res = self.runner.invoke(main, [
            "evolve", "--config", str(cfg), "--init", "mode:1,1,1",
            "--out-diag", str(tmp_path / "d.csv"),
        ])
        assert res.exit_code == 1
        assert "run.dt" in res.output

    def test_evolve_eigenfunction_init(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[phys]\neps_kappa = 0.01\n[grid]\nn = 32\n"
            "[run]\ndt = 0.02\nt_end = 0.1\nlinearized = true\n"
            "[mode]\nk1 = 1\nk2 = 1\n")
        diag = tmp_path / "diag.csv"
        res = self.runner.invoke(main, [
            "evolve", "--config", str(cfg), "--out-diag", str(diag)])
        assert res.exit_code == 0, res.output
        manifest = (tmp_path / "manifest.txt").read_text()
        assert "sigma_star = 0.0571456432" in manifest

    def test_instability_stable_exits_2(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[phys]\neps_kappa = 0.05\n[instability]\nbox = 4\n")
        res = self.runner.invoke(main, [
            "instability", "--config", str(cfg),
            "--out", str(tmp_path / "out")])
        assert res.exit_code == 2
        assert "stable" in res.output

    def test_illposedness_command(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "[phys]\neps_kappa = 0.02\ngamma = 0.75\n"
            "[illposedness]\nregime = fractional\nj_max = 9\n")
        out = tmp_path / "out"
        res = self.runner.invoke(main, [
            "illposedness", "--config", str(cfg), "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert "terminated" in res.output
        with open(out / "sweep.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["j", "k1", "k2", "sigma_star", "bound",
                           "certified"]
        assert (out / "manifest.txt").exists()

    def test_bad_plane_ratio(self, tmp_path):
        out = tmp_path / "scan.csv"
        res = self.runner.invoke(
            main, ["symbol-scan", "--plane", "x/y", "--out", str(out)])
        assert res.exit_code == 1
