"""End-to-end command line runs against the bundled scenario."""

import hashlib
import json
import subprocess

import pytest
import yaml

import repmarket
from repmarket.bidcurve import BidCurve
from repmarket.cli import main
from repmarket.opf import Bus, Generator, NetworkModel
from repmarket.scenario import Scenario, export_scenario, load_scenario

SIM_FILES = (
    "hours.csv", "dispatch.csv", "flows.csv", "lmp.csv",
    "summary.yaml", "merit_order.csv", "manifest.json",
    "plant_operation.png", "lmp_rep_node.png", "merit_order.png",
)


def run_cli(*argv):
    return main([str(a) for a in argv])


class TestDeriveBidCurve:
    def test_worked_offer(self, tmp_path):
        curve = tmp_path / "curve.csv"
        curve.write_text(
            "power_mw,h2_kg_per_h\n0,0\n250,5000\n500,9000\n")
        out = tmp_path / "out"
        code = run_cli("derive-bid-curve", "--curve", curve, "--price", 1.5,
                       "--res", 500, "--breakpoints", "0,250,500",
                       "--out", out)
        assert code == 0
        bid = BidCurve.from_csv(out / "bid_curve.csv")
        assert [(p.alpha, p.beta, p.q_lo, p.q_hi) for p in bid.pieces] == [
            (24.0, 0.0, 0.0, 250.0),
            (30.0, pytest.approx(-1500.0), 250.0, 500.0),
        ]
        assert (out / "fitted_curve.csv").exists()
        assert (out / "bid_curve.png").exists()
        assert (out / "manifest.json").exists()

    def test_bad_curve_exits_1(self, tmp_path):
        code = run_cli("derive-bid-curve", "--curve", tmp_path / "nope.csv",
                       "--price", 1.5, "--res", 10, "--out", tmp_path / "o")
        assert code == 1


class TestSimulate:
    def test_writes_everything(self, six_bus_config, tmp_path):
        out = tmp_path / "run"
        code = run_cli("simulate", "--config", six_bus_config,
                       "--hours", 6, "--jobs", 1, "--out", out)
        assert code == 0
        for name in SIM_FILES:
            assert (out / name).exists(), name
        summary = yaml.safe_load((out / "summary.yaml").read_text())
        assert summary["representation"] == "bidder"
        assert summary["horizon"] == 6

    def test_manifest_contents(self, six_bus_config, tmp_path):
        out = tmp_path / "run"
        assert run_cli("simulate", "--config", six_bus_config, "--hours", 2,
                       "--jobs", 1, "--out", out, "--seed", 7) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "simulate"
        assert manifest["package_version"] == repmarket.__version__
        assert manifest["seed"] == 7
        assert manifest["inputs"] == [str(six_bus_config)]
        want = hashlib.sha256(six_bus_config.read_bytes()).hexdigest()
        assert manifest["config_sha256"] == want
        assert "created_at" in manifest

    def test_fixed_gets_a_level_automatically(self, six_bus_config, tmp_path):
        out = tmp_path / "run"
        code = run_cli("simulate", "--config", six_bus_config, "--hours", 6,
                       "--jobs", 1, "--rep", "fixed", "--out", out)
        assert code == 0
        summary = yaml.safe_load((out / "summary.yaml").read_text())
        assert summary["representation"] == "fixed"
        assert summary["fixed_level_mw"] is not None
        assert summary["fixed_level_mw"] >= 0.0

    def test_mode_override(self, six_bus_config, tmp_path):
        out = tmp_path / "run"
        code = run_cli("simulate", "--config", six_bus_config, "--hours", 2,
                       "--jobs", 1, "--mode", "copper", "--out", out)
        assert code == 0
        lmp = (out / "lmp.csv").read_text().splitlines()
        assert len(lmp) == 3  # header plus one system bus per hour
        assert lmp[1].startswith("0,system,")

    def test_repeat_runs_byte_identical(self, six_bus_config, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert run_cli("simulate", "--config", six_bus_config,
                           "--hours", 4, "--jobs", 1, "--out", out) == 0
        for name in SIM_FILES:
            if name == "manifest.json":  # carries the wall-clock timestamp
                continue
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


class TestClearHour:
    def test_single_hour(self, six_bus_config, tmp_path, capsys):
        out = tmp_path / "hour"
        code = run_cli("clear-hour", "--config", six_bus_config, "--hour", 2,
                       "--out", out)
        assert code == 0
        rows = (out / "hours.csv").read_text().splitlines()
        assert len(rows) == 2
        assert rows[1].startswith("0,")
        assert "LMP" in capsys.readouterr().out

    def test_hour_out_of_range(self, six_bus_config, tmp_path):
        code = run_cli("clear-hour", "--config", six_bus_config,
                       "--hour", 400, "--out", tmp_path / "x")
        assert code == 1


class TestCompare:
    def test_delta_table(self, six_bus_config, tmp_path):
        base_out, bid_out = tmp_path / "base", tmp_path / "bid"
        assert run_cli("simulate", "--config", six_bus_config, "--hours", 4,
                       "--jobs", 1, "--rep", "base", "--out", base_out) == 0
        assert run_cli("simulate", "--config", six_bus_config, "--hours", 4,
                       "--jobs", 1, "--rep", "bidder", "--out", bid_out) == 0
        cmp_out = tmp_path / "cmp"
        assert run_cli("compare", base_out, bid_out, "--out", cmp_out) == 0
        lines = (cmp_out / "compare.csv").read_text().splitlines()
        assert lines[0] == "field,base-nodal,bidder-nodal,delta_pct"
        assert len(lines) > 1
        assert (cmp_out / "compare.png").exists()

    def test_missing_report_exits_1(self, tmp_path):
        code = run_cli("compare", tmp_path / "a", tmp_path / "b",
                       "--out", tmp_path / "c")
        assert code == 1


class TestReduceNet:
    def test_zonal_round_trip(self, six_bus_config, tmp_path):
        out = tmp_path / "zonal"
        code = run_cli("reduce-net", "--config", six_bus_config,
                       "--mode", "zonal", "--out", out)
        assert code == 0
        scn = load_scenario(out / "scenario.yaml")
        assert len(scn.network.buses) == 3
        assert scn.horizon == 168
        assert scn.rep is not None

    def test_copper_round_trip(self, six_bus_config, tmp_path):
        out = tmp_path / "copper"
        assert run_cli("reduce-net", "--config", six_bus_config,
                       "--mode", "copper", "--out", out) == 0
        scn = load_scenario(out / "scenario.yaml")
        assert len(scn.network.buses) == 1
        assert len(scn.network.branches) == 0


class TestExitCodes:
    def test_unknown_subcommand(self):
        assert run_cli("frobnicate") == 1

    def test_missing_required_flag(self):
        assert run_cli("simulate") == 1

    def test_missing_config_file(self, tmp_path):
        assert run_cli("simulate", "--config", tmp_path / "nope.yaml",
                       "--out", tmp_path / "o") == 1

    def test_infeasible_scenario_exits_2(self, tmp_path, capsys):
        net = NetworkModel(
            buses=(Bus("b1"),), branches=(),
            generators=(Generator("g1", "b1", "gas", 0.0, 10.0, ((20.0, 0.0),)),),
            reference_bus="b1",
        )
        scn = Scenario(name="short", network=net, horizon=1,
                       loads=({"b1": 100.0},), res_availability=({},), rep=None)
        cfg = export_scenario(scn, tmp_path / "scn")
        assert run_cli("simulate", "--config", cfg, "--jobs", 1,
                       "--out", tmp_path / "o") == 2
        assert "infeasible" in capsys.readouterr().err


class TestConsoleScript:
    def test_version(self):
        res = subprocess.run(["repmarket", "--version"],
                             capture_output=True, text=True)
        assert res.returncode == 0
        assert res.stdout.strip() == repmarket.__version__
