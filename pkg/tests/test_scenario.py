"""Scenario loading, validation, round-trip export, and slicing."""

from dataclasses import replace
from pathlib import Path

import pytest

from repmarket.errors import ParseError, ValidationError
from repmarket.opf import Branch, Bus, Generator, NetworkModel
from repmarket.scenario import (
    DEFAULT_EMISSION_FACTORS,
    RepSpec,
    Scenario,
    export_scenario,
    load_scenario,
)

MINI_FILES = {
    "buses.csv": (
        "id,region,is_reference\n"
        "b1,north,1\n"
        "b2,south,0\n"
    ),
    "branches.csv": (
        "from,to,x_pu,limit_mw\n"
        "b1,b2,0.1,100.0\n"
    ),
    "generators.csv": (
        "id,bus,fuel,p_min_mw,p_max_mw,cost_pieces\n"
        "g1,b1,gas,0.0,200.0,20.0;0.0\n"
        "w1,b2,wind,0.0,50.0,0.0;0.0\n"
    ),
    "loads.csv": (
        "hour,bus,mw\n"
        "0,b1,30.0\n"
        "0,b2,10.0\n"
        "1,b1,35.0\n"
        "1,b2,12.0\n"
    ),
    "res_availability.csv": (
        "hour,generator_id,available_mw\n"
        "0,w1,40.0\n"
        "1,w1,20.0\n"
    ),
    "ely.csv": (
        "power_mw,h2_kg_per_h\n"
        "0,0\n"
        "10,300\n"
        "20,550\n"
        "30,760\n"
        "40,940\n"
    ),
    "scenario.yaml": (
        "scenario:\n"
        "  name: mini\n"
        "  horizon: 2\n"
        "  network_mode: nodal\n"
        "rep:\n"
        "  wind_generator: w1\n"
        "  hydrogen_price_usd_per_kg: 2.0\n"
        "  curve_csv: ely.csv\n"
        "  breakpoints_mw: [0.0, 20.0, 40.0]\n"
    ),
}


def write_mini(tmp_path, overrides=None):
    """Write the two-bus scenario files, applying text overrides per file."""
    files = dict(MINI_FILES)
    files.update(overrides or {})
    for name, text in files.items():
        if text is not None:
            (tmp_path / name).write_text(text)
    return tmp_path / "scenario.yaml"


class TestMiniLoad:
    def test_basic_fields(self, tmp_path):
        scn = load_scenario(write_mini(tmp_path))
        assert scn.name == "mini"
        assert scn.horizon == 2
        assert scn.network_mode == "nodal"
        assert [b.id for b in scn.network.buses] == ["b1", "b2"]
        assert scn.network.reference_bus == "b1"
        assert scn.loads[1] == {"b1": 35.0, "b2": 12.0}
        assert scn.res_availability[0] == {"w1": 40.0}
        assert scn.renewable_generators == ("w1",)

    def test_rep_fields(self, tmp_path):
        scn = load_scenario(write_mini(tmp_path))
        assert scn.rep.wind_generator == "w1"
        assert scn.rep.representation == "bidder"
        assert scn.hydrogen_price == 2.0
        ely = scn.rep.electrolyzer
        assert ely.breakpoints == (0.0, 20.0, 40.0)
        # chords of the sampled curve at the requested breakpoints
        assert ely.slopes == pytest.approx((27.5, 19.5))
        assert ely.value(40.0) == pytest.approx(940.0)

    def test_no_rep_section(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].split("rep:")[0]
        scn = load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))
        assert scn.rep is None
        assert scn.hydrogen_price == 0.0

    def test_default_pieces_fit(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].replace(
            "  breakpoints_mw: [0.0, 20.0, 40.0]\n", ""
        )
        scn = load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))
        assert scn.rep.electrolyzer.n_pieces == 4
        assert scn.rep.breakpoints == (0.0, 10.0, 20.0, 30.0, 40.0)

    def test_capacity_scaling(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].replace(
            "  breakpoints_mw: [0.0, 20.0, 40.0]\n",
            "  capacity_mw: 80.0\n  pieces: 2\n",
        )
        scn = load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))
        ely = scn.rep.electrolyzer
        assert ely.capacity_mw == pytest.approx(80.0)
        # both axes scale by 2, so specific performance is preserved
        assert ely.value(80.0) == pytest.approx(1880.0)
        assert ely.slopes == pytest.approx((27.5, 19.5))

    def test_capacity_zero_disables_electrolyzer(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].replace(
            "  breakpoints_mw: [0.0, 20.0, 40.0]\n",
            "  capacity_mw: 0\n",
        )
        scn = load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))
        assert scn.rep is not None
        assert scn.rep.electrolyzer is None
        assert scn.rep.sampled_curve is None

    def test_emission_overrides(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"] + "emissions:\n  coal: 1.0\n  peat: 0.3\n"
        scn = load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))
        assert scn.emission_factors["coal"] == 1.0
        assert scn.emission_factors["peat"] == 0.3
        assert scn.emission_factors["gas"] == DEFAULT_EMISSION_FACTORS["gas"]

    def test_data_dir_override(self, tmp_path):
        data = tmp_path / "tables"
        data.mkdir()
        write_mini(data)
        cfg = tmp_path / "elsewhere.yaml"
        cfg.write_text(MINI_FILES["scenario.yaml"])
        scn = load_scenario(cfg, data_dir=data)
        assert scn.horizon == 2


class TestFixtureLoad:
    def test_shape(self, six_bus):
        assert six_bus.horizon == 168
        assert len(six_bus.network.buses) == 6
        assert len(six_bus.network.generators) == 14
        assert len(six_bus.network.branches) == 7
        assert len(six_bus.loads) == 168

    def test_rep(self, six_bus):
        assert six_bus.rep.wind_generator == "wind6"
        assert six_bus.hydrogen_price == 1.5
        assert six_bus.rep.electrolyzer.n_pieces == 4
        assert six_bus.rep.electrolyzer.capacity_mw == 1000.0

    def test_regions_cover_buses(self, six_bus):
        assert all(b.region for b in six_bus.network.buses)
        assert set(six_bus.renewable_generators) == {"wind2", "wind6"}


class TestRoundTrip:
    def test_mini(self, tmp_path):
        scn = load_scenario(write_mini(tmp_path))
        out = tmp_path / "export"
        again = load_scenario(export_scenario(scn, out))
        assert again == scn

    def test_fixture(self, six_bus, tmp_path):
        again = load_scenario(export_scenario(six_bus, tmp_path / "x"))
        assert again == six_bus

    def test_thermal_only(self, tmp_path):
        # no renewables means an empty availability table, which must
        # still load back
        net = NetworkModel(
            buses=(Bus("b1"),), branches=(),
            generators=(Generator("g1", "b1", "gas", 0.0, 50.0, ((20.0, 0.0),)),),
            reference_bus="b1",
        )
        scn = Scenario(name="thermal", network=net, horizon=2,
                       loads=({"b1": 10.0}, {"b1": 12.0}),
                       res_availability=({}, {}), rep=None)
        again = load_scenario(export_scenario(scn, tmp_path / "t"))
        assert again == scn


class TestSlicing:
    def test_truncated(self, six_bus):
        short = six_bus.truncated(24)
        assert short.horizon == 24
        assert short.loads == six_bus.loads[:24]
        assert short.res_availability == six_bus.res_availability[:24]
        assert short.rep == six_bus.rep

    def test_truncated_bounds(self, six_bus):
        with pytest.raises(ValidationError):
            six_bus.truncated(0)
        with pytest.raises(ValidationError):
            six_bus.truncated(169)

    def test_hour_slice(self, six_bus):
        one = six_bus.hour_slice(17)
        assert one.horizon == 1
        assert one.loads == (six_bus.loads[17],)
        assert one.res_availability == (six_bus.res_availability[17],)

    def test_hour_slice_bounds(self, six_bus):
        with pytest.raises(ValidationError):
            six_bus.hour_slice(-1)
        with pytest.raises(ValidationError):
            six_bus.hour_slice(168)


class TestValidation:
    def net(self):
        return NetworkModel(
            buses=(Bus("b1"), Bus("b2")),
            branches=(Branch("b1", "b2", 0.1, 100.0),),
            generators=(
                Generator("g1", "b1", "gas", 0.0, 200.0, ((20.0, 0.0),)),
                Generator("w1", "b2", "wind", 0.0, 50.0, ((0.0, 0.0),)),
            ),
            reference_bus="b1",
        )

    def test_collects_all_problems(self):
        # one message listing every issue, not just the first
        with pytest.raises(ValidationError) as err:
            Scenario(
                name="bad",
                network=self.net(),
                horizon=1,
                loads=({"nowhere": 10.0, "b1": -5.0},),
                res_availability=({"ghost": 1.0},),
                rep=None,
            )
        text = str(err.value)
        assert "unknown bus nowhere" in text
        assert "negative load -5.0" in text
        assert "unknown generator ghost" in text

    def test_availability_above_installed(self):
        with pytest.raises(ValidationError, match="exceeds installed"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=1,
                loads=({"b1": 10.0},),
                res_availability=({"w1": 60.0},),
                rep=None,
            )

    def test_missing_availability_hour(self):
        with pytest.raises(ValidationError, match="no availability row"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=2,
                loads=({"b1": 10.0}, {"b1": 10.0}),
                res_availability=({"w1": 30.0}, {}),
                rep=None,
            )

    def test_horizon_mismatch(self):
        with pytest.raises(ValidationError, match="cover 1 hours"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=2,
                loads=({"b1": 10.0},),
                res_availability=({"w1": 30.0}, {"w1": 30.0}),
                rep=None,
            )

    def test_rep_wind_not_in_network(self, two_piece_curve):
        with pytest.raises(ValidationError, match="not in the network"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=1,
                loads=({"b1": 10.0},),
                res_availability=({"w1": 30.0},),
                rep=RepSpec("w9", two_piece_curve, 1.5),
            )

    def test_rep_wind_without_availability(self, two_piece_curve):
        with pytest.raises(ValidationError, match="no availability data"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=1,
                loads=({"b1": 10.0},),
                res_availability=({},),
                rep=RepSpec("w1", two_piece_curve, 1.5),
            )

    def test_unknown_mode(self):
        with pytest.raises(ValidationError, match="network mode"):
            Scenario(
                name="bad",
                network=self.net(),
                horizon=1,
                loads=({"b1": 10.0},),
                res_availability=({"w1": 30.0},),
                rep=None,
                network_mode="radial",
            )

    def test_rep_spec_rejects_bad_representation(self, two_piece_curve):
        with pytest.raises(ValidationError, match="representation"):
            RepSpec("w1", two_piece_curve, 1.5, representation="greedy")

    def test_rep_spec_rejects_negative_price(self, two_piece_curve):
        with pytest.raises(ValidationError, match="price"):
            RepSpec("w1", two_piece_curve, -0.1)

    def test_negative_emission_factor(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"] + "emissions:\n  coal: -1.0\n"
        with pytest.raises(ValidationError, match="negative emission factor"):
            load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))


class TestParseErrors:
    def test_missing_config(self, tmp_path):
        with pytest.raises(ParseError):
            load_scenario(tmp_path / "nope.yaml")

    def test_config_not_mapping(self, tmp_path):
        path = write_mini(tmp_path, {"scenario.yaml": "- just\n- a list\n"})
        with pytest.raises(ParseError, match="must be a mapping"):
            load_scenario(path)

    def test_missing_scenario_section(self, tmp_path):
        path = write_mini(tmp_path, {"scenario.yaml": "network: {}\n"})
        with pytest.raises(ParseError, match="scenario"):
            load_scenario(path)

    def test_non_integer_horizon(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].replace("horizon: 2", "horizon: 2.5")
        with pytest.raises(ParseError, match="horizon"):
            load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))

    def test_missing_table_file(self, tmp_path):
        path = write_mini(tmp_path)
        (tmp_path / "loads.csv").unlink()
        with pytest.raises(ParseError, match="loads.csv"):
            load_scenario(path)

    def test_wrong_header(self, tmp_path):
        bad = MINI_FILES["buses.csv"].replace("is_reference", "ref")
        path = write_mini(tmp_path, {"buses.csv": bad})
        with pytest.raises(ParseError, match="expected header"):
            load_scenario(path)

    def test_bad_float_reports_line(self, tmp_path):
        bad = MINI_FILES["branches.csv"].replace("0.1", "zero-point-one")
        path = write_mini(tmp_path, {"branches.csv": bad})
        with pytest.raises(ParseError, match="branches.csv:2"):
            load_scenario(path)

    def test_bad_cost_piece(self, tmp_path):
        bad = MINI_FILES["generators.csv"].replace("20.0;0.0", "20.0")
        path = write_mini(tmp_path, {"generators.csv": bad})
        with pytest.raises(ParseError, match="alpha;beta"):
            load_scenario(path)

    def test_rep_missing_price(self, tmp_path):
        cfg = MINI_FILES["scenario.yaml"].replace(
            "  hydrogen_price_usd_per_kg: 2.0\n", ""
        )
        with pytest.raises(ParseError, match="hydrogen_price_usd_per_kg"):
            load_scenario(write_mini(tmp_path, {"scenario.yaml": cfg}))

    def test_duplicate_load_row(self, tmp_path):
        bad = MINI_FILES["loads.csv"] + "1,b1,99.0\n"
        path = write_mini(tmp_path, {"loads.csv": bad})
        with pytest.raises(ValidationError, match="duplicate entry"):
            load_scenario(path)

    def test_hour_outside_horizon(self, tmp_path):
        bad = MINI_FILES["loads.csv"] + "5,b1,99.0\n"
        path = write_mini(tmp_path, {"loads.csv": bad})
        with pytest.raises(ValidationError, match="outside"):
            load_scenario(path)

    def test_missing_hour_rows(self, tmp_path):
        trimmed = "hour,generator_id,available_mw\n0,w1,40.0\n"
        path = write_mini(tmp_path, {"res_availability.csv": trimmed})
        with pytest.raises(ValidationError, match=r"no rows for hours \[1\]"):
            load_scenario(path)

    def test_two_reference_buses(self, tmp_path):
        bad = MINI_FILES["buses.csv"].replace("b2,south,0", "b2,south,1")
        path = write_mini(tmp_path, {"buses.csv": bad})
        with pytest.raises(ValidationError, match="exactly one reference"):
            load_scenario(path)
