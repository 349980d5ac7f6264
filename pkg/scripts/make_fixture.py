#!/usr/bin/env python3
"""Generate the bundled six-bus weekly fixture and sanity-check it.

The fixture is a three-region system (two buses each) with a 1000 MW wind
plus electrolyzer plant at b6, a load pocket behind a 700 MW feeder. Three
weekday evenings carry an engineered wind calm so the fixed-consumption
fallback has work to do, and the Saturday night is engineered windy so the
base system curtails at the plant bus. Everything is seeded, so re-running
the script reproduces the committed files byte for byte.
"""

import csv
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

OUT = ROOT / "src" / "repmarket" / "data" / "six_bus"

HOURS = 168
SEED = 20250814

# weekday hourly load shape, fraction of bus peak
SHAPE = [
    0.58, 0.56, 0.55, 0.55, 0.56, 0.59, 0.65, 0.73,
    0.80, 0.84, 0.86, 0.87, 0.86, 0.84, 0.83, 0.84,
    0.90, 0.96, 1.00, 0.99, 0.95, 0.88, 0.76, 0.65,
]
WEEKEND = 0.88

BUS_PEAKS = {"b1": 790.0, "b2": 712.0, "b3": 737.0,
             "b4": 660.0, "b5": 521.0, "b6": 380.0}

BUSES = [
    ("b1", "r1", 1),
    ("b2", "r1", 0),
    ("b3", "r2", 0),
    ("b4", "r2", 0),
    ("b5", "r3", 0),
    ("b6", "r3", 0),
]

BRANCHES = [
    ("b1", "b2", 0.10, 800.0),
    ("b3", "b4", 0.10, 600.0),
    ("b5", "b6", 0.08, 700.0),   # load-pocket feeder, the binding line
    ("b1", "b3", 0.20, 700.0),
    ("b2", "b4", 0.25, 475.0),
    ("b1", "b5", 0.22, 500.0),
    ("b4", "b5", 0.24, 500.0),
]

GENERATORS = [
    ("nuke1", "b1", "nuclear", 0.0, 400.0, "5.0;0.0"),
    ("coal1", "b1", "coal", 0.0, 500.0, "16.0;0.0|19.0;-600.0"),
    ("gas1", "b2", "gas", 0.0, 450.0, "30.0;0.0|38.0;-1200.0"),
    ("gas4", "b2", "gas", 0.0, 300.0, "62.0;0.0|74.0;-1560.0"),
    ("ct1", "b2", "gas", 0.0, 250.0, "150.0;0.0"),
    ("coal2", "b3", "coal", 0.0, 400.0, "17.0;0.0|20.0;-540.0"),
    ("wind2", "b3", "wind", 0.0, 400.0, "0.0;0.0"),
    ("gas2", "b4", "gas", 0.0, 400.0, "29.0;0.0|35.0;-900.0"),
    ("oil3", "b4", "oil", 0.0, 250.0, "85.0;0.0"),
    ("oil1", "b4", "oil", 0.0, 250.0, "98.0;0.0|112.0;-2100.0"),
    ("gas3", "b5", "gas", 0.0, 400.0, "34.0;0.0|42.0;-1200.0"),
    ("oil2", "b5", "oil", 0.0, 200.0, "105.0;0.0"),
    ("ct2", "b5", "oil", 0.0, 200.0, "165.0;0.0"),
    ("wind6", "b6", "wind", 0.0, 1000.0, "0.0;0.0"),
]

# electrolyzer samples every 125 MW; quarter-point chords are exactly
# 18.5 / 17.0 / 15.0 / 13.7 kg/MWh
ELECTROLYZER = [
    (0.0, 0.0),
    (125.0, 2400.0),
    (250.0, 4625.0),
    (375.0, 6812.5),
    (500.0, 8875.0),
    (625.0, 10825.0),
    (750.0, 12625.0),
    (875.0, 14375.0),
    (1000.0, 16050.0),
]

SCENARIO_YAML = """\
emissions: {}
rep:
  breakpoints_mw: [0.0, 250.0, 500.0, 750.0, 1000.0]
  curve_csv: electrolyzer_curve.csv
  hydrogen_price_usd_per_kg: 1.5
  representation: bidder
  wind_generator: wind6
scenario:
  horizon: 168
  name: six-bus
  network_mode: nodal
"""


def ar_series(rng, n, rho=0.92):
    x = np.empty(n)
    x[0] = rng.standard_normal()
    step = np.sqrt(1.0 - rho * rho)
    for t in range(1, n):
        x[t] = rho * x[t - 1] + step * rng.standard_normal()
    return x


def build_loads(rng):
    loads = []
    for t in range(HOURS):
        day, hod = divmod(t, 24)
        factor = SHAPE[hod] * (1.0 if day < 5 else WEEKEND)
        row = {}
        for bus, peak in BUS_PEAKS.items():
            noise = 1.0 + 0.02 * float(np.clip(rng.standard_normal(), -1.25, 1.25))
            row[bus] = round(min(peak * factor * noise, peak), 2)
        loads.append(row)
    return loads


def build_wind(rng):
    w6 = 30.0 + 920.0 / (1.0 + np.exp(-1.2 * ar_series(rng, HOURS)))
    w2 = 20.0 + 372.0 / (1.0 + np.exp(-1.1 * ar_series(rng, HOURS)))

    # calm weekday evenings, days 1, 3 and 4: the plant wind bottoms out
    # right at the load peak, which prices out the bid curve's top pieces
    # and exercises the two-pass fixed procedure; the dip covers hours
    # 12:00-23:00 with the trough at 17:00-20:00
    dip = np.array([150.0, 110.0, 70.0, 40.0, 20.0, 10.0,
                    8.0, 10.0, 16.0, 30.0, 55.0, 90.0])
    for start in (36, 84, 108):
        w6[start:start + 12] = np.minimum(w6[start:start + 12], dip)
        w2[start:start + 12] = np.minimum(w2[start:start + 12], dip + 45.0)

    # windy weekend night, day 5: more plant wind than the feeder can
    # export against the small night load, so the base system curtails
    # at b6 while the rest of the grid sits on its cheap margin
    windy = np.concatenate([np.linspace(650.0, 1000.0, 3), np.full(6, 1000.0),
                            np.linspace(1000.0, 650.0, 2)])
    w6[119:130] = np.maximum(w6[119:130], windy)

    return np.round(w6, 2), np.round(w2, 2)


def write_fixture():
    rng = np.random.default_rng(SEED)
    loads = build_loads(rng)
    w6, w2 = build_wind(rng)

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / "buses.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "region", "is_reference"])
        w.writerows(BUSES)
    with open(OUT / "branches.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "x_pu", "limit_mw"])
        for f, t, x, lim in BRANCHES:
            w.writerow([f, t, repr(x), repr(lim)])
    with open(OUT / "generators.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "bus", "fuel", "p_min_mw", "p_max_mw", "cost_pieces"])
        for gid, bus, fuel, pmin, pmax, pieces in GENERATORS:
            w.writerow([gid, bus, fuel, repr(pmin), repr(pmax), pieces])
    with open(OUT / "loads.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "bus", "mw"])
        for t, row in enumerate(loads):
            for bus in sorted(row):
                w.writerow([t, bus, repr(row[bus])])
    with open(OUT / "res_availability.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "generator_id", "available_mw"])
        for t in range(HOURS):
            w.writerow([t, "wind2", repr(float(w2[t]))])
            w.writerow([t, "wind6", repr(float(w6[t]))])
    with open(OUT / "electrolyzer_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["power_mw", "h2_kg_per_h"])
        for p, h in ELECTROLYZER:
            w.writerow([repr(p), repr(h)])
    (OUT / "scenario.yaml").write_text(SCENARIO_YAML)
    print(f"fixture written to {OUT}")


def check_fixture():
    from repmarket.metrics import build_report
    from repmarket.scenario import load_scenario
    from repmarket.sim import simulate_base, simulate_bidder, simulate_fixed

    scn = load_scenario(OUT / "scenario.yaml")
    print(f"loaded: {scn.name}, {scn.horizon} h, "
          f"{len(scn.network.buses)} buses, {len(scn.network.generators)} gens")

    runs = {}
    for mode in ("nodal", "zonal", "copper"):
        runs[mode] = simulate_bidder(replace(scn, network_mode=mode))
    bad = []
    for h in range(scn.horizon):
        o = {m: runs[m].records[h].objective for m in runs}
        if not (o["copper"] <= o["zonal"] + 1e-6 and o["zonal"] <= o["nodal"] + 1e-6):
            bad.append((h, o))
    print(f"ordering violations: {len(bad)}")
    for h, o in bad[:10]:
        print(f"  hour {h}: copper={o['copper']:.2f} zonal={o['zonal']:.2f} "
              f"nodal={o['nodal']:.2f}")

    base = simulate_base(scn)
    print(f"base objective: {sum(r.objective for r in base.records):,.0f}")
    lmps_by_hour = [max(r.outcome.lmp.values()) for r in base.records]
    bands = [(0, 29), (29, 82), (82, 98), (98, 112), (112, 135), (135, 999)]
    counts = {b: sum(1 for v in lmps_by_hour if b[0] <= v < b[1]) for b in bands}
    print(f"base max-LMP hours by band: {counts}")
    spill = sum(r.rep_spill for r in base.records)
    print(f"base plant spill: {spill:,.0f} MWh over "
          f"{sum(1 for r in base.records if r.rep_spill > 1)} hours")

    for price in (1.5, 6.0):
        s = replace(scn, rep=replace(scn.rep, hydrogen_price=price))
        bid = simulate_bidder(s)
        fix = simulate_fixed(s, bidder=bid)
        rb = build_report(bid, label=f"bidder@{price}")
        rf = build_report(fix, label=f"fixed@{price}")
        print(f"--- price {price} $/kg, fixed level {fix.fixed_level:.1f} MW, "
              f"pass2 hours {rf.pass2_hours}")
        print(f"  cost:    bidder {rb.cost_generation_usd:,.0f}  "
              f"fixed {rf.cost_generation_usd:,.0f}  "
              f"ok={rb.cost_generation_usd <= rf.cost_generation_usd}")
        print(f"  profit:  bidder {rb.rep_profit_usd:,.0f}  "
              f"fixed {rf.rep_profit_usd:,.0f}  "
              f"ok={rb.rep_profit_usd >= rf.rep_profit_usd}")
        print(f"  curtail: bidder {rb.curtailment_mwh:,.0f}  "
              f"fixed {rf.curtailment_mwh:,.0f}  "
              f"ok={rb.curtailment_mwh <= rf.curtailment_mwh}")
        if rf.emissions_t > 0:
            gap = abs(rb.emissions_t - rf.emissions_t) / rf.emissions_t
            print(f"  emissions: bidder {rb.emissions_t:,.0f} t  "
                  f"fixed {rf.emissions_t:,.0f} t  gap {100 * gap:.2f}%")
        strict = [r for r in fix.records
                  if r.pass2 and r.rep_p_h < fix.fixed_level - 1e-6]
        print(f"  strictly shed pass2 hours: {len(strict)}")
        sold = sum(1 for r in bid.records if r.rep_p_da > 1.0 and r.rep_p_h < 1.0)
        node_high = sum(1 for r in bid.records if r.lmp_rep_node > 111.0)
        print(f"  bidder sell-out hours: {sold}, node LMP > 111 hours: {node_high}")


if __name__ == "__main__":
    write_fixture()
    check_fixture()
