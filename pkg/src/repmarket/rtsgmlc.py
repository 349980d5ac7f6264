"""Best-effort converter from the RTS-GMLC dataset layout to our CSV schema.

Expects the published directory structure (``SourceData/*.csv`` plus
``timeseries_data_files/<KIND>/DAY_AHEAD_*.csv``); ``--src`` may point at the
repository root, at ``RTS_Data``, or directly at ``SourceData``.

Mapping notes:

- fuels: Oil/Coal/NG/Nuclear/Hydro/Wind/Solar map to our lowercase names,
  NG becomes "gas" and RTPV counts as solar; synchronous condensers and
  storage units are skipped.
- thermal offer pieces come from the heat-rate blocks: block k spans
  ``Output_pct_{k-1}..Output_pct_k`` of PMax with slope
  ``HR_incr_k [BTU/kWh] * fuel price [$/MMBTU] / 1000`` (the first block uses
  HR_avg_0); intercepts follow from continuity with zero cost at zero output.
  Non-monotone heat-rate data is repaired with a running maximum so offers
  stay convex.
- regional day-ahead load is split across each area's buses in proportion to
  the bus "MW Load" column.
- renewable availability columns are clamped to PMax and each renewable's
  p_min is forced to 0 so low-output hours stay feasible.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import ParseError
from .opf import Branch, Bus, Generator, NetworkModel
from .scenario import Scenario

FUEL_MAP = {
    "oil": "oil",
    "coal": "coal",
    "ng": "gas",
    "nuclear": "nuclear",
    "hydro": "hydro",
    "wind": "wind",
    "solar": "solar",
    "rtpv": "solar",
}

SKIP_FUELS = {"sync_cond", "storage"}

TIMESERIES_KINDS = ("WIND", "PV", "RTPV", "HYDRO")


def convert(src, hours=None) -> Scenario:
    """Read an RTS-GMLC tree and return a Scenario (without a plant section)."""
    source = _find_source_dir(Path(src))
    buses, reference, area_of, bus_weights = _read_buses(source / "bus.csv")
    branches = _read_branches(source / "branch.csv")
    generators = _read_generators(source / "gen.csv")
    network = NetworkModel(
        buses=buses, branches=branches, generators=tuple(generators.values()),
        reference_bus=reference,
    )

    ts_dir = source.parent / "timeseries_data_files"
    loads = _read_regional_load(
        ts_dir / "Load" / "DAY_AHEAD_regional_Load.csv", area_of, bus_weights
    )
    avail_by_hour = [dict() for _ in range(len(loads))]
    for kind in TIMESERIES_KINDS:
        path = ts_dir / kind / f"DAY_AHEAD_{kind.lower()}.csv"
        if not path.exists():
            continue
        for hour, table in enumerate(_read_timeseries(path)):
            if hour >= len(avail_by_hour):
                break
            for gid, mw in table.items():
                if gid in generators:
                    cap = generators[gid].p_max_mw
                    avail_by_hour[hour][gid] = min(max(mw, 0.0), cap)

    horizon = len(loads)
    if hours is not None:
        horizon = min(horizon, int(hours))
    return Scenario(
        name="rts-gmlc",
        network=network,
        horizon=horizon,
        loads=tuple(loads[:horizon]),
        res_availability=tuple(avail_by_hour[:horizon]),
        rep=None,
    )


def _find_source_dir(src: Path) -> Path:
    for candidate in (src, src / "SourceData", src / "RTS_Data" / "SourceData"):
        if (candidate / "bus.csv").exists():
            return candidate
    raise ParseError(f"{src}: no bus.csv found; point --src at the dataset")


def _dict_rows(path: Path):
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    with fh:
        for row in csv.DictReader(fh):
            yield row


def _f(row, key, default=0.0) -> float:
    raw = (row.get(key) or "").strip()
    if not raw:
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ParseError(f"bad value {raw!r} in column {key}") from exc


def _read_buses(path):
    buses, refs = [], []
    area_of, weights = {}, {}
    for row in _dict_rows(path):
        try:
            bid = row["Bus ID"].strip()
            area = row["Area"].strip()
        except (KeyError, AttributeError) as exc:
            raise ParseError(f"{path}: missing column {exc}") from exc
        buses.append(Bus(id=bid, region=area))
        area_of[bid] = area
        weights[bid] = _f(row, "MW Load")
        if (row.get("Bus Type") or "").strip().lower() == "ref":
            refs.append(bid)
    if not buses:
        raise ParseError(f"{path}: no buses")
    reference = refs[0] if refs else buses[0].id
    return tuple(buses), reference, area_of, weights


def _read_branches(path):
    out = []
    for row in _dict_rows(path):
        try:
            f, t = row["From Bus"].strip(), row["To Bus"].strip()
        except (KeyError, AttributeError) as exc:
            raise ParseError(f"{path}: missing column {exc}") from exc
        x = _f(row, "X")
        rating = _f(row, "Cont Rating")
        out.append(Branch(
            from_bus=f, to_bus=t, x_pu=x,
            limit_mw=rating if rating > 0 else float("inf"),
        ))
    return tuple(out)


def _read_generators(path):
    gens = {}
    for row in _dict_rows(path):
        try:
            uid = row["GEN UID"].strip()
            fuel_raw = row["Fuel"].strip().lower()
        except (KeyError, AttributeError) as exc:
            raise ParseError(f"{path}: missing column {exc}") from exc
        unit_type = (row.get("Unit Type") or "").strip().lower()
        if fuel_raw in SKIP_FUELS or unit_type in SKIP_FUELS:
            continue
        if unit_type == "rtpv":
            fuel_raw = "rtpv"
        fuel = FUEL_MAP.get(fuel_raw)
        if fuel is None:
            continue
        p_max = _f(row, "PMax MW")
        if p_max <= 0:
            continue
        renewable = fuel in ("wind", "solar", "hydro")
        p_min = 0.0 if renewable else _f(row, "PMin MW")
        gens[uid] = Generator(
            id=uid, bus=row["Bus ID"].strip(), fuel=fuel,
            p_min_mw=p_min, p_max_mw=p_max,
            pieces=_cost_pieces(row, p_max),
        )
    return gens


def _cost_pieces(row, p_max) -> tuple:
    price = _f(row, "Fuel Price $/MMBTU")
    vom = _f(row, "VOM")
    slopes, bounds = [], []
    hr0 = _f(row, "HR_avg_0")
    if price > 0 and hr0 > 0:
        slopes.append(hr0 * price / 1000.0 + vom)
        bounds.append(_f(row, "Output_pct_0") * p_max)
        for k in (1, 2, 3):
            hr = _f(row, f"HR_incr_{k}")
            pct = _f(row, f"Output_pct_{k}")
            if hr <= 0 or pct * p_max <= bounds[-1]:
                continue
            slopes.append(hr * price / 1000.0 + vom)
            bounds.append(pct * p_max)
    if not slopes:
        return ((vom, 0.0),)
    # convexity repair for non-monotone heat-rate data
    for i in range(1, len(slopes)):
        slopes[i] = max(slopes[i], slopes[i - 1])
    pieces = [(slopes[0], 0.0)]
    for i in range(1, len(slopes)):
        prev_alpha, prev_beta = pieces[-1]
        b = bounds[i - 1]
        pieces.append((slopes[i], prev_beta + (prev_alpha - slopes[i]) * b))
    return tuple(pieces)


def _read_regional_load(path, area_of, weights):
    area_weight = {}
    for bid, w in weights.items():
        area_weight[area_of[bid]] = area_weight.get(area_of[bid], 0.0) + w
    loads = []
    for row in _dict_rows(path):
        table = {}
        for area in sorted(set(area_of.values())):
            regional = _f(row, area)
            if regional <= 0:
                continue
            total_w = area_weight.get(area, 0.0)
            if total_w <= 0:
                raise ParseError(
                    f"{path}: area {area} has load but its buses have no "
                    f"MW Load weights to split it by"
                )
            for bid, w in weights.items():
                if area_of[bid] == area and w > 0:
                    table[bid] = regional * w / total_w
        loads.append(table)
    if not loads:
        raise ParseError(f"{path}: no load rows")
    return loads


def _read_timeseries(path):
    meta = {"Year", "Month", "Day", "Period"}
    tables = []
    for row in _dict_rows(path):
        tables.append({
            key.strip(): _f(row, key)
            for key in row
            if key and key.strip() not in meta
        })
    return tables
