"""Scenario loading, validation, and export.

A scenario is a YAML config plus a directory of CSV tables:

- ``buses.csv``       id,region,is_reference
- ``branches.csv``    from,to,x_pu,limit_mw
- ``generators.csv``  id,bus,fuel,p_min_mw,p_max_mw,cost_pieces
  where cost_pieces is ``alpha1;beta1|alpha2;beta2|...``
- ``loads.csv``       hour,bus,mw
- ``res_availability.csv``  hour,generator_id,available_mw

Hours are 0-based and must cover the horizon contiguously. A generator is
"renewable" exactly when it appears in the availability table. Validation is
total: every dangling reference in the inputs is reported in one
ValidationError instead of stopping at the first.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional

import yaml

from .errors import ParseError, ValidationError
from .h2curve import (
    PiecewiseConcaveCurve,
    SampledHydrogenCurve,
    fit_piecewise_concave,
)
from .opf import MODES, Branch, Bus, Generator, NetworkModel

DEFAULT_EMISSION_FACTORS = {
    # metric tons CO2 per MWh of generation
    "coal": 0.9606,
    "gas": 0.6042,
    "oil": 0.7434,
    "nuclear": 0.0,
    "wind": 0.0,
    "solar": 0.0,
    "hydro": 0.0,
}

DEFAULT_FILES = {
    "buses": "buses.csv",
    "branches": "branches.csv",
    "generators": "generators.csv",
    "loads": "loads.csv",
    "res_availability": "res_availability.csv",
}

REPRESENTATIONS = ("base", "bidder", "fixed")

DEFAULT_FIT_PIECES = 4


@dataclass(frozen=True)
class RepSpec:
    """Renewable-electrolyzer plant attached to one wind generator."""

    wind_generator: str
    electrolyzer: Optional[PiecewiseConcaveCurve]
    hydrogen_price: float
    representation: str = "bidder"
    sampled_curve: Optional[SampledHydrogenCurve] = None
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValidationError(
                f"representation must be one of {REPRESENTATIONS}, "
                f"got {self.representation!r}"
            )
        if self.hydrogen_price < 0:
            raise ValidationError(
                f"hydrogen price must be >= 0, got {self.hydrogen_price}"
            )


@dataclass(frozen=True)
class Scenario:
    name: str
    network: NetworkModel
    horizon: int
    loads: tuple           # per hour: {bus: MW}
    res_availability: tuple  # per hour: {generator: MW}
    rep: Optional[RepSpec]
    network_mode: str = "nodal"
    emission_factors: Mapping[str, float] = None

    def __post_init__(self):
        if self.emission_factors is None:
            object.__setattr__(self, "emission_factors", dict(DEFAULT_EMISSION_FACTORS))
        _validate_scenario(self)

    @property
    def hydrogen_price(self) -> float:
        """The plant's hydrogen price, 0 when no plant is configured."""
        return 0.0 if self.rep is None else float(self.rep.hydrogen_price)

    @property
    def renewable_generators(self) -> tuple:
        """Ids appearing in the availability table, in network order."""
        seen = set()
        for hour in self.res_availability:
            seen.update(hour)
        return tuple(g.id for g in self.network.generators if g.id in seen)

    def truncated(self, hours: int) -> "Scenario":
        """First ``hours`` hours of the scenario."""
        if hours < 1 or hours > self.horizon:
            raise ValidationError(
                f"cannot truncate a {self.horizon} hour scenario to {hours}"
            )
        return replace(
            self,
            horizon=hours,
            loads=self.loads[:hours],
            res_availability=self.res_availability[:hours],
        )

    def hour_slice(self, hour: int) -> "Scenario":
        """Single-hour scenario for hour ``hour`` (it becomes hour 0)."""
        if hour < 0 or hour >= self.horizon:
            raise ValidationError(
                f"hour {hour} outside 0..{self.horizon - 1}"
            )
        return replace(
            self,
            horizon=1,
            loads=(self.loads[hour],),
            res_availability=(self.res_availability[hour],),
        )


def _validate_scenario(scn: Scenario) -> None:
    problems = []
    if scn.horizon < 1:
        problems.append(f"horizon must be >= 1, got {scn.horizon}")
    if scn.network_mode not in MODES:
        problems.append(f"unknown network mode {scn.network_mode!r}")
    if len(scn.loads) != scn.horizon:
        problems.append(
            f"loads cover {len(scn.loads)} hours but horizon is {scn.horizon}"
        )
    if len(scn.res_availability) != scn.horizon:
        problems.append(
            f"availability covers {len(scn.res_availability)} hours "
            f"but horizon is {scn.horizon}"
        )
    buses = {b.id for b in scn.network.buses}
    gens = {g.id: g for g in scn.network.generators}
    for h, table in enumerate(scn.loads):
        for bus, mw in table.items():
            if bus not in buses:
                problems.append(f"hour {h}: load at unknown bus {bus}")
            if mw < 0:
                problems.append(f"hour {h}: negative load {mw} at {bus}")
    res_ids = set()
    for h, table in enumerate(scn.res_availability):
        res_ids.update(table)
        for gid, mw in table.items():
            if gid not in gens:
                problems.append(f"hour {h}: availability for unknown generator {gid}")
            elif mw < 0:
                problems.append(f"hour {h}: negative availability {mw} for {gid}")
            elif mw > gens[gid].p_max_mw * (1 + 1e-9) + 1e-9:
                problems.append(
                    f"hour {h}: availability {mw} for {gid} exceeds installed "
                    f"{gens[gid].p_max_mw}"
                )
    for h, table in enumerate(scn.res_availability):
        missing = res_ids - set(table)
        if missing:
            problems.append(
                f"hour {h}: no availability row for {sorted(missing)}"
            )
    if scn.rep is not None:
        wid = scn.rep.wind_generator
        if wid not in gens:
            problems.append(f"plant wind generator {wid} is not in the network")
        elif wid not in res_ids:
            problems.append(
                f"plant wind generator {wid} has no availability data"
            )
    for fuel, factor in scn.emission_factors.items():
        if factor < 0:
            problems.append(f"negative emission factor for {fuel}")
    if problems:
        raise ValidationError("; ".join(problems))


# ---------------------------------------------------------------------------
# loading

def load_scenario(config_path, data_dir=None) -> Scenario:
    """Build a Scenario from a YAML config; see the module docstring."""
    config_path = Path(config_path)
    try:
        raw = yaml.safe_load(config_path.read_text())
    except OSError as exc:
        raise ParseError(f"{config_path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"{config_path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParseError(f"{config_path}: config must be a mapping")

    scn_cfg = _section(raw, "scenario", config_path)
    net_cfg = raw.get("network") or {}
    if data_dir is not None:
        base = Path(data_dir)
    else:
        base = config_path.parent / str(scn_cfg.get("data", "."))

    horizon = scn_cfg.get("horizon")
    if not isinstance(horizon, int) or isinstance(horizon, bool):
        raise ParseError(f"{config_path}: scenario.horizon must be an integer")

    files = {key: base / str(net_cfg.get(key, name))
             for key, name in DEFAULT_FILES.items()}
    buses, reference = _read_buses(files["buses"])
    branches = _read_branches(files["branches"])
    generators = _read_generators(files["generators"])
    network = NetworkModel(
        buses=buses, branches=branches, generators=generators,
        reference_bus=reference,
    )
    loads = _read_hour_table(files["loads"], ["hour", "bus", "mw"], horizon)
    avail = _read_hour_table(
        files["res_availability"], ["hour", "generator_id", "available_mw"], horizon
    )

    rep = None
    if raw.get("rep"):
        rep = _read_rep(raw["rep"], base, config_path)

    factors = dict(DEFAULT_EMISSION_FACTORS)
    emission_cfg = raw.get("emissions") or {}
    if not isinstance(emission_cfg, dict):
        raise ParseError(f"{config_path}: emissions must be a mapping")
    for fuel, factor in emission_cfg.items():
        factors[str(fuel)] = float(factor)

    return Scenario(
        name=str(scn_cfg.get("name", config_path.stem)),
        network=network,
        horizon=horizon,
        loads=loads,
        res_availability=avail,
        rep=rep,
        network_mode=str(scn_cfg.get("network_mode", "nodal")),
        emission_factors=factors,
    )


def _section(raw, name, path):
    value = raw.get(name)
    if not isinstance(value, dict):
        raise ParseError(f"{path}: missing or malformed section {name!r}")
    return value


def _read_rep(cfg, base, config_path) -> RepSpec:
    if not isinstance(cfg, dict):
        raise ParseError(f"{config_path}: rep must be a mapping")
    try:
        wind = str(cfg["wind_generator"])
        price = float(cfg["hydrogen_price_usd_per_kg"])
    except KeyError as exc:
        raise ParseError(f"{config_path}: rep section needs {exc}") from exc

    sampled = None
    ely = None
    breakpoints = ()
    curve_csv = cfg.get("curve_csv")
    capacity = cfg.get("capacity_mw")
    if curve_csv and (capacity is None or float(capacity) > 0):
        sampled = SampledHydrogenCurve.from_csv(base / str(curve_csv))
        if capacity is not None:
            sampled = sampled.scaled(float(capacity))
        if cfg.get("breakpoints_mw"):
            breakpoints = tuple(float(x) for x in cfg["breakpoints_mw"])
            ely = fit_piecewise_concave(sampled, breakpoints=breakpoints)
        else:
            pieces = int(cfg.get("pieces", DEFAULT_FIT_PIECES))
            ely = fit_piecewise_concave(sampled, pieces=pieces)
            breakpoints = ely.breakpoints
    return RepSpec(
        wind_generator=wind,
        electrolyzer=ely,
        hydrogen_price=price,
        representation=str(cfg.get("representation", "bidder")),
        sampled_curve=sampled,
        breakpoints=breakpoints,
    )


def _read_buses(path):
    rows = _read_str_csv(path, ["id", "region", "is_reference"])
    buses = tuple(Bus(id=r[0], region=r[1]) for _, r in rows)
    refs = [r[0] for _, r in rows if r[2].strip().lower() in ("1", "true", "yes")]
    if len(refs) != 1:
        raise ValidationError(
            f"{path}: exactly one reference bus required, found {refs or 'none'}"
        )
    return buses, refs[0]


def _read_branches(path):
    rows = _read_str_csv(path, ["from", "to", "x_pu", "limit_mw"])
    out = []
    for lineno, r in rows:
        try:
            out.append(Branch(from_bus=r[0], to_bus=r[1],
                              x_pu=float(r[2]), limit_mw=float(r[3])))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return tuple(out)


def _read_generators(path):
    rows = _read_str_csv(
        path, ["id", "bus", "fuel", "p_min_mw", "p_max_mw", "cost_pieces"]
    )
    out = []
    for lineno, r in rows:
        try:
            pieces = _parse_pieces(r[5])
            out.append(Generator(
                id=r[0], bus=r[1], fuel=r[2],
                p_min_mw=float(r[3]), p_max_mw=float(r[4]), pieces=pieces,
            ))
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return tuple(out)


def _parse_pieces(text: str) -> tuple:
    pieces = []
    for chunk in text.split("|"):
        parts = chunk.split(";")
        if len(parts) != 2:
            raise ValueError(f"bad cost piece {chunk!r}, expected alpha;beta")
        pieces.append((float(parts[0]), float(parts[1])))
    return tuple(pieces)


def _read_hour_table(path, columns, horizon):
    rows = _read_str_csv(path, columns)
    tables = [dict() for _ in range(horizon)]
    if not rows:
        # a system can have nothing to list here (no renewables, say);
        # only a partial table is a coverage error
        return tuple(tables)
    problems = []
    seen_hours = set()
    for lineno, r in rows:
        try:
            hour = int(r[0])
            key = r[1]
            value = float(r[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
        if hour < 0 or hour >= horizon:
            problems.append(f"{path}:{lineno}: hour {hour} outside 0..{horizon - 1}")
            continue
        seen_hours.add(hour)
        if key in tables[hour]:
            problems.append(f"{path}:{lineno}: duplicate entry for {key} at hour {hour}")
        tables[hour][key] = value
    missing = sorted(set(range(horizon)) - seen_hours)
    if missing:
        problems.append(f"{path}: no rows for hours {missing}")
    if problems:
        raise ValidationError("; ".join(problems))
    return tuple(tables)


def _read_str_csv(path, columns):
    """Rows of a string CSV as (line number, fields) pairs."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    rows = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        if [c.strip() for c in header] != columns:
            raise ParseError(
                f"{path}: expected header {','.join(columns)}, "
                f"got {','.join(header)}"
            )
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(columns):
                raise ParseError(f"{path}:{lineno}: expected {len(columns)} fields")
            rows.append((lineno, [c.strip() for c in raw]))
    return rows


# ---------------------------------------------------------------------------
# export

def export_scenario(scn: Scenario, out_dir) -> Path:
    """Write the scenario back to disk; loading the result reproduces it."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_buses(out / DEFAULT_FILES["buses"], scn.network)
    _write_branches(out / DEFAULT_FILES["branches"], scn.network.branches)
    _write_generators(out / DEFAULT_FILES["generators"], scn.network.generators)
    _write_hour_table(out / DEFAULT_FILES["loads"], ["hour", "bus", "mw"], scn.loads)
    _write_hour_table(
        out / DEFAULT_FILES["res_availability"],
        ["hour", "generator_id", "available_mw"],
        scn.res_availability,
    )
    cfg = {
        "scenario": {
            "name": scn.name,
            "horizon": scn.horizon,
            "network_mode": scn.network_mode,
        },
        "emissions": {k: float(v) for k, v in sorted(scn.emission_factors.items())},
    }
    if scn.rep is not None:
        rep_cfg = {
            "wind_generator": scn.rep.wind_generator,
            "hydrogen_price_usd_per_kg": float(scn.rep.hydrogen_price),
            "representation": scn.rep.representation,
        }
        if scn.rep.sampled_curve is not None:
            scn.rep.sampled_curve.to_csv(out / "electrolyzer_curve.csv")
            rep_cfg["curve_csv"] = "electrolyzer_curve.csv"
            rep_cfg["breakpoints_mw"] = [float(x) for x in scn.rep.breakpoints]
        cfg["rep"] = rep_cfg
    path = out / "scenario.yaml"
    path.write_text(yaml.safe_dump(cfg, sort_keys=True))
    return path


def _write_buses(path, network: NetworkModel):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "region", "is_reference"])
        for b in network.buses:
            w.writerow([b.id, b.region, int(b.id == network.reference_bus)])


def _write_branches(path, branches):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["from", "to", "x_pu", "limit_mw"])
        for br in branches:
            w.writerow([br.from_bus, br.to_bus,
                        repr(float(br.x_pu)), repr(float(br.limit_mw))])


def _write_generators(path, generators):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "bus", "fuel", "p_min_mw", "p_max_mw", "cost_pieces"])
        for g in generators:
            pieces = "|".join(
                f"{repr(float(a))};{repr(float(b))}" for a, b in g.pieces
            )
            w.writerow([g.id, g.bus, g.fuel,
                        repr(float(g.p_min_mw)), repr(float(g.p_max_mw)), pieces])


def _write_hour_table(path, columns, tables):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for hour, table in enumerate(tables):
            for key in sorted(table):
                w.writerow([hour, key, repr(float(table[key]))])
