"""Multi-hour market simulation under three plant representations.

- ``base``:   the plant's wind unit sells like any other renewable; no
              electrolyzer in the picture.
- ``bidder``: each hour the plant offers its opportunity-cost curve; the
              electrolyzer setpoint is recovered from the cleared sale as
              p_h = min(P_res - p_da, capacity).
- ``fixed``:  the electrolyzer draws a constant level (by default the
              bidder's average consumption) as inflexible load. Hours where
              that load cannot be served are re-run in two passes: first with
              a relief offer at the value-of-lost-load price to find how much
              consumption fits, then a clean re-clear at that consumption so
              prices are undistorted.

Hours are independent, so they can be solved in parallel; results are always
collected in hour order and runs are bit-for-bit reproducible either way.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from .bidcurve import RepConfig, derive_bid_curve
from .errors import InfeasibleMarket, ValidationError
from .opf import Generator, MarketOutcome, NetworkModel, aggregate_loads, clear_market, reduce_network
from .scenario import Scenario

# $/MWh offer of the relief generator used to locate the servable consumption
VOLL = 10000.0

_RELIEF_ID = "_relief"


@dataclass(frozen=True)
class HourRecord:
    """One cleared hour plus the plant's recovered operating point."""

    hour: int
    objective: float
    rep_p_da: float      # MW sold to the market (negative = bought)
    rep_p_h: float       # MW into the electrolyzer
    rep_spill: float     # MW of plant wind neither sold nor converted
    h2_kg: float
    lmp_rep_node: float
    pass2: bool
    outcome: MarketOutcome


@dataclass
class RunResult:
    representation: str
    scenario: Scenario       # truncated to the simulated horizon
    network: NetworkModel    # reduced network the hours were cleared on
    rep_bus: str
    records: tuple
    fixed_level: Optional[float] = None


def simulate(scn: Scenario, representation: str, hours=None, jobs=1,
             bidder: Optional[RunResult] = None,
             fixed_level: Optional[float] = None) -> RunResult:
    if representation == "base":
        return simulate_base(scn, hours=hours, jobs=jobs)
    if representation == "bidder":
        return simulate_bidder(scn, hours=hours, jobs=jobs)
    if representation == "fixed":
        return simulate_fixed(scn, bidder=bidder, level=fixed_level,
                              hours=hours, jobs=jobs)
    raise ValidationError(f"unknown representation {representation!r}")


def simulate_base(scn: Scenario, hours=None, jobs=1) -> RunResult:
    scn, net, loads, rep_bus = _prepare(scn, hours)
    payloads = [
        _payload(scn, net, loads, rep_bus, h, "base") for h in range(scn.horizon)
    ]
    return RunResult("base", scn, net, rep_bus, _run(payloads, jobs))


def simulate_bidder(scn: Scenario, hours=None, jobs=1) -> RunResult:
    _require_rep(scn)
    scn, net, loads, rep_bus = _prepare(scn, hours)
    payloads = [
        _payload(scn, net, loads, rep_bus, h, "bidder") for h in range(scn.horizon)
    ]
    return RunResult("bidder", scn, net, rep_bus, _run(payloads, jobs))


def simulate_fixed(scn: Scenario, bidder: Optional[RunResult] = None,
                   level: Optional[float] = None, hours=None, jobs=1) -> RunResult:
    """Fixed-consumption run; the level defaults to the bidder's average."""
    _require_rep(scn)
    if level is None:
        if bidder is None:
            bidder = simulate_bidder(scn, hours=hours, jobs=jobs)
        level = sum(r.rep_p_h for r in bidder.records) / len(bidder.records)
    if level < 0:
        raise ValidationError(f"fixed consumption must be >= 0, got {level}")
    scn, net, loads, rep_bus = _prepare(scn, hours)
    payloads = [
        _payload(scn, net, loads, rep_bus, h, "fixed", level=level)
        for h in range(scn.horizon)
    ]
    return RunResult("fixed", scn, net, rep_bus, _run(payloads, jobs),
                     fixed_level=float(level))


def _require_rep(scn: Scenario) -> None:
    if scn.rep is None:
        raise ValidationError("scenario has no plant section")


def _prepare(scn: Scenario, hours):
    if hours is not None:
        scn = scn.truncated(hours)
    net = reduce_network(scn.network, scn.network_mode)
    loads = [aggregate_loads(net, table) for table in scn.loads]
    if scn.rep is not None:
        rep_bus = net.map_bus(scn.network.generator(scn.rep.wind_generator).bus)
    else:
        rep_bus = net.reference_bus
    return scn, net, loads, rep_bus


def _payload(scn, net, loads, rep_bus, hour, representation, level=None):
    rep = scn.rep
    return {
        "hour": hour,
        "representation": representation,
        "net": net,
        "loads": loads[hour],
        "avail": scn.res_availability[hour],
        "rep_bus": rep_bus,
        "wind_gen": None if rep is None else rep.wind_generator,
        "electrolyzer": None if rep is None else rep.electrolyzer,
        "price": scn.hydrogen_price,
        "level": level,
    }


def _run(payloads, jobs):
    if jobs is None or jobs <= 1 or len(payloads) <= 1:
        return tuple(_solve_hour(p) for p in payloads)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return tuple(pool.map(_solve_hour, payloads))  # map preserves order


def _cap_renewables(net: NetworkModel, avail) -> tuple:
    """Generators with hourly availability as their upper limit."""
    gens = []
    for g in net.generators:
        if g.id in avail:
            cap = min(g.p_max_mw, float(avail[g.id]))
            gens.append(replace(g, p_max_mw=cap, p_min_mw=min(g.p_min_mw, cap)))
        else:
            gens.append(g)
    return tuple(gens)


def _solve_hour(payload) -> HourRecord:
    rep_kind = payload["representation"]
    if rep_kind == "base":
        return _solve_base(payload)
    if rep_kind == "bidder":
        return _solve_bidder(payload)
    return _solve_fixed(payload)


def _solve_base(payload) -> HourRecord:
    net = payload["net"].with_generators(
        _cap_renewables(payload["net"], payload["avail"])
    )
    try:
        out = clear_market(net, payload["loads"])
    except InfeasibleMarket as exc:
        raise InfeasibleMarket(str(exc), hour=payload["hour"]) from exc
    wind = payload["wind_gen"]
    if wind is None:
        p_da, spill = 0.0, 0.0
    else:
        p_da = out.dispatch[wind]
        spill = max(0.0, float(payload["avail"][wind]) - p_da)
    return HourRecord(
        hour=payload["hour"],
        objective=out.objective,
        rep_p_da=p_da,
        rep_p_h=0.0,
        rep_spill=spill,
        h2_kg=0.0,
        lmp_rep_node=out.lmp[payload["rep_bus"]],
        pass2=False,
        outcome=out,
    )


def _embed_bidder(net: NetworkModel, avail, wind, ely, price, rep_bus):
    """Hourly network with the plant's offer in place of its wind unit."""
    res = float(avail[wind])
    bid = derive_bid_curve(RepConfig(ely, res, price, rep_bus))
    # at a zero hydrogen price every quantity is free and imports would be
    # arbitrary; pin the plant to sell-only so it never buys worthless power
    q_min = bid.q_min if price > 0 else max(bid.q_min, 0.0)
    gens = []
    for g in _cap_renewables(net, avail):
        if g.id == wind:
            g = replace(
                g,
                p_min_mw=q_min,
                p_max_mw=bid.q_max,
                pieces=tuple((p.alpha, p.beta) for p in bid.pieces),
            )
        gens.append(g)
    return net.with_generators(tuple(gens)), bid, q_min


def _solve_bidder(payload) -> HourRecord:
    net, avail = payload["net"], payload["avail"]
    wind, ely, price = payload["wind_gen"], payload["electrolyzer"], payload["price"]
    res = float(avail[wind])
    hour_net, bid, q_min = _embed_bidder(
        net, avail, wind, ely, price, payload["rep_bus"]
    )
    try:
        out = clear_market(hour_net, payload["loads"])
    except InfeasibleMarket as exc:
        raise InfeasibleMarket(str(exc), hour=payload["hour"]) from exc

    cap = 0.0 if ely is None else ely.capacity_mw
    p_da = min(max(out.dispatch[wind], q_min), bid.q_max)
    p_h = min(max(res - p_da, 0.0), cap)
    spill = max(0.0, res - p_da - p_h)
    h2 = 0.0 if ely is None else ely.value(p_h)
    return HourRecord(
        hour=payload["hour"],
        objective=out.objective,
        rep_p_da=p_da,
        rep_p_h=p_h,
        rep_spill=spill,
        h2_kg=h2,
        lmp_rep_node=out.lmp[payload["rep_bus"]],
        pass2=False,
        outcome=out,
    )


def _solve_fixed(payload) -> HourRecord:
    net, avail = payload["net"], payload["avail"]
    wind, ely = payload["wind_gen"], payload["electrolyzer"]
    level = float(payload["level"])
    rep_bus = payload["rep_bus"]
    res = float(avail[wind])
    hour_net = net.with_generators(_cap_renewables(net, avail))

    loads = dict(payload["loads"])
    loads[rep_bus] = loads.get(rep_bus, 0.0) + level
    pass2 = False
    try:
        out = clear_market(hour_net, loads)
        consumption = level
    except InfeasibleMarket:
        consumption, out = _shed_and_reclear(hour_net, payload, level)
        pass2 = True

    wind_dispatch = out.dispatch[wind]
    p_da = wind_dispatch - consumption
    spill = max(0.0, res - wind_dispatch)
    cap = 0.0 if ely is None else ely.capacity_mw
    h2 = 0.0 if ely is None else ely.value(min(consumption, cap))
    return HourRecord(
        hour=payload["hour"],
        objective=out.objective,
        rep_p_da=p_da,
        rep_p_h=consumption,
        rep_spill=spill,
        h2_kg=h2,
        lmp_rep_node=out.lmp[rep_bus],
        pass2=pass2,
        outcome=out,
    )


def _shed_and_reclear(hour_net, payload, level):
    """Two-pass fallback for unservable fixed consumption.

    Pass 1 keeps the full level but lets a relief offer at VOLL price back it
    off; the cleared relief tells us the servable consumption. Pass 2 clears
    the market again at that consumption without the relief unit, so the
    recorded prices reflect the real marginal units.
    """
    rep_bus = payload["rep_bus"]
    loads = dict(payload["loads"])
    loads[rep_bus] = loads.get(rep_bus, 0.0) + level
    relief = Generator(
        id=_RELIEF_ID, bus=rep_bus, fuel="relief",
        p_min_mw=0.0, p_max_mw=level, pieces=((VOLL, 0.0),),
    )
    with_relief = hour_net.with_generators(hour_net.generators + (relief,))
    try:
        first = clear_market(with_relief, loads)
    except InfeasibleMarket as exc:
        # not even zero consumption helps; the scenario itself is short
        raise InfeasibleMarket(str(exc), hour=payload["hour"]) from exc

    consumption = min(max(level - first.dispatch[_RELIEF_ID], 0.0), level)
    loads2 = dict(payload["loads"])
    loads2[rep_bus] = loads2.get(rep_bus, 0.0) + consumption
    try:
        return consumption, clear_market(hour_net, loads2)
    except InfeasibleMarket:
        # the shed point sits exactly on the feasibility boundary; back off
        # by a hair to absorb solver roundoff
        consumption = max(0.0, consumption - 1e-6)
        loads2[rep_bus] = payload["loads"].get(rep_bus, 0.0) + consumption
        try:
            return consumption, clear_market(hour_net, loads2)
        except InfeasibleMarket as exc:
            raise InfeasibleMarket(str(exc), hour=payload["hour"]) from exc


def hour_network(run: RunResult, hour: int) -> NetworkModel:
    """Generator set one simulated hour was cleared with, for reporting."""
    scn = run.scenario
    if hour < 0 or hour >= scn.horizon:
        raise ValidationError(f"hour {hour} outside 0..{scn.horizon - 1}")
    avail = scn.res_availability[hour]
    if run.representation == "bidder":
        rep = scn.rep
        net, _, _ = _embed_bidder(
            run.network, avail, rep.wind_generator, rep.electrolyzer,
            scn.hydrogen_price, run.rep_bus,
        )
        return net
    return run.network.with_generators(_cap_renewables(run.network, avail))


# ---------------------------------------------------------------------------
# delimited output

def write_run_csvs(run: RunResult, out_dir) -> list:
    """Write hours/dispatch/flows/lmp tables; returns the paths written."""
    import csv

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    path = out / "hours.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "hour", "objective_usd", "rep_p_da_mw", "rep_p_h_mw",
            "rep_spill_mw", "h2_kg", "lmp_rep_node", "pass2_flag",
        ])
        for r in run.records:
            w.writerow([
                r.hour, _fmt(r.objective), _fmt(r.rep_p_da), _fmt(r.rep_p_h),
                _fmt(r.rep_spill), _fmt(r.h2_kg), _fmt(r.lmp_rep_node),
                int(r.pass2),
            ])
    paths.append(path)

    path = out / "dispatch.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "generator", "dispatch_mw", "cost_usd"])
        for r in run.records:
            for g in run.network.generators:
                w.writerow([
                    r.hour, g.id,
                    _fmt(r.outcome.dispatch[g.id]),
                    _fmt(r.outcome.gen_costs[g.id]),
                ])
    paths.append(path)

    path = out / "flows.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "from", "to", "flow_mw"])
        for r in run.records:
            for br, flow in zip(run.network.branches, r.outcome.flows):
                w.writerow([r.hour, br.from_bus, br.to_bus, _fmt(flow)])
    paths.append(path)

    path = out / "lmp.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["hour", "bus", "lmp_usd_per_mwh"])
        for r in run.records:
            for b in run.network.buses:
                w.writerow([r.hour, b.id, _fmt(r.outcome.lmp[b.id])])
    paths.append(path)
    return paths


def _fmt(x: float) -> str:
    return repr(float(x))
