"""Run-level metrics: costs, curtailment, emissions, plant profit, merit order.

Everything here reduces a finished RunResult to numbers; nothing clears
markets or plots. Figures are rendered elsewhere from the CSVs and report
files emitted here.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .errors import MissingFactor, ParseError, ValidationError
from .opf import NetworkModel
from .sim import RunResult

# fields compared against a baseline, as percentage changes
DELTA_FIELDS = (
    "cost_generation_usd",
    "curtailment_mwh",
    "emissions_t",
    "emissions_kg_per_mwh",
    "served_load_mwh",
    "h2_output_kg",
    "rep_profit_usd",
)


@dataclass
class SimulationReport:
    """Horizon totals for one run; the on-disk report is this, verbatim."""

    label: str
    representation: str
    network_mode: str
    horizon: int
    hydrogen_price_usd_per_kg: float
    fixed_level_mw: Optional[float]
    objective_usd: float
    cost_generation_usd: float
    cost_per_load_usd_per_mwh: float
    curtailment_mwh: float
    emissions_t: float
    emissions_kg_per_mwh: float
    served_load_mwh: float
    rep_energy_sold_mwh: float
    rep_consumption_mwh: float
    rep_avg_consumption_mw: float
    rep_spill_mwh: float
    h2_output_kg: float
    rep_profit_usd: float
    avg_lmp_rep_usd_per_mwh: float
    pass2_hours: int
    deltas_pct: dict = field(default_factory=dict)


def build_report(run: RunResult, baseline: Optional[SimulationReport] = None,
                 label: Optional[str] = None) -> SimulationReport:
    scn = run.scenario
    recs = run.records
    n = len(recs)
    price = 0.0 if scn.rep is None else scn.rep.hydrogen_price
    cost = cost_of_generation(run)
    load = served_load(run)
    report = SimulationReport(
        label=label or f"{run.representation}-{scn.network_mode}",
        representation=run.representation,
        network_mode=scn.network_mode,
        horizon=scn.horizon,
        hydrogen_price_usd_per_kg=float(price),
        fixed_level_mw=run.fixed_level,
        objective_usd=sum(r.objective for r in recs),
        cost_generation_usd=cost,
        cost_per_load_usd_per_mwh=0.0 if load <= 0 else cost / load,
        curtailment_mwh=curtailment(run),
        emissions_t=0.0,
        emissions_kg_per_mwh=0.0,
        served_load_mwh=load,
        rep_energy_sold_mwh=sum(r.rep_p_da for r in recs),
        rep_consumption_mwh=sum(r.rep_p_h for r in recs),
        rep_avg_consumption_mw=sum(r.rep_p_h for r in recs) / n,
        rep_spill_mwh=sum(r.rep_spill for r in recs),
        h2_output_kg=sum(r.h2_kg for r in recs),
        rep_profit_usd=rep_profit(run),
        avg_lmp_rep_usd_per_mwh=sum(r.lmp_rep_node for r in recs) / n,
        pass2_hours=sum(1 for r in recs if r.pass2),
    )
    report.emissions_t, report.emissions_kg_per_mwh = emissions(run)
    if baseline is not None:
        report.deltas_pct = deltas_against(report, baseline)
    return report


def cost_of_generation(run: RunResult) -> float:
    """Total cost of dispatched generation, excluding the plant's own offer.

    The plant's cleared offer cost is an opportunity cost internal to the
    plant, not money paid for producing energy, so it never counts here. Its
    wind offer in the base and fixed representations is free anyway.
    """
    rep_id = _rep_id(run)
    total = 0.0
    for r in run.records:
        total += sum(c for g, c in r.outcome.gen_costs.items() if g != rep_id)
    return total


def curtailment(run: RunResult) -> float:
    """Renewable energy made available but not used, in MWh.

    For plant representations with an internal dispatch decision the plant
    wind is accounted by its recorded spill rather than by market dispatch,
    which already includes energy routed into the electrolyzer.
    """
    rep_id = _rep_id(run)
    plant_internal = run.representation in ("bidder", "fixed") and rep_id is not None
    total = 0.0
    for r in run.records:
        avail = run.scenario.res_availability[r.hour]
        for gid, a in avail.items():
            if plant_internal and gid == rep_id:
                continue
            total += max(0.0, float(a) - r.outcome.dispatch[gid])
        if plant_internal:
            total += r.rep_spill
    return total


def served_load(run: RunResult) -> float:
    """Scenario load plus any power the plant imported from the grid."""
    total = 0.0
    for r in run.records:
        total += sum(run.scenario.loads[r.hour].values())
        total += max(0.0, -r.rep_p_da)
    return total


def emissions(run: RunResult) -> tuple:
    """(total metric tons CO2, kg CO2 per MWh of served load)."""
    factors = run.scenario.emission_factors
    fuel_of = {g.id: g.fuel for g in run.network.generators}
    total = 0.0
    for r in run.records:
        for gid, p in r.outcome.dispatch.items():
            if abs(p) < 1e-9:
                continue
            fuel = fuel_of[gid]
            if fuel not in factors:
                raise MissingFactor(
                    f"no emission factor for fuel {fuel!r} (generator {gid})"
                )
            total += p * factors[fuel]
    load = served_load(run)
    per_mwh = 0.0 if load <= 0 else 1000.0 * total / load
    return total, per_mwh


def rep_profit(run: RunResult) -> float:
    """Market revenue at the plant node plus hydrogen sales."""
    scn = run.scenario
    return sum(
        r.lmp_rep_node * r.rep_p_da + scn.hydrogen_price * r.h2_kg
        for r in run.records
    )


def adjusted_net_demand(run: RunResult, hour: int) -> float:
    """System load shifted so an installed-capacity merit order can price it.

    Renewables offered below their installed capability displace load; adding
    back the installed capacity expresses the hour as a position on the
    full-fleet supply curve.
    """
    scn = run.scenario
    installed = {
        g.id: g.p_max_mw for g in scn.network.generators
        if g.id in scn.res_availability[hour]
    }
    load = sum(scn.loads[hour].values())
    avail = sum(float(a) for a in scn.res_availability[hour].values())
    return load - avail + sum(installed.values())


def adjusted_net_demand_range(run: RunResult) -> tuple:
    values = [adjusted_net_demand(run, h) for h in range(run.scenario.horizon)]
    return min(values), max(values)


def _rep_id(run: RunResult):
    return None if run.scenario.rep is None else run.scenario.rep.wind_generator


# ---------------------------------------------------------------------------
# merit order

@dataclass(frozen=True)
class MeritEntry:
    rank: int
    generator: str
    alpha: float
    width_mw: float
    piece: int  # 1-based index into the generator's offer


def merit_order(net: NetworkModel) -> list:
    """Supply stack of the network's offers, cheapest first.

    Each generator contributes one segment per offer piece; a piece's width
    is the stretch of [max(0, p_min), p_max] where that piece is the active
    (largest) one, so dominated pieces get zero width and are dropped. Ties
    in price are broken by generator id, then piece order.
    """
    segments = []
    for g in net.generators:
        lo, hi = max(0.0, g.p_min_mw), g.p_max_mw
        if hi <= lo:
            continue
        for k, (alpha, beta) in enumerate(g.pieces):
            seg_lo, seg_hi = lo, hi
            dead = False
            for m, (a2, b2) in enumerate(g.pieces):
                if m == k:
                    continue
                if abs(a2 - alpha) < 1e-12:
                    # parallel piece: the higher one wins everywhere
                    if b2 > beta or (b2 == beta and m < k):
                        dead = True
                        break
                elif a2 > alpha:
                    seg_hi = min(seg_hi, (beta - b2) / (a2 - alpha))
                else:
                    seg_lo = max(seg_lo, (b2 - beta) / (alpha - a2))
            width = 0.0 if dead else seg_hi - seg_lo
            if width > 1e-9:
                segments.append((float(alpha), g.id, k + 1, float(width)))
    segments.sort(key=lambda s: (s[0], s[1], s[2]))
    return [
        MeritEntry(rank=i + 1, generator=gid, alpha=alpha, width_mw=width, piece=k)
        for i, (alpha, gid, k, width) in enumerate(segments)
    ]


def write_merit_order_csv(entries, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rank", "generator", "alpha_usd_per_mwh", "width_mw"])
        for e in entries:
            w.writerow([e.rank, e.generator, repr(e.alpha), repr(e.width_mw)])


# ---------------------------------------------------------------------------
# report files

def deltas_against(report: SimulationReport, baseline: SimulationReport) -> dict:
    """Percentage changes of the comparable totals, keyed by field name."""
    out = {}
    for name in DELTA_FIELDS:
        ours = getattr(report, name)
        theirs = getattr(baseline, name)
        if abs(theirs) > 1e-12:
            out[name] = 100.0 * (ours - theirs) / abs(theirs)
        elif abs(ours) > 1e-12:
            out[name] = float("inf") if ours > 0 else float("-inf")
        else:
            out[name] = 0.0
    return out


def write_report(report: SimulationReport, path) -> None:
    data = asdict(report)
    Path(path).write_text(yaml.safe_dump(data, sort_keys=True))


def read_report(path) -> SimulationReport:
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: report must be a mapping")
    try:
        return SimulationReport(**data)
    except TypeError as exc:
        raise ValidationError(f"{path}: {exc}") from exc
