"""Command line interface.

Subcommands: derive-bid-curve, clear-hour, simulate, compare, reduce-net,
convert-rtsgmlc. Every command writes into ``--out`` (created if missing) and
drops a ``manifest.json`` naming its inputs, the package version, and the
config hash. Exit codes: 0 success, 1 bad inputs or validation failure,
2 infeasible market.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import subprocess
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, rtsgmlc
from .bidcurve import RepConfig, derive_bid_curve
from .errors import InfeasibleMarket, RepMarketError
from .h2curve import SampledHydrogenCurve, fit_piecewise_concave
from .metrics import (
    build_report,
    deltas_against,
    merit_order,
    read_report,
    write_merit_order_csv,
    write_report,
)
from .opf import MODES, aggregate_loads, reduce_network
from .report import (
    render_bid_curve_figure,
    render_compare_figure,
    render_run_figures,
)
from .scenario import REPRESENTATIONS, export_scenario, load_scenario
from .sim import hour_network, simulate, simulate_bidder, write_run_csvs


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for infeasible
    # markets here, so route usage problems through the normal error path
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args.handler(args)
        return 0
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except InfeasibleMarket as exc:
        hour = f" (hour {exc.hour})" if exc.hour is not None else ""
        print(f"infeasible market{hour}: {exc}", file=sys.stderr)
        return 2
    except RepMarketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> _Parser:
    parser = _Parser(prog="repmarket", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derive-bid-curve",
                       help="fit an electrolyzer curve and derive one hour's offer")
    p.add_argument("--curve", required=True, help="sampled curve CSV")
    p.add_argument("--price", type=float, required=True, help="$/kg of hydrogen")
    p.add_argument("--res", type=float, required=True, help="available wind MW")
    p.add_argument("--capacity", type=float, help="rescale the plant to this MW")
    p.add_argument("--pieces", type=int, default=4)
    p.add_argument("--breakpoints", help="comma separated MW breakpoints")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_derive)

    p = sub.add_parser("clear-hour", help="clear a single hour and print the outcome")
    _scenario_flags(p)
    p.add_argument("--hour", type=int, default=0)
    p.add_argument("--level", type=float,
                   help="fixed consumption MW (fixed representation only)")
    p.set_defaults(handler=_cmd_clear_hour)

    p = sub.add_parser("simulate", help="run the full horizon and write a report")
    _scenario_flags(p)
    p.add_argument("--hours", type=int, help="simulate only the first N hours")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                   help="parallel hour workers (default: all cores)")
    p.add_argument("--fixed-level", type=float,
                   help="fixed consumption MW; defaults to the bidder average")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("compare", help="delta table between two report directories")
    p.add_argument("baseline", help="report directory of the reference run")
    p.add_argument("other", help="report directory to compare against it")
    p.add_argument("--out", default="out-compare")
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_compare)

    p = sub.add_parser("reduce-net", help="write a zonal or copper-plate scenario")
    _scenario_flags(p, mode_required=True, mode_choices=("zonal", "copper"))
    p.set_defaults(handler=_cmd_reduce)

    p = sub.add_parser("convert-rtsgmlc", help="import an RTS-GMLC style dataset")
    p.add_argument("--src", required=True)
    p.add_argument("--out", default="out-rtsgmlc")
    p.add_argument("--hours", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=_cmd_convert)

    return parser


def _scenario_flags(p, mode_required=False, mode_choices=MODES):
    p.add_argument("--config", required=True, help="scenario YAML")
    p.add_argument("--data", help="directory of the scenario CSVs")
    p.add_argument("--mode", choices=mode_choices, required=mode_required,
                   help="network representation override")
    p.add_argument("--rep", choices=REPRESENTATIONS,
                   help="plant representation override")
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int)


def _load(args):
    scn = load_scenario(args.config, data_dir=args.data)
    if getattr(args, "mode", None) and args.handler is not _cmd_reduce:
        scn = replace(scn, network_mode=args.mode)
    return scn


def _pick_representation(args, scn) -> str:
    if args.rep:
        return args.rep
    if scn.rep is not None:
        return scn.rep.representation
    return "base"


# ---------------------------------------------------------------------------
# command bodies

def _cmd_derive(args):
    sampled = SampledHydrogenCurve.from_csv(args.curve)
    if args.capacity is not None:
        sampled = sampled.scaled(args.capacity)
    if args.breakpoints:
        breakpoints = tuple(float(x) for x in args.breakpoints.split(","))
        ely = fit_piecewise_concave(sampled, breakpoints=breakpoints)
    else:
        ely = fit_piecewise_concave(sampled, pieces=args.pieces)
    bid = derive_bid_curve(RepConfig(ely, args.res, args.price))

    out = _ensure_out(args.out)
    ely.to_csv(out / "fitted_curve.csv")
    bid.to_csv(out / "bid_curve.csv")
    render_bid_curve_figure(bid, out / "bid_curve.png")
    print(f"fitted {ely.n_pieces} pieces over 0..{ely.capacity_mw} MW")
    print("piece  alpha $/MWh      beta $        q_lo MW      q_hi MW")
    for k, pc in enumerate(bid.pieces, start=1):
        print(f"{k:>5}  {pc.alpha:>11.4f}  {pc.beta:>11.2f}  "
              f"{pc.q_lo:>11.2f}  {pc.q_hi:>11.2f}")
    _manifest(out, "derive-bid-curve", args, inputs=[args.curve])


def _cmd_clear_hour(args):
    scn = _load(args)
    representation = _pick_representation(args, scn)
    sliced = scn.hour_slice(args.hour)
    run = simulate(sliced, representation, fixed_level=args.level)
    rec = run.records[0]

    out = _ensure_out(args.out)
    write_run_csvs(run, out)
    print(f"hour {args.hour} ({representation}, {scn.network_mode}): "
          f"objective {rec.outcome.objective:.2f} $")
    print("generator     dispatch MW      cost $")
    for g in run.network.generators:
        print(f"{g.id:<12} {rec.outcome.dispatch[g.id]:>12.3f} "
              f"{rec.outcome.gen_costs[g.id]:>11.2f}")
    print("bus           LMP $/MWh")
    for b in run.network.buses:
        print(f"{b.id:<12} {rec.outcome.lmp[b.id]:>12.4f}")
    if scn.rep is not None:
        print(f"plant: sold {rec.rep_p_da:.3f} MW, electrolyzer {rec.rep_p_h:.3f} MW, "
              f"spill {rec.rep_spill:.3f} MW, {rec.h2_kg:.1f} kg H2"
              + (" (two-pass)" if rec.pass2 else ""))
    _manifest(out, "clear-hour", args, inputs=_scenario_inputs(args))


def _cmd_simulate(args):
    scn = _load(args)
    representation = _pick_representation(args, scn)
    bidder = None
    if representation == "fixed" and args.fixed_level is None:
        # the fixed level is defined by the bidder's average consumption
        bidder = simulate_bidder(scn, hours=args.hours, jobs=args.jobs)
    run = simulate(scn, representation, hours=args.hours, jobs=args.jobs,
                   bidder=bidder, fixed_level=args.fixed_level)

    out = _ensure_out(args.out)
    write_run_csvs(run, out)
    report = build_report(run)
    write_report(report, out / "summary.yaml")
    entries = merit_order(hour_network(run, 0))
    write_merit_order_csv(entries, out / "merit_order.csv")
    render_run_figures(run, out, hour_net=hour_network(run, 0))
    _manifest(out, "simulate", args, inputs=_scenario_inputs(args))

    print(f"{report.label}: {run.scenario.horizon} hours")
    print(f"  generation cost   {report.cost_generation_usd:>14.2f} $")
    print(f"  curtailment       {report.curtailment_mwh:>14.2f} MWh")
    print(f"  emissions         {report.emissions_t:>14.2f} t "
          f"({report.emissions_kg_per_mwh:.2f} kg/MWh)")
    if scn.rep is not None:
        print(f"  hydrogen          {report.h2_output_kg:>14.1f} kg")
        print(f"  plant profit      {report.rep_profit_usd:>14.2f} $")
    if report.pass2_hours:
        print(f"  two-pass hours    {report.pass2_hours:>14d}")


def _cmd_compare(args):
    report_a = read_report(Path(args.baseline) / "summary.yaml")
    report_b = read_report(Path(args.other) / "summary.yaml")
    deltas = deltas_against(report_b, report_a)

    out = _ensure_out(args.out)
    import csv as _csv

    with open(out / "compare.csv", "w", newline="") as fh:
        w = _csv.writer(fh)
        w.writerow(["field", report_a.label, report_b.label, "delta_pct"])
        for name, pct in deltas.items():
            w.writerow([name, repr(getattr(report_a, name)),
                        repr(getattr(report_b, name)), repr(pct)])
    render_compare_figure(report_a, report_b, out)
    _manifest(out, "compare", args,
              inputs=[str(Path(args.baseline) / "summary.yaml"),
                      str(Path(args.other) / "summary.yaml")])

    print(f"{report_b.label} vs {report_a.label}")
    for name, pct in deltas.items():
        print(f"  {name:<24} {getattr(report_a, name):>14.2f} -> "
              f"{getattr(report_b, name):>14.2f}  ({pct:+.2f}%)")


def _cmd_reduce(args):
    scn = _load(args)
    reduced = reduce_network(scn.network, args.mode)
    loads = tuple(aggregate_loads(reduced, table) for table in scn.loads)
    out_scn = replace(scn, network=reduced, loads=loads, network_mode="nodal")
    out = _ensure_out(args.out)
    export_scenario(out_scn, out)
    _manifest(out, "reduce-net", args, inputs=_scenario_inputs(args))
    print(f"wrote {args.mode} scenario with {len(reduced.buses)} buses, "
          f"{len(reduced.branches)} branches to {out}")


def _cmd_convert(args):
    scn = rtsgmlc.convert(args.src, hours=args.hours)
    out = _ensure_out(args.out)
    export_scenario(scn, out)
    _manifest(out, "convert-rtsgmlc", args, inputs=[args.src])
    print(f"converted {len(scn.network.buses)} buses, "
          f"{len(scn.network.generators)} generators, {scn.horizon} hours to {out}")


# ---------------------------------------------------------------------------
# plumbing

def _ensure_out(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario_inputs(args) -> list:
    inputs = [args.config]
    if args.data:
        inputs.append(args.data)
    return inputs


def _sha256(path: Path):
    try:
        return hashlib.sha256(path.read_bytes()).hexdigest()
    except OSError:
        return None


def _git_describe():
    try:
        res = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True, text=True, timeout=5,
        )
        return res.stdout.strip() or None
    except OSError:
        return None


def _manifest(out: Path, command: str, args, inputs):
    config = getattr(args, "config", None)
    manifest = {
        "command": command,
        "package_version": __version__,
        "vcs": _git_describe(),
        "created_at": datetime.now(timezone.utc).isoformat(),
        "seed": getattr(args, "seed", None),
        "inputs": [str(p) for p in inputs],
        "config_sha256": _sha256(Path(config)) if config else None,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))


if __name__ == "__main__":
    sys.exit(main())
