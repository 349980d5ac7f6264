"""Figure rendering for run and comparison reports.

Everything draws through the Agg backend straight to files; nothing here
opens a window. The numbers plotted are the ones already serialized by the
metrics layer, so figures are a view, never a second computation.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import adjusted_net_demand_range, merit_order
from .sim import RunResult

FIG_DPI = 120


def render_run_figures(run: RunResult, out_dir, hour_net=None) -> list:
    """Standard figure set for one run; returns the written paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [
        _fig_plant_operation(run, out / "plant_operation.png"),
        _fig_lmp(run, out / "lmp_rep_node.png"),
    ]
    if hour_net is not None:
        paths.append(
            _fig_merit_order(
                merit_order(hour_net),
                adjusted_net_demand_range(run),
                out / "merit_order.png",
            )
        )
    return paths


def _fig_plant_operation(run: RunResult, path) -> Path:
    hours = [r.hour for r in run.records]
    scn = run.scenario
    avail = None
    if scn.rep is not None:
        avail = [
            float(scn.res_availability[h][scn.rep.wind_generator]) for h in hours
        ]
    fig, ax = plt.subplots(figsize=(9, 4))
    if avail is not None:
        ax.plot(hours, avail, color="0.7", lw=1.0, label="wind available")
    ax.plot(hours, [r.rep_p_da for r in run.records], lw=1.2, label="sold")
    ax.plot(hours, [r.rep_p_h for r in run.records], lw=1.2, label="to electrolyzer")
    ax.plot(hours, [r.rep_spill for r in run.records], lw=1.0, label="spilled")
    ax.set_xlabel("hour")
    ax.set_ylabel("MW")
    ax.set_title(f"plant operation ({run.representation}, {scn.network_mode})")
    ax.legend(loc="upper right", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def _fig_lmp(run: RunResult, path) -> Path:
    hours = [r.hour for r in run.records]
    fig, ax = plt.subplots(figsize=(9, 3.2))
    ax.step(hours, [r.lmp_rep_node for r in run.records], where="mid", lw=1.2)
    ax.set_xlabel("hour")
    ax.set_ylabel("$/MWh")
    ax.set_title(f"price at the plant node ({run.representation})")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def _fig_merit_order(entries, demand_range, path) -> Path:
    xs, ys = [0.0], [entries[0].alpha if entries else 0.0]
    total = 0.0
    for e in entries:
        xs += [total, total + e.width_mw]
        ys += [e.alpha, e.alpha]
        total += e.width_mw
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(xs, ys, lw=1.4)
    lo, hi = demand_range
    ax.axvspan(lo, hi, color="tab:orange", alpha=0.2,
               label="adjusted net demand range")
    ax.set_xlabel("cumulative offer (MW)")
    ax.set_ylabel("$/MWh")
    ax.set_title("supply stack, first simulated hour")
    ax.legend(loc="upper left", fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def render_compare_figure(report_a, report_b, out_dir) -> Path:
    """Side-by-side totals for the headline metrics of two reports."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fields = [
        ("cost_generation_usd", "generation cost ($)"),
        ("curtailment_mwh", "curtailment (MWh)"),
        ("emissions_t", "emissions (t)"),
        ("h2_output_kg", "hydrogen (kg)"),
    ]
    fig, axes = plt.subplots(1, len(fields), figsize=(3.2 * len(fields), 3.4))
    for ax, (name, title) in zip(axes, fields):
        values = [getattr(report_a, name), getattr(report_b, name)]
        ax.bar([report_a.label, report_b.label], values,
               color=["tab:blue", "tab:orange"])
        ax.set_title(title, fontsize=9)
        ax.tick_params(axis="x", labelrotation=20, labelsize=8)
        ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    path = out / "compare.png"
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
    return path


def render_bid_curve_figure(bid, out_path) -> Path:
    """Offer cost and its marginal price steps."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    for pc in bid.pieces:
        ax1.plot([pc.q_lo, pc.q_hi],
                 [pc.alpha * pc.q_lo + pc.beta, pc.alpha * pc.q_hi + pc.beta],
                 color="tab:blue", lw=1.4)
        ax2.plot([pc.q_lo, pc.q_hi], [pc.alpha, pc.alpha],
                 color="tab:blue", lw=1.6)
    ax1.set_xlabel("quantity sold (MW)")
    ax1.set_ylabel("offer cost ($)")
    ax1.grid(alpha=0.3)
    ax2.set_xlabel("quantity sold (MW)")
    ax2.set_ylabel("marginal cost ($/MWh)")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, dpi=FIG_DPI)
    plt.close(fig)
    return Path(out_path)
