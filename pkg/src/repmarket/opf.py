"""Network model, DC optimal power flow, and network reductions.

Market clearing is a single LP per hour:

    min   sum_g c_g
    s.t.  c_g >= alpha_{gk} p_g + beta_{gk}          (offer epigraph)
          sum_{g at n} p_g - net outflow(n) = load_n (balance, dual = LMP)
          |theta_f - theta_t| / x_ft * S_base <= limit_ft
          p_min_g <= p_g <= p_max_g, theta_ref = 0

Variables are ordered [c_1..c_G, p_1..p_G, theta_1..theta_N]; equality rows
are the bus balances in bus order followed by the reference-angle row. Tests
rely on this layout, so treat it as part of the module contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional

import numpy as np

from .errors import InfeasibleMarket, ModelError, NumericalFailure, ValidationError
from .lpcore import LinearProgram, LpStatus, solve_lp

BASE_MVA = 100.0

MODES = ("nodal", "zonal", "copper")

COPPER_BUS = "system"


@dataclass(frozen=True)
class Bus:
    id: str
    region: str = ""


@dataclass(frozen=True)
class Branch:
    from_bus: str
    to_bus: str
    x_pu: float
    limit_mw: float

    @property
    def name(self) -> str:
        return f"{self.from_bus}-{self.to_bus}"

    @property
    def susceptance_mw(self) -> float:
        """MW transferred per radian of angle difference."""
        return BASE_MVA / self.x_pu


@dataclass(frozen=True)
class Generator:
    """Dispatchable unit with convex offer cost max_k(alpha_k p + beta_k)."""

    id: str
    bus: str
    fuel: str
    p_min_mw: float
    p_max_mw: float
    pieces: tuple  # ((alpha, beta), ...)

    def __post_init__(self):
        if not self.pieces:
            raise ModelError(f"generator {self.id} has no cost pieces")
        for alpha, beta in self.pieces:
            if not (math.isfinite(alpha) and math.isfinite(beta)):
                raise ModelError(f"generator {self.id} has non-finite cost data")
        if not (math.isfinite(self.p_min_mw) and math.isfinite(self.p_max_mw)):
            raise ModelError(f"generator {self.id} has non-finite limits")
        if self.p_min_mw > self.p_max_mw:
            raise ModelError(
                f"generator {self.id}: p_min {self.p_min_mw} > p_max {self.p_max_mw}"
            )

    def cost(self, p: float) -> float:
        """Offer cost at output p, the upper envelope of the pieces."""
        return max(alpha * p + beta for alpha, beta in self.pieces)


@dataclass(frozen=True)
class NetworkModel:
    buses: tuple
    branches: tuple
    generators: tuple
    reference_bus: str
    bus_map: Optional[Mapping[str, str]] = None  # original bus -> bus here

    def __post_init__(self):
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate bus ids")
        if not ids:
            raise ModelError("network has no buses")
        known = set(ids)
        gids = [g.id for g in self.generators]
        if len(set(gids)) != len(gids):
            raise ModelError("duplicate generator ids")
        problems = []
        for br in self.branches:
            if br.from_bus not in known or br.to_bus not in known:
                problems.append(f"branch {br.name} references unknown bus")
            if not br.x_pu > 0:
                problems.append(f"branch {br.name} needs x_pu > 0, got {br.x_pu}")
            if not br.limit_mw > 0:
                problems.append(f"branch {br.name} needs limit > 0, got {br.limit_mw}")
        for g in self.generators:
            if g.bus not in known:
                problems.append(f"generator {g.id} sits on unknown bus {g.bus}")
        if self.reference_bus not in known:
            problems.append(f"reference bus {self.reference_bus} not in network")
        if problems:
            raise ModelError("; ".join(problems))
        unreachable = self._unreachable()
        if unreachable:
            raise ModelError(f"buses not connected to the grid: {sorted(unreachable)}")

    def _unreachable(self):
        adj = {b.id: set() for b in self.buses}
        for br in self.branches:
            adj[br.from_bus].add(br.to_bus)
            adj[br.to_bus].add(br.from_bus)
        seen = {self.buses[0].id}
        stack = [self.buses[0].id]
        while stack:
            for nxt in adj[stack.pop()]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return {b.id for b in self.buses} - seen

    def bus_ids(self):
        return [b.id for b in self.buses]

    def map_bus(self, original_id: str) -> str:
        """Bus in this model that an original-network bus id lands on."""
        if self.bus_map is None:
            return original_id
        try:
            return self.bus_map[original_id]
        except KeyError:
            raise ModelError(f"bus {original_id} unknown to this reduction") from None

    def generator(self, gen_id: str) -> Generator:
        for g in self.generators:
            if g.id == gen_id:
                return g
        raise ModelError(f"no generator named {gen_id}")

    def with_generators(self, generators) -> "NetworkModel":
        return replace(self, generators=tuple(generators))


@dataclass
class MarketOutcome:
    """Cleared hour: dispatch and prices keyed by id, flows by branch order."""

    dispatch: dict
    gen_costs: dict
    lmp: dict
    angles: dict
    flows: tuple
    objective: float


def build_dcopf(net: NetworkModel, loads: Mapping[str, float]) -> LinearProgram:
    """Assemble the clearing LP for one hour (loads keyed by bus id)."""
    lp, _ = _build(net, loads)
    return lp


def _build(net: NetworkModel, loads: Mapping[str, float]):
    for bus in loads:
        if bus not in set(net.bus_ids()):
            raise ModelError(f"load at unknown bus {bus}")
    n_gen = len(net.generators)
    n_bus = len(net.buses)
    n = 2 * n_gen + n_bus
    bus_pos = {b.id: i for i, b in enumerate(net.buses)}
    c_of = lambda g: g
    p_of = lambda g: n_gen + g
    th_of = lambda b: 2 * n_gen + b

    obj = np.zeros(n)
    obj[:n_gen] = 1.0
    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    for gi, g in enumerate(net.generators):
        lower[p_of(gi)] = g.p_min_mw
        upper[p_of(gi)] = g.p_max_mw

    a_ub, b_ub = [], []
    for gi, g in enumerate(net.generators):
        for alpha, beta in g.pieces:
            row = np.zeros(n)
            row[p_of(gi)] = alpha
            row[c_of(gi)] = -1.0
            a_ub.append(row)
            b_ub.append(-beta)
    flow_rows = []  # (branch index, sign) per a_ub row appended below
    for bi, br in enumerate(net.branches):
        if not math.isfinite(br.limit_mw):
            continue
        s = br.susceptance_mw
        for sign in (1.0, -1.0):
            row = np.zeros(n)
            row[th_of(bus_pos[br.from_bus])] = sign * s
            row[th_of(bus_pos[br.to_bus])] = -sign * s
            a_ub.append(row)
            b_ub.append(br.limit_mw)
            flow_rows.append((bi, sign))

    a_eq, b_eq = [], []
    for b in net.buses:
        row = np.zeros(n)
        for gi, g in enumerate(net.generators):
            if g.bus == b.id:
                row[p_of(gi)] = 1.0
        for br in net.branches:
            s = br.susceptance_mw
            if br.from_bus == b.id:
                row[th_of(bus_pos[br.from_bus])] -= s
                row[th_of(bus_pos[br.to_bus])] += s
            elif br.to_bus == b.id:
                row[th_of(bus_pos[br.from_bus])] += s
                row[th_of(bus_pos[br.to_bus])] -= s
        a_eq.append(row)
        b_eq.append(float(loads.get(b.id, 0.0)))
    ref_row = np.zeros(n)
    ref_row[th_of(bus_pos[net.reference_bus])] = 1.0
    a_eq.append(ref_row)
    b_eq.append(0.0)

    lp = LinearProgram(
        objective=obj,
        lower=lower,
        upper=upper,
        a_eq=np.array(a_eq),
        b_eq=np.array(b_eq),
        a_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
    )
    layout = {"bus_pos": bus_pos, "n_gen": n_gen, "flow_rows": flow_rows}
    return lp, layout


def clear_market(net: NetworkModel, loads: Mapping[str, float]) -> MarketOutcome:
    """Clear one hour; prices are the balance-row duals.

    Raises
    ------
    InfeasibleMarket
        If no dispatch satisfies the balance and flow constraints.
    """
    lp, layout = _build(net, loads)
    sol = solve_lp(lp)
    if sol.status is LpStatus.INFEASIBLE:
        total = sum(loads.values())
        raise InfeasibleMarket(f"no feasible dispatch for {total} MW of load")
    if sol.status is LpStatus.UNBOUNDED:
        raise ModelError("clearing problem is unbounded; check offer costs")

    n_gen = layout["n_gen"]
    x = sol.x
    dispatch, gen_costs = {}, {}
    for gi, g in enumerate(net.generators):
        p = float(x[n_gen + gi])
        dispatch[g.id] = p
        # recompute from the pieces; the LP epigraph value matches at any
        # optimum but carries solver dust
        gen_costs[g.id] = g.cost(p)
        if abs(gen_costs[g.id] - float(x[gi])) > 1e-5 * max(1.0, abs(gen_costs[g.id])):
            raise NumericalFailure(
                f"epigraph value for {g.id} disagrees with its offer cost"
            )
    angles = {
        b.id: float(x[2 * n_gen + i]) for i, b in enumerate(net.buses)
    }
    flows = tuple(
        br.susceptance_mw * (angles[br.from_bus] - angles[br.to_bus])
        for br in net.branches
    )
    for br, f in zip(net.branches, flows):
        if abs(f) > br.limit_mw * (1 + 1e-6) + 1e-6:
            raise NumericalFailure(f"flow {f} exceeds limit on {br.name}")
    lmp = {
        b.id: float(sol.equality_duals[i]) for i, b in enumerate(net.buses)
    }
    return MarketOutcome(
        dispatch=dispatch,
        gen_costs=gen_costs,
        lmp=lmp,
        angles=angles,
        flows=flows,
        objective=float(sol.objective_value),
    )


def reduce_network(net: NetworkModel, mode: str) -> NetworkModel:
    """Nodal (identity), zonal (one bus per region), or copper (single bus).

    Zonal inter-region transfer limits are the sums of the crossing branch
    limits, with unit reactance on each equivalent branch; intra-region
    branches vanish. The returned model's ``bus_map`` sends original bus ids
    to their reduced bus so loads and plant sites can be re-homed.
    """
    if mode not in MODES:
        raise ValidationError(f"unknown network mode {mode!r}; pick one of {MODES}")
    if mode == "nodal":
        return net
    if mode == "copper":
        bus_map = {b.id: COPPER_BUS for b in net.buses}
        return NetworkModel(
            buses=(Bus(id=COPPER_BUS, region=COPPER_BUS),),
            branches=(),
            generators=tuple(replace(g, bus=COPPER_BUS) for g in net.generators),
            reference_bus=COPPER_BUS,
            bus_map=bus_map,
        )

    regions = []
    for b in net.buses:
        if not b.region:
            raise ModelError(f"bus {b.id} has no region; zonal reduction needs one")
        if b.region not in regions:
            regions.append(b.region)
    region_of = {b.id: b.region for b in net.buses}
    order = {r: i for i, r in enumerate(regions)}

    caps = {}
    for br in net.branches:
        ra, rb = region_of[br.from_bus], region_of[br.to_bus]
        if ra == rb:
            continue
        key = (ra, rb) if order[ra] < order[rb] else (rb, ra)
        caps[key] = caps.get(key, 0.0) + br.limit_mw
    branches = tuple(
        Branch(from_bus=a, to_bus=b, x_pu=1.0, limit_mw=caps[(a, b)])
        for a, b in sorted(caps, key=lambda k: (order[k[0]], order[k[1]]))
    )
    return NetworkModel(
        buses=tuple(Bus(id=r, region=r) for r in regions),
        branches=branches,
        generators=tuple(replace(g, bus=region_of[g.bus]) for g in net.generators),
        reference_bus=region_of[net.reference_bus],
        bus_map=dict(region_of),
    )


def aggregate_loads(net: NetworkModel, loads: Mapping[str, float]) -> dict:
    """Re-home an original-network load table onto a (possibly reduced) model."""
    out = {}
    for bus, mw in loads.items():
        out[net.map_bus(bus)] = out.get(net.map_bus(bus), 0.0) + float(mw)
    return out
