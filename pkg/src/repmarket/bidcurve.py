"""Opportunity-cost bid curves for a renewable-electrolyzer plant.

A plant with on-site renewable output ``P_res`` and an electrolyzer of
capacity ``cap`` can sell any quantity q of power to the market. Selling q
means the electrolyzer runs at ``P_res - q`` (negative q is a purchase), so
the cost of selling is the hydrogen revenue given up:

    c(q) = r(P_res) - r(P_res - q),   r(p) = price * h(min(p, cap))

With a concave piecewise-linear h, c is convex piecewise-linear and can be
written down in closed form piece by piece; ``derive_bid_curve`` does exactly
that and ``opportunity_cost_exact`` is the direct-from-definition reference the
closed form is tested against.

Quantity domain: [P_res - cap, P_res] while P_res <= cap (the plant may buy
up to its spare electrolyzer headroom), else [0, P_res] (a plant already
saturating the electrolyzer never buys).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, ValidationError
from .h2curve import DOMAIN_TOL, PiecewiseConcaveCurve, _check_domain, _read_csv


@dataclass(frozen=True)
class RepConfig:
    """One hour of renewable-electrolyzer plant state.

    ``electrolyzer=None`` models a plant without (or with a fully derated)
    electrolyzer; its bid curve is a single zero-cost piece.
    """

    electrolyzer: Optional[PiecewiseConcaveCurve]
    res_available_mw: float
    hydrogen_price: float  # $/kg
    node: str = ""

    def __post_init__(self):
        if not math.isfinite(self.res_available_mw) or self.res_available_mw < 0:
            raise ValidationError(
                f"renewable availability must be >= 0, got {self.res_available_mw}"
            )
        if not math.isfinite(self.hydrogen_price) or self.hydrogen_price < 0:
            raise ValidationError(
                f"hydrogen price must be >= 0, got {self.hydrogen_price}"
            )

    @property
    def electrolyzer_capacity_mw(self) -> float:
        return 0.0 if self.electrolyzer is None else self.electrolyzer.capacity_mw


@dataclass(frozen=True)
class BidPiece:
    """Affine cost piece c(q) = alpha * q + beta on [q_lo, q_hi]."""

    alpha: float  # $/MWh
    beta: float   # $
    q_lo: float   # MW
    q_hi: float   # MW


@dataclass(frozen=True)
class BidCurve:
    """Convex piecewise-linear offer cost, contiguous pieces in ascending q."""

    pieces: tuple

    def __post_init__(self):
        if not self.pieces:
            raise ValidationError("bid curve needs at least one piece")
        prev = None
        for k, pc in enumerate(self.pieces):
            for v in (pc.alpha, pc.beta, pc.q_lo, pc.q_hi):
                if not math.isfinite(v):
                    raise ValidationError(f"piece {k + 1} has non-finite data")
            if pc.q_hi < pc.q_lo:
                raise ValidationError(f"piece {k + 1} has negative width")
            if prev is not None:
                scale = max(1.0, abs(pc.q_lo))
                if abs(pc.q_lo - prev.q_hi) > 1e-9 * scale:
                    raise ValidationError(
                        f"gap between pieces {k} and {k + 1}: "
                        f"{prev.q_hi} vs {pc.q_lo}"
                    )
                if pc.alpha < prev.alpha - 1e-9 * max(1.0, abs(prev.alpha)):
                    raise ValidationError(
                        f"marginal cost decreases from piece {k} to {k + 1} "
                        f"({prev.alpha} -> {pc.alpha})"
                    )
                left = prev.alpha * pc.q_lo + prev.beta
                right = pc.alpha * pc.q_lo + pc.beta
                if abs(left - right) > 1e-6 * max(1.0, abs(left)):
                    raise ValidationError(
                        f"cost discontinuity at q={pc.q_lo}: {left} vs {right}"
                    )
            prev = pc
        if self.q_min <= 0.0 <= self.q_max:
            at_zero = self.value(0.0)
            if abs(at_zero) > 1e-6 * max(1.0, abs(self.pieces[-1].beta)):
                raise ValidationError(f"cost at q=0 must be 0, got {at_zero}")

    @property
    def q_min(self) -> float:
        return float(self.pieces[0].q_lo)

    @property
    def q_max(self) -> float:
        return float(self.pieces[-1].q_hi)

    def value(self, q: float) -> float:
        """Offer cost at quantity q; raises DomainError outside the domain."""
        q = _check_domain(q, self.q_min, self.q_max)
        pc = self.pieces[self._index(q)]
        return float(pc.alpha * q + pc.beta)

    def _index(self, q: float) -> int:
        bounds = [pc.q_lo for pc in self.pieces]
        i = int(np.searchsorted(bounds, q, side="right")) - 1
        return min(max(i, 0), len(self.pieces) - 1)

    def subgradient(self, q: float, tol: float = 1e-6):
        """Interval of marginal costs supported at q.

        Interior points return (alpha, alpha); points within ``tol`` of a
        piece boundary return the bracketing slopes; the domain ends are open
        outward (-inf below q_min, +inf above q_max), matching the fact that
        the plant cannot move past them.
        """
        q = _check_domain(q, self.q_min, self.q_max)
        lo, hi = None, None
        for pc in self.pieces:
            if pc.q_lo - tol <= q <= pc.q_hi + tol:
                lo = pc.alpha if lo is None else min(lo, pc.alpha)
                hi = pc.alpha if hi is None else max(hi, pc.alpha)
        if q <= self.q_min + tol:
            lo = -math.inf
        if q >= self.q_max - tol:
            hi = math.inf
        return (lo, hi)

    @classmethod
    def from_csv(cls, path) -> "BidCurve":
        rows = _read_csv(
            path, ["piece", "alpha_usd_per_mwh", "beta_usd", "q_lo_mw", "q_hi_mw"]
        )
        rows.sort(key=lambda r: r[0])
        return cls(pieces=tuple(BidPiece(r[1], r[2], r[3], r[4]) for r in rows))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["piece", "alpha_usd_per_mwh", "beta_usd", "q_lo_mw", "q_hi_mw"])
            for k, pc in enumerate(self.pieces, start=1):
                w.writerow([
                    k,
                    repr(float(pc.alpha)),
                    repr(float(pc.beta)),
                    repr(float(pc.q_lo)),
                    repr(float(pc.q_hi)),
                ])


def hydrogen_revenue(electrolyzer: Optional[PiecewiseConcaveCurve],
                     price: float, power_mw: float) -> float:
    """Hydrogen revenue rate ($/h) when ``power_mw`` is offered to the stack.

    Power beyond the electrolyzer capacity earns nothing extra (the stack
    saturates); negative power is a domain violation.
    """
    p = float(power_mw)
    if p < -DOMAIN_TOL:
        raise DomainError(f"power into the electrolyzer must be >= 0, got {p}")
    if electrolyzer is None:
        return 0.0
    p = min(max(p, 0.0), electrolyzer.capacity_mw)
    return price * electrolyzer.value(p)


def quantity_domain(cfg: RepConfig):
    """(q_min, q_max) of the plant's offer per the saturation rule."""
    res, cap = cfg.res_available_mw, cfg.electrolyzer_capacity_mw
    if res <= cap:
        return res - cap, res
    return 0.0, res


def opportunity_cost_exact(cfg: RepConfig, q: float) -> float:
    """Offer cost straight from the definition, used as reference."""
    q_min, q_max = quantity_domain(cfg)
    q = _check_domain(q, q_min, q_max)
    full = hydrogen_revenue(cfg.electrolyzer, cfg.hydrogen_price, cfg.res_available_mw)
    rest = hydrogen_revenue(cfg.electrolyzer, cfg.hydrogen_price,
                            cfg.res_available_mw - q)
    return full - rest


def derive_bid_curve(cfg: RepConfig) -> BidCurve:
    """Closed-form piecewise-linear offer curve of the plant.

    Reflects the hydrogen curve pieces about the available renewable output:
    hydrogen piece (A_i, B_i) on power interval [lo_i, hi_i] becomes offer
    piece

        alpha_i = price * A_i
        beta_i  = price * ((A_j - A_i) * P_res + (B_j - B_i))

    on quantity interval [P_res - hi_i, P_res - lo_i], where j is the piece
    containing P_res itself. When P_res exceeds the electrolyzer capacity a
    synthetic zero-slope piece covers the saturated range [0, P_res - cap]:
    that energy has no hydrogen value, so selling it costs nothing.
    """
    res = cfg.res_available_mw
    lam = cfg.hydrogen_price
    ely = cfg.electrolyzer

    if ely is None:
        return BidCurve(pieces=(BidPiece(0.0, 0.0, 0.0, res),))

    cap = ely.capacity_mw
    # hydrogen pieces as (A, B, p_lo, p_hi), plus the saturated piece if needed
    pieces = [
        (float(ely.slopes[i]), float(ely.intercepts[i]),
         float(ely.breakpoints[i]), float(ely.breakpoints[i + 1]))
        for i in range(ely.n_pieces)
    ]
    if res > cap:
        pieces.append((0.0, ely.value(cap), cap, res))

    # piece containing P_res, lower index preferred at shared boundaries
    j = next(k for k, (_, _, lo, hi) in enumerate(pieces) if lo <= res <= hi)
    a_j, b_j = pieces[j][0], pieces[j][1]

    out = []
    for a, b, lo, hi in reversed(pieces):
        q_lo, q_hi = res - hi, res - lo
        if q_hi - q_lo <= 0.0:
            continue
        alpha = lam * a
        beta = lam * ((a_j - a) * res + (b_j - b))
        out.append(BidPiece(alpha, beta, q_lo, q_hi))
    if not out:  # res = 0 with a zero-capacity stack
        out.append(BidPiece(0.0, 0.0, 0.0, 0.0))
    return BidCurve(pieces=tuple(out))


def marginal_cost_at(bid: BidCurve, q: float) -> float:
    """Slope of the offer at q; interior boundaries take the right piece."""
    q = _check_domain(q, bid.q_min, bid.q_max)
    bounds = [pc.q_lo for pc in bid.pieces]
    i = int(np.searchsorted(bounds, q, side="right")) - 1
    return float(bid.pieces[min(max(i, 0), len(bid.pieces) - 1)].alpha)
