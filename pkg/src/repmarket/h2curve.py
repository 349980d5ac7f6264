"""Hydrogen production curves and concave piecewise-linear fits.

An electrolyzer is described by a sampled production curve (net power drawn
from the bus vs. hydrogen output rate). Market-facing code works with a
concave piecewise-linear fit of that curve: the fit interpolates the sampled
data at a chosen set of breakpoints and uses the chord slope on each interval,
so it is exact at every breakpoint and conservative in between for concave
data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConcavityViolation, DomainError, ParseError, ValidationError

# Absolute slack (MW) tolerated when snapping an evaluation point onto the
# curve domain; anything further out is a genuine domain violation.
DOMAIN_TOL = 1e-9


@dataclass(frozen=True)
class SampledHydrogenCurve:
    """Sampled electrolyzer production curve.

    Parameters
    ----------
    powers_mw : tuple of float
        Sample grid of net power draws, strictly increasing, starting at 0.
        The last entry is the nameplate capacity.
    h2_kg_per_h : tuple of float
        Hydrogen output rate at each sample point, kg/h. Non-negative,
        non-decreasing, and 0 at the first sample (no output at zero power).
    """

    powers_mw: tuple
    h2_kg_per_h: tuple

    def __post_init__(self):
        p = np.asarray(self.powers_mw, dtype=float)
        h = np.asarray(self.h2_kg_per_h, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValidationError("need at least two sample points")
        if p.size != h.size:
            raise ValidationError(
                f"{p.size} power samples vs {h.size} hydrogen samples"
            )
        if not (np.isfinite(p).all() and np.isfinite(h).all()):
            raise ValidationError("curve samples must be finite")
        if p[0] != 0.0:
            raise ValidationError(f"first power sample must be 0, got {p[0]}")
        if np.any(np.diff(p) <= 0):
            raise ValidationError("power samples must be strictly increasing")
        if np.any(h < 0):
            raise ValidationError("hydrogen rates must be non-negative")
        if h[0] != 0.0:
            raise ValidationError(f"hydrogen rate at zero power must be 0, got {h[0]}")
        if np.any(np.diff(h) < 0):
            raise ValidationError("hydrogen rates must be non-decreasing in power")

    @property
    def capacity_mw(self) -> float:
        """Nameplate power draw, the largest sampled power."""
        return float(self.powers_mw[-1])

    def interpolate(self, power_mw: float) -> float:
        """Linearly interpolated hydrogen rate at ``power_mw``.

        Raises
        ------
        DomainError
            If ``power_mw`` lies outside [0, capacity].
        """
        p = _check_domain(power_mw, 0.0, self.capacity_mw)
        return float(np.interp(p, self.powers_mw, self.h2_kg_per_h))

    def scaled(self, capacity_mw: float) -> "SampledHydrogenCurve":
        """Rescale to a plant of ``capacity_mw`` built from identical modules.

        Both axes scale linearly, so specific performance (kg per MWh at a
        given load fraction) is preserved.
        """
        if capacity_mw <= 0:
            raise ValidationError(f"capacity must be positive, got {capacity_mw}")
        k = capacity_mw / self.capacity_mw
        return SampledHydrogenCurve(
            powers_mw=tuple(k * p for p in self.powers_mw),
            h2_kg_per_h=tuple(k * h for h in self.h2_kg_per_h),
        )

    @classmethod
    def from_csv(cls, path) -> "SampledHydrogenCurve":
        """Read a sampled curve from a ``power_mw,h2_kg_per_h`` CSV file."""
        rows = _read_csv(path, ["power_mw", "h2_kg_per_h"])
        return cls(
            powers_mw=tuple(r[0] for r in rows),
            h2_kg_per_h=tuple(r[1] for r in rows),
        )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["power_mw", "h2_kg_per_h"])
            for p, h in zip(self.powers_mw, self.h2_kg_per_h):
                w.writerow([repr(float(p)), repr(float(h))])


@dataclass(frozen=True)
class PiecewiseConcaveCurve:
    """Concave piecewise-linear hydrogen curve h(p) = A_i p + B_i.

    Piece ``i`` applies on [breakpoints[i], breakpoints[i+1]]. Slopes are
    non-increasing (strictly decreasing in the non-degenerate case), which is
    what makes the curve concave and the induced bid curve convex.

    Parameters
    ----------
    slopes : tuple of float
        A_i, kg/MWh, one per piece.
    intercepts : tuple of float
        B_i, kg/h, one per piece. The first intercept is 0 so that h(0) = 0.
    breakpoints : tuple of float
        Piece boundaries, strictly increasing, first equal to 0. One more
        entry than there are pieces; the last is the curve capacity.
    """

    slopes: tuple
    intercepts: tuple
    breakpoints: tuple

    def __post_init__(self):
        a = np.asarray(self.slopes, dtype=float)
        b = np.asarray(self.intercepts, dtype=float)
        bp = np.asarray(self.breakpoints, dtype=float)
        if a.size == 0:
            raise ValidationError("curve needs at least one piece")
        if a.size != b.size or bp.size != a.size + 1:
            raise ValidationError(
                f"inconsistent piece data: {a.size} slopes, {b.size} intercepts,"
                f" {bp.size} breakpoints"
            )
        if not (np.isfinite(a).all() and np.isfinite(b).all() and np.isfinite(bp).all()):
            raise ValidationError("piece data must be finite")
        if bp[0] != 0.0:
            raise ValidationError(f"first breakpoint must be 0, got {bp[0]}")
        if np.any(np.diff(bp) <= 0):
            raise ValidationError("breakpoints must be strictly increasing")
        if abs(b[0]) > DOMAIN_TOL:
            raise ValidationError(f"h(0) must be 0, got intercept {b[0]}")
        _check_concave(a)
        # adjacent pieces must agree at interior breakpoints
        for i in range(a.size - 1):
            x = bp[i + 1]
            left = a[i] * x + b[i]
            right = a[i + 1] * x + b[i + 1]
            if abs(left - right) > 1e-6 * max(1.0, abs(left)):
                raise ValidationError(
                    f"discontinuity at breakpoint {x}: {left} vs {right}"
                )

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    @property
    def capacity_mw(self) -> float:
        """Largest power draw the curve is defined for."""
        return float(self.breakpoints[-1])

    def value(self, power_mw: float) -> float:
        """h(power_mw) in kg/h; raises DomainError outside [0, capacity]."""
        p = _check_domain(power_mw, 0.0, self.capacity_mw)
        i = self.piece_index(p)
        return float(self.slopes[i] * p + self.intercepts[i])

    def piece_index(self, power_mw: float) -> int:
        """0-based index of the piece containing ``power_mw``.

        Interior breakpoints resolve to the right-hand piece (both pieces
        agree there, so the value is unaffected); the capacity point resolves
        to the last piece.
        """
        p = _check_domain(power_mw, 0.0, self.capacity_mw)
        i = int(np.searchsorted(self.breakpoints, p, side="right")) - 1
        return min(max(i, 0), self.n_pieces - 1)

    @classmethod
    def from_csv(cls, path) -> "PiecewiseConcaveCurve":
        """Read a fitted curve from its 5-column CSV representation."""
        rows = _read_csv(
            path,
            ["piece", "slope_kg_per_mwh", "intercept_kg_per_h", "p_lo_mw", "p_hi_mw"],
        )
        rows.sort(key=lambda r: r[0])
        slopes = tuple(r[1] for r in rows)
        intercepts = tuple(r[2] for r in rows)
        breakpoints = [rows[0][3]]
        for r in rows:
            if r[3] != breakpoints[-1]:
                raise ParseError(f"{path}: piece {int(r[0])} does not start where "
                                 f"the previous piece ends ({r[3]} vs {breakpoints[-1]})")
            breakpoints.append(r[4])
        return cls(slopes=slopes, intercepts=intercepts, breakpoints=tuple(breakpoints))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["piece", "slope_kg_per_mwh", "intercept_kg_per_h", "p_lo_mw", "p_hi_mw"]
            )
            for i in range(self.n_pieces):
                w.writerow([
                    i + 1,
                    repr(float(self.slopes[i])),
                    repr(float(self.intercepts[i])),
                    repr(float(self.breakpoints[i])),
                    repr(float(self.breakpoints[i + 1])),
                ])


def uniform_breakpoints(capacity_mw: float, pieces: int) -> tuple:
    """Evenly spaced breakpoints 0 .. capacity for the requested piece count."""
    if pieces < 1:
        raise ValidationError(f"piece count must be >= 1, got {pieces}")
    if capacity_mw <= 0:
        raise ValidationError(f"capacity must be positive, got {capacity_mw}")
    return tuple(np.linspace(0.0, capacity_mw, pieces + 1).tolist())


def fit_piecewise_concave(sampled: SampledHydrogenCurve,
                          breakpoints=None,
                          pieces: int = 4) -> PiecewiseConcaveCurve:
    """Fit a concave piecewise-linear curve through a sampled curve.

    Each piece is the chord of the (interpolated) sampled curve between two
    consecutive breakpoints, so the fit matches the sampled curve exactly at
    every breakpoint. For concave data the chords lie on or below the curve,
    never above it.

    Parameters
    ----------
    sampled : SampledHydrogenCurve
    breakpoints : sequence of float, optional
        Must start at 0 and end at the sampled capacity. Defaults to
        ``pieces`` uniform intervals.
    pieces : int
        Piece count used when ``breakpoints`` is not given.

    Raises
    ------
    ConcavityViolation
        If the chord slopes are not non-increasing, i.e. the sampled data is
        not concave at the resolution of the chosen breakpoints.
    """
    if breakpoints is None:
        breakpoints = uniform_breakpoints(sampled.capacity_mw, pieces)
    bp = np.asarray(breakpoints, dtype=float)
    if bp.size < 2:
        raise ValidationError("need at least two breakpoints")
    if bp[0] != 0.0:
        raise ValidationError(f"first breakpoint must be 0, got {bp[0]}")
    if abs(bp[-1] - sampled.capacity_mw) > DOMAIN_TOL:
        raise ValidationError(
            f"last breakpoint {bp[-1]} must equal the curve capacity "
            f"{sampled.capacity_mw}"
        )
    if np.any(np.diff(bp) <= 0):
        raise ValidationError("breakpoints must be strictly increasing")

    vals = np.interp(bp, sampled.powers_mw, sampled.h2_kg_per_h)
    slopes = np.diff(vals) / np.diff(bp)
    _check_concave(slopes)
    intercepts = vals[:-1] - slopes * bp[:-1]
    return PiecewiseConcaveCurve(
        slopes=tuple(slopes.tolist()),
        intercepts=tuple(intercepts.tolist()),
        breakpoints=tuple(bp.tolist()),
    )


def _check_concave(slopes) -> None:
    a = np.asarray(slopes, dtype=float)
    for i in range(a.size - 1):
        tol = 1e-9 * max(1.0, abs(a[i]))
        if a[i + 1] > a[i] + tol:
            raise ConcavityViolation(
                f"slope increases from piece {i + 1} to {i + 2} "
                f"({a[i]} -> {a[i + 1]})"
            )


def _check_domain(x: float, lo: float, hi: float) -> float:
    x = float(x)
    if not np.isfinite(x):
        raise DomainError(f"evaluation point must be finite, got {x}")
    if x < lo - DOMAIN_TOL or x > hi + DOMAIN_TOL:
        raise DomainError(f"point {x} outside [{lo}, {hi}]")
    return min(max(x, lo), hi)


def _read_csv(path, columns):
    """Read a numeric CSV with the given header; returns list of float tuples."""
    rows = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ParseError(f"{path}: empty file")
        header = [c.strip() for c in header]
        if header != columns:
            raise ParseError(
                f"{path}: expected header {','.join(columns)}, got {','.join(header)}"
            )
        for lineno, raw in enumerate(reader, start=2):
            if not raw or all(not c.strip() for c in raw):
                continue
            if len(raw) != len(columns):
                raise ParseError(f"{path}:{lineno}: expected {len(columns)} fields")
            try:
                rows.append(tuple(float(c) for c in raw))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return rows
