"""Thin linear-programming layer with dual extraction.

Wraps scipy's HiGHS interface behind a fixed convention so the market code
never touches solver specifics:

- minimize c @ x subject to A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper
- equality duals follow the sensitivity convention d(objective)/d(b_eq), which
  is what locational prices need
- every optimal solve is verified (feasibility residuals and strong duality)
  before being returned; anything the solver cannot certify raises
  NumericalFailure rather than returning garbage
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import NumericalFailure, ValidationError

# Certification thresholds: primal residuals are absolute per row, the
# duality gap is relative to the objective magnitude.
FEAS_TOL = 1e-7
GAP_TOL = 1e-6
# HiGHS is run well below the certification threshold so the checks have
# headroom.
_SOLVER_TOL = 1e-9


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    """Standard-form LP data. Empty constraint blocks are allowed."""

    objective: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    a_eq: np.ndarray = field(default=None)
    b_eq: np.ndarray = field(default=None)
    a_ub: np.ndarray = field(default=None)
    b_ub: np.ndarray = field(default=None)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        n = self.objective.size
        if n == 0:
            raise ValidationError("LP needs at least one variable")
        if self.lower.size != n or self.upper.size != n:
            raise ValidationError("bound arrays must match the variable count")
        if not np.isfinite(self.objective).all():
            raise ValidationError("objective must be finite")
        if np.any(self.lower > self.upper):
            raise ValidationError("lower bound exceeds upper bound")
        self.a_eq, self.b_eq = _check_block(self.a_eq, self.b_eq, n, "eq")
        self.a_ub, self.b_ub = _check_block(self.a_ub, self.b_ub, n, "ub")

    @property
    def n_variables(self) -> int:
        return self.objective.size

    @property
    def n_eq_rows(self) -> int:
        return 0 if self.a_eq is None else self.a_eq.shape[0]

    @property
    def n_ub_rows(self) -> int:
        return 0 if self.a_ub is None else self.a_ub.shape[0]


@dataclass
class LpSolution:
    """Solver output; non-status fields are None unless status is OPTIMAL."""

    status: LpStatus
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    equality_duals: Optional[np.ndarray] = None
    inequality_duals: Optional[np.ndarray] = None
    lower_duals: Optional[np.ndarray] = None
    upper_duals: Optional[np.ndarray] = None
    dual_objective: Optional[float] = None


def _check_block(a, b, n, name):
    if a is None and b is None:
        return None, None
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape[0] != b.size or a.shape[1] != n:
        raise ValidationError(
            f"{name} block shape mismatch: A is {a.shape}, b has {b.size}, n={n}"
        )
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValidationError(f"{name} block must be finite")
    if a.shape[0] == 0:
        return None, None
    return a, b


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Solve the LP; OPTIMAL results carry primal, duals and both objectives.

    Raises
    ------
    NumericalFailure
        If the solver reports anything other than a clean optimal /
        infeasible / unbounded status, or an "optimal" point fails the
        feasibility or strong-duality checks.
    """
    bounds = [
        (lo if np.isfinite(lo) else None, hi if np.isfinite(hi) else None)
        for lo, hi in zip(lp.lower, lp.upper)
    ]
    res = linprog(
        lp.objective,
        A_ub=lp.a_ub, b_ub=lp.b_ub,
        A_eq=lp.a_eq, b_eq=lp.b_eq,
        bounds=bounds,
        method="highs",
        options={
            "primal_feasibility_tolerance": _SOLVER_TOL,
            "dual_feasibility_tolerance": _SOLVER_TOL,
        },
    )
    if res.status == 2:
        return LpSolution(status=LpStatus.INFEASIBLE)
    if res.status == 3:
        return LpSolution(status=LpStatus.UNBOUNDED)
    if res.status != 0:
        raise NumericalFailure(f"solver failed: {res.message}")

    x = np.asarray(res.x, dtype=float)
    obj = float(res.fun)
    eq_duals = None if lp.a_eq is None else np.asarray(res.eqlin.marginals, float)
    ub_duals = None if lp.a_ub is None else np.asarray(res.ineqlin.marginals, float)
    lo_duals = np.asarray(res.lower.marginals, dtype=float)
    hi_duals = np.asarray(res.upper.marginals, dtype=float)

    _check_feasible(lp, x)
    dual_obj = _dual_objective(lp, eq_duals, ub_duals, lo_duals, hi_duals)
    if abs(dual_obj - obj) > GAP_TOL * max(1.0, abs(obj)):
        raise NumericalFailure(
            f"duality gap {dual_obj - obj} between primal {obj} and dual {dual_obj}"
        )
    return LpSolution(
        status=LpStatus.OPTIMAL,
        x=x,
        objective_value=obj,
        equality_duals=eq_duals,
        inequality_duals=ub_duals,
        lower_duals=lo_duals,
        upper_duals=hi_duals,
        dual_objective=dual_obj,
    )


def _check_feasible(lp: LinearProgram, x: np.ndarray) -> None:
    if np.any(x < lp.lower - FEAS_TOL) or np.any(x > lp.upper + FEAS_TOL):
        raise NumericalFailure("solution violates variable bounds")
    if lp.a_eq is not None:
        resid = np.abs(lp.a_eq @ x - lp.b_eq)
        if np.any(resid > FEAS_TOL):
            raise NumericalFailure(
                f"equality residual {resid.max()} exceeds tolerance"
            )
    if lp.a_ub is not None:
        excess = lp.a_ub @ x - lp.b_ub
        if np.any(excess > FEAS_TOL):
            raise NumericalFailure(
                f"inequality excess {excess.max()} exceeds tolerance"
            )


def _dual_objective(lp, eq_duals, ub_duals, lo_duals, hi_duals) -> float:
    total = 0.0
    if eq_duals is not None:
        total += float(lp.b_eq @ eq_duals)
    if ub_duals is not None:
        total += float(lp.b_ub @ ub_duals)
    finite_lo = np.where(np.isfinite(lp.lower), lp.lower, 0.0)
    finite_hi = np.where(np.isfinite(lp.upper), lp.upper, 0.0)
    total += float(finite_lo @ lo_duals) + float(finite_hi @ hi_duals)
    return total
