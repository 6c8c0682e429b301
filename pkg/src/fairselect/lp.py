"""Small dense linear programs and the restricted primals over a set family.

The solver is a two-phase tableau simplex. It prices with Dantzig's rule and
switches permanently to Bland's rule after a run of degenerate pivots, which
keeps it deterministic and cycle-free.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .model import Box, FairnessSpec, Instance, LowerBounds, Pairwise, Selection, group_values

LE, GE, EQ = "<=", ">=", "="

DEFAULT_TOL = 1e-8
_PIVOT_TOL = 1e-11
_DEGENERATE_RUN = 50


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ERROR = "error"


@dataclass(frozen=True)
class Constraint:
    coeffs: np.ndarray
    relation: str
    rhs: float


@dataclass
class LinearProgram:
    objective: np.ndarray
    constraints: list[Constraint] = field(default_factory=list)
    sense: str = "max"
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        n = self.objective.shape[0]
        if self.lower is None:
            self.lower = np.zeros(n)
        self.lower = np.asarray(self.lower, dtype=float)
        if self.upper is not None:
            self.upper = np.asarray(self.upper, dtype=float)
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]

    def add(self, coeffs, relation: str, rhs: float) -> None:
        if relation not in (LE, GE, EQ):
            raise ValueError(f"unknown relation {relation!r}")
        self.constraints.append(Constraint(np.asarray(coeffs, dtype=float), relation, float(rhs)))

    def check(self) -> None:
        n = self.num_vars
        arrays = [self.objective, self.lower]
        for row in self.constraints:
            if row.coeffs.shape != (n,):
                raise ValueError(f"constraint width {row.coeffs.shape} does not match {n} variables")
            arrays.append(row.coeffs)
            if not np.isfinite(row.rhs):
                raise ValueError("right-hand sides must be finite")
        if not all(np.all(np.isfinite(arr)) for arr in arrays):
            raise ValueError("LP data must be finite")
        # upper bounds may be +inf, never nan
        if self.upper is not None and np.any(np.isnan(self.upper)):
            raise ValueError("upper bounds must not be nan")

    def violation(self, x: np.ndarray) -> float:
        """Largest constraint or bound violation at ``x``."""
        worst = float(np.max(self.lower - x, initial=0.0))
        if self.upper is not None:
            worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        for row in self.constraints:
            lhs = float(row.coeffs @ x)
            if row.relation == LE:
                worst = max(worst, lhs - row.rhs)
            elif row.relation == GE:
                worst = max(worst, row.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - row.rhs))
        return worst


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray | None
    objective: float | None
    max_violation: float | None = None
    iterations: int = 0


def _implied_upper(lp: LinearProgram) -> np.ndarray:
    """Upper bounds implied by <= rows with nonnegative coefficients (lower bounds 0)."""
    n = lp.num_vars
    implied = np.full(n, np.inf)
    if np.any(lp.lower != 0):
        return implied
    for row in lp.constraints:
        if row.relation == LE and np.all(row.coeffs >= 0):
            pos = row.coeffs > 0
            implied[pos] = np.minimum(implied[pos], row.rhs / row.coeffs[pos])
    return implied


class _Tableau:
    """Row 0 holds reduced costs (z_j - c_j) for a maximization; column -1 is the rhs."""

    def __init__(self, A, b, basis, cost, n_struct):
        rows, cols = A.shape
        self.T = np.zeros((rows + 1, cols + 1))
        self.T[1:, :cols] = A
        self.T[1:, -1] = b
        self.basis = list(basis)
        self.n_cols = cols
        self.n_struct = n_struct
        self.bland = False
        self.iterations = 0
        self.set_cost(cost)

    def set_cost(self, cost):
        T = self.T
        T[0, :] = 0.0
        T[0, : self.n_cols] = -cost
        for r, j in enumerate(self.basis, start=1):
            if T[0, j] != 0.0:
                T[0] -= T[0, j] * T[r]

    def entering(self, allowed):
        red = self.T[0, : self.n_cols]
        cand = np.flatnonzero((red < -_PIVOT_TOL) & allowed)
        if cand.size == 0:
            return None
        if self.bland:
            return int(cand[0])
        return int(cand[np.argmin(red[cand])])

    def leaving(self, col):
        column = self.T[1:, col]
        rhs = self.T[1:, -1]
        rows = np.flatnonzero(column > _PIVOT_TOL)
        if rows.size == 0:
            return None
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        # lowest basic variable index among ties (Bland)
        return int(min(ties, key=lambda r: self.basis[r])) + 1

    def run(self, allowed, max_iter):
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                return "limit"
            col = self.entering(allowed)
            if col is None:
                return "optimal"
            row = self.leaving(col)
            if row is None:
                return "unbounded"
            step = self.T[row, -1] / self.T[row, col]
            degenerate = degenerate + 1 if step <= 1e-12 else 0
            if degenerate >= _DEGENERATE_RUN:
                self.bland = True
            _kernels.pivot(self.T, row, col)
            self.basis[row - 1] = col
            self.iterations += 1

    def values(self):
        x = np.zeros(self.n_cols)
        for r, j in enumerate(self.basis, start=1):
            x[j] = self.T[r, -1]
        return x


def solve_lp(lp: LinearProgram, tol: float = DEFAULT_TOL) -> LPSolution:
    """Two-phase simplex. Optimal points are re-checked against ``tol``."""
    lp.check()
    n = lp.num_vars
    c = lp.objective if lp.sense == "max" else -lp.objective
    lower = lp.lower

    rows: list[tuple[np.ndarray, str, float]] = []
    for con in lp.constraints:
        rows.append((con.coeffs, con.relation, con.rhs - float(con.coeffs @ lower)))
    if lp.upper is not None:
        implied = _implied_upper(lp)
        for j in range(n):
            if np.isfinite(lp.upper[j]) and lp.upper[j] < implied[j]:
                e = np.zeros(n)
                e[j] = 1.0
                rows.append((e, LE, lp.upper[j] - lower[j]))

    m = len(rows)
    A = np.zeros((m, n))
    b = np.zeros(m)
    rel = []
    for i, (a, r, rhs) in enumerate(rows):
        if rhs < 0:
            a, rhs = -a, -rhs
            r = {LE: GE, GE: LE, EQ: EQ}[r]
        A[i] = a
        b[i] = rhs
        rel.append(r)

    n_slack = sum(1 for r in rel if r != EQ)
    n_art = sum(1 for r in rel if r != LE)
    cols = n + n_slack + n_art
    full = np.zeros((m, cols))
    full[:, :n] = A
    basis = []
    s = n
    art = n + n_slack
    art_cols = []
    for i, r in enumerate(rel):
        if r == LE:
            full[i, s] = 1.0
            basis.append(s)
            s += 1
        elif r == GE:
            full[i, s] = -1.0
            s += 1
            full[i, art] = 1.0
            basis.append(art)
            art_cols.append(art)
            art += 1
        else:
            full[i, art] = 1.0
            basis.append(art)
            art_cols.append(art)
            art += 1

    max_iter = 50 * (m + cols) + 1000
    tab = _Tableau(full, b, basis, np.zeros(cols), n)
    allowed = np.ones(cols, dtype=bool)
    scale = 1.0 + float(np.abs(b).max(initial=0.0))

    if art_cols:
        phase1 = np.zeros(cols)
        phase1[art_cols] = -1.0
        tab.set_cost(phase1)
        status = tab.run(allowed, max_iter)
        if status != "optimal":
            return LPSolution(LPStatus.ERROR, None, None, iterations=tab.iterations)
        if -tab.T[0, -1] > tol * scale:
            return LPSolution(LPStatus.INFEASIBLE, None, None, iterations=tab.iterations)
        is_art = np.zeros(cols, dtype=bool)
        is_art[art_cols] = True
        # drive zero-level artificials out of the basis; drop rows that stay redundant
        r = 1
        while r < tab.T.shape[0]:
            j = tab.basis[r - 1]
            if is_art[j]:
                cand = np.flatnonzero((np.abs(tab.T[r, :cols]) > 1e-9) & ~is_art)
                if cand.size:
                    _kernels.pivot(tab.T, r, int(cand[0]))
                    tab.basis[r - 1] = int(cand[0])
                else:
                    tab.T = np.delete(tab.T, r, axis=0)
                    del tab.basis[r - 1]
                    continue
            r += 1
        allowed = ~is_art
        tab.bland = False

    cost = np.zeros(cols)
    cost[:n] = c
    tab.set_cost(cost)
    status = tab.run(allowed, max_iter)
    if status == "unbounded":
        return LPSolution(LPStatus.UNBOUNDED, None, None, iterations=tab.iterations)
    if status != "optimal":
        return LPSolution(LPStatus.ERROR, None, None, iterations=tab.iterations)

    x = tab.values()[:n] + lower
    x = np.where(np.abs(x) < 1e-15, 0.0, x)
    value = float(lp.objective @ x)
    viol = lp.violation(x)
    if viol > tol * scale * 100:
        return LPSolution(LPStatus.ERROR, x, value, viol, tab.iterations)
    return LPSolution(LPStatus.OPTIMAL, x, value, viol, tab.iterations)


# --------------------------------------------------------------------------
# restricted primals
# --------------------------------------------------------------------------

def build_restricted_primal(
    fairness: FairnessSpec,
    sets: Sequence[Selection],
    instance: Instance,
    mu: float = 1.0,
    relax: float = 0.0,
) -> LinearProgram:
    """max sum_S x_S f(S) over the columns ``sets`` under the fairness rows.

    Lower fairness bounds are scaled by ``mu``; upper and pairwise bounds are
    not. ``relax`` widens every fairness row by ``relax * (1 + |rhs|)``.
    Row order: fairness rows, then sum_S x_S <= 1.
    """
    if not sets:
        raise ValueError("the restricted primal needs at least one set")
    if len(set(sets)) != len(sets):
        raise ValueError("restricted primal columns must be distinct")
    m = instance.m
    f = np.array([instance.global_utility.evaluate(s, instance.groups) for s in sets])
    G = np.array([group_values(instance, s) for s in sets]).reshape(len(sets), m).T  # (m, |F'|)
    lp = LinearProgram(f, sense="max", lower=np.zeros(len(sets)), upper=np.ones(len(sets)))

    def widen(rhs, direction):
        return rhs + direction * relax * (1.0 + abs(rhs))

    if isinstance(fairness, LowerBounds):
        for t in range(m):
            lp.add(G[t], GE, widen(mu * fairness.alpha[t], -1))
    elif isinstance(fairness, Box):
        for t in range(m):
            lp.add(G[t], GE, widen(mu * fairness.alpha[t], -1))
        for t in range(m):
            lp.add(G[t], LE, widen(fairness.beta[t], +1))
    elif isinstance(fairness, Pairwise):
        for t in range(m):
            for t2 in range(m):
                if t != t2:
                    lp.add(G[t] - G[t2], LE, widen(fairness.gamma[t][t2], +1))
    else:
        raise TypeError(f"unknown fairness spec {type(fairness).__name__}")
    lp.add(np.ones(len(sets)), LE, 1.0)
    return lp
