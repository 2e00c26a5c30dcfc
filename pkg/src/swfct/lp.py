"""Dense bounded-variable simplex for the small per-step limiter programs.

Two-phase primal simplex on a dense tableau: ranged rows become slack
variables with the row bounds, infeasible starts get artificial columns,
entering variables are chosen by steepest reduced cost with a permanent
switch to Bland's rule after a stall, and all tie-breaking is by lowest
index, so identical problems yield identical solutions.

A cheap presolve drops rows that cannot bind for any point of the variable
box and fixes variables that appear in no remaining row at their preferred
bound; per-step limiter problems collapse to the handful of interfaces near
active waves.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels

FEAS_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-11
_STALL_LIMIT = 40

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
ITERATION_LIMIT = "iteration_limit"


@dataclass
class LpProblem:
    """maximize obj.x subject to var_lo <= x <= var_hi and row bounds.

    rows is a list of (pairs, row_lo, row_hi) where pairs is a sequence of
    (var_index, coefficient); row bounds may be +-inf on either side.
    """

    n_vars: int
    objective: np.ndarray
    var_lo: np.ndarray
    var_hi: np.ndarray
    rows: list = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=np.float64)
        self.var_lo = np.asarray(self.var_lo, dtype=np.float64)
        self.var_hi = np.asarray(self.var_hi, dtype=np.float64)
        if not (self.objective.shape == self.var_lo.shape
                == self.var_hi.shape == (self.n_vars,)):
            raise ValueError("objective/bounds must have length n_vars")
        if np.any(self.var_lo > self.var_hi):
            raise ValueError("var_lo > var_hi")
        for pairs, lo, hi in self.rows:
            if lo > hi:
                raise ValueError("row_lo > row_hi")
            for j, _ in pairs:
                if not 0 <= j < self.n_vars:
                    raise ValueError(f"row references variable {j}")

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass
class LpSolution:
    status: str
    x: np.ndarray
    objective_value: float


def _row_arrays(problem: LpProblem):
    """Rows as (dense A, lo, hi) with duplicate indices merged."""
    m = problem.n_rows
    A = np.zeros((m, problem.n_vars))
    lo = np.empty(m)
    hi = np.empty(m)
    for r, (pairs, rlo, rhi) in enumerate(problem.rows):
        for j, a in pairs:
            A[r, j] += a
        lo[r] = rlo
        hi[r] = rhi
    return A, lo, hi


class _Simplex:
    """Tableau state for one (reduced) problem instance."""

    def __init__(self, A, row_lo, row_hi, c, lo, hi):
        m, n = A.shape
        act0 = A @ self._start_point(c, lo, hi)
        below = act0 < row_lo
        above = act0 > row_hi
        n_art = int(np.count_nonzero(below | above))
        ncols = n + m + n_art
        self.m, self.n, self.n_art = m, n, n_art
        self.lo = np.concatenate([lo, row_lo, np.zeros(n_art)])
        self.hi = np.concatenate([hi, row_hi, np.full(n_art, np.inf)])
        self.cost = np.concatenate([c, np.zeros(m + n_art)])
        self.status = np.zeros(ncols, dtype=np.int8)
        x0 = self._start_point(c, lo, hi)
        self.status[:n] = (x0 == hi) & (hi > lo)
        self.basis = np.empty(m, dtype=np.int64)
        self.xb = np.empty(m)
        T = np.zeros((m, ncols))
        T[:, :n] = A
        a_col = n + m
        for r in range(m):
            T[r, n + r] = -1.0
            if above[r]:
                # slack pinned at its upper bound, artificial absorbs excess
                self.status[n + r] = 1
                T[r, a_col] = -1.0
                T[r, :] = -T[r, :]  # scale by 1/B[r,r] = -1
                self.basis[r] = a_col
                self.status[a_col] = 2
                self.xb[r] = act0[r] - row_hi[r]
                a_col += 1
            elif below[r]:
                self.status[n + r] = 0
                T[r, a_col] = 1.0
                self.basis[r] = a_col
                self.status[a_col] = 2
                self.xb[r] = row_lo[r] - act0[r]
                a_col += 1
            else:
                T[r, :] = -T[r, :]
                self.basis[r] = n + r
                self.status[n + r] = 2
                self.xb[r] = act0[r]
        self.T = T

    @staticmethod
    def _start_point(c, lo, hi):
        """Nonbasic start: each variable at its objective-preferred bound."""
        x = np.where(c > 0.0, hi, lo)
        x = np.where(np.isfinite(x), x, np.where(np.isfinite(lo), lo, hi))
        if np.any(~np.isfinite(x)):
            raise ValueError("free variables are not supported")
        return x

    def nonbasic_values(self):
        vals = np.where(self.status == 1, self.hi, self.lo)
        return vals

    def solution(self):
        x = self.nonbasic_values()
        x[self.basis] = self.xb
        return x

    def run_phase(self, cost, budget, bland=False):
        """Pivot until no improving column remains; returns (state, pivots)."""
        T, xb, basis = self.T, self.xb, self.basis
        status, lo, hi = self.status, self.lo, self.hi
        d = cost - cost[basis] @ T
        d[basis] = 0.0
        pivots = 0
        stall = 0
        while True:
            if bland:
                j = kernels.pick_entering_bland(d, status, lo, hi, DUAL_TOL)
            else:
                j = kernels.pick_entering_dantzig(d, status, lo, hi, DUAL_TOL)
            if j < 0:
                return OPTIMAL, pivots
            if pivots >= budget:
                return ITERATION_LIMIT, pivots
            s = 1.0 if status[j] == 0 else -1.0
            own_range = hi[j] - lo[j]
            t, r = kernels.ratio_test(T[:, j], xb, basis, lo, hi, s,
                                      own_range, PIVOT_TOL)
            if r < 0 and not np.isfinite(t):
                raise RuntimeError("unbounded direction in bounded problem")
            improvement = abs(d[j]) * t
            xb -= (s * t) * T[:, j]
            if r < 0:
                status[j] = 1 - status[j]
            else:
                enter_from = lo[j] if status[j] == 0 else hi[j]
                leaving = basis[r]
                status[leaving] = 0 if s * T[r, j] > 0.0 else 1
                basis[r] = j
                status[j] = 2
                xb[r] = enter_from + s * t
                kernels.pivot_update(T, d, r, j)
            pivots += 1
            if improvement <= 1e-12:
                stall += 1
                if stall >= _STALL_LIMIT:
                    bland = True
            else:
                stall = 0


def solve_lp(problem: LpProblem, max_pivots: int | None = None) -> LpSolution:
    """Solve a bounded-variable LP; deterministic for identical input."""
    if max_pivots is None:
        max_pivots = 10 * (problem.n_vars + problem.n_rows)
    c = problem.objective
    lo = problem.var_lo
    hi = problem.var_hi
    A, row_lo, row_hi = _row_arrays(problem)

    # presolve: rows that cannot bind anywhere in the box impose nothing
    ends = np.stack([A * lo[None, :], A * hi[None, :]])
    amin = np.minimum(ends[0], ends[1]).sum(axis=1) if problem.n_rows else np.zeros(0)
    amax = np.maximum(ends[0], ends[1]).sum(axis=1) if problem.n_rows else np.zeros(0)
    keep = ~((amin >= row_lo - FEAS_TOL) & (amax <= row_hi + FEAS_TOL))
    A_k = A[keep]
    covered = np.zeros(problem.n_vars, dtype=bool)
    if A_k.shape[0]:
        covered = np.any(A_k != 0.0, axis=0)

    x = _Simplex._start_point(c, lo, hi)  # uncovered vars: box optimum
    if np.any((c > 0) & ~covered & ~np.isfinite(hi)):
        raise ValueError("objective unbounded over the variable box")

    status = OPTIMAL
    if np.any(covered):
        sub = np.nonzero(covered)[0]
        sp = _Simplex(A_k[:, sub], row_lo[keep], row_hi[keep],
                      c[sub], lo[sub], hi[sub])
        n_art = sp.n_art
        budget = max_pivots
        if n_art:
            cost1 = np.zeros_like(sp.cost)
            cost1[sp.n + sp.m:] = -1.0
            state, used = sp.run_phase(cost1, budget)
            budget -= used
            x_art = sp.solution()[sp.n + sp.m:]
            if state == ITERATION_LIMIT:
                status = ITERATION_LIMIT
            elif float(np.sum(x_art)) > FEAS_TOL:
                status = INFEASIBLE
            # artificials are pinned at zero for phase 2
            sp.lo[sp.n + sp.m:] = 0.0
            sp.hi[sp.n + sp.m:] = 0.0
        if status == OPTIMAL:
            state, used = sp.run_phase(sp.cost, budget)
            if state == ITERATION_LIMIT:
                status = ITERATION_LIMIT
            else:
                # reduced costs drift with the tableau; one fresh pass
                state, _ = sp.run_phase(sp.cost, max(budget - used, 0))
                if state == ITERATION_LIMIT:
                    status = ITERATION_LIMIT
        x[sub] = sp.solution()[:sp.n]

    x = np.minimum(np.maximum(x, lo), hi)
    if status == OPTIMAL and problem.n_rows:
        act = A @ x
        bad = max(float(np.max(row_lo - act, initial=0.0)),
                  float(np.max(act - row_hi, initial=0.0)))
        if bad > 10.0 * FEAS_TOL:
            raise RuntimeError(f"solver returned infeasible point ({bad:.2e})")
    return LpSolution(status=status, x=x,
                      objective_value=float(c @ x))


# ---------------------------------------------------------------------------
# text round-trip format (one variable / row per line) for golden-file tests
# ---------------------------------------------------------------------------

def problem_to_text(problem: LpProblem) -> str:
    lines = [f"lp nvars {problem.n_vars} nrows {problem.n_rows}"]
    for j in range(problem.n_vars):
        lines.append("var {} {} {}".format(repr(float(problem.objective[j])),
                                           repr(float(problem.var_lo[j])),
                                           repr(float(problem.var_hi[j]))))
    for pairs, lo, hi in problem.rows:
        terms = " ".join(f"{j} {repr(float(a))}" for j, a in pairs)
        lines.append(f"row {repr(float(lo))} {repr(float(hi))} : {terms}".rstrip())
    return "\n".join(lines) + "\n"


def problem_from_text(text: str) -> LpProblem:
    lines = [ln for ln in (s.strip() for s in text.splitlines())
             if ln and not ln.startswith("#")]
    head = lines[0].split()
    if head[:1] != ["lp"] or head[1] != "nvars" or head[3] != "nrows":
        raise ValueError("not an lp text file")
    n_vars = int(head[2])
    n_rows = int(head[4])
    obj = np.empty(n_vars)
    vlo = np.empty(n_vars)
    vhi = np.empty(n_vars)
    for j in range(n_vars):
        tok = lines[1 + j].split()
        if tok[0] != "var":
            raise ValueError(f"expected var line, got {lines[1 + j]!r}")
        obj[j], vlo[j], vhi[j] = (float(t) for t in tok[1:4])
    rows = []
    for r in range(n_rows):
        tok = lines[1 + n_vars + r].split()
        if tok[0] != "row":
            raise ValueError(f"expected row line, got {lines[1 + n_vars + r]!r}")
        lo, hi = float(tok[1]), float(tok[2])
        if len(tok) > 3 and tok[3] != ":":
            raise ValueError("malformed row line")
        body = tok[4:]
        pairs = [(int(body[i]), float(body[i + 1]))
                 for i in range(0, len(body), 2)]
        rows.append((pairs, lo, hi))
    return LpProblem(n_vars=n_vars, objective=obj, var_lo=vlo, var_hi=vhi,
                     rows=rows)
