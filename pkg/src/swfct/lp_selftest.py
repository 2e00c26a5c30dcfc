"""Randomized solver validation against exhaustive vertex enumeration.

Any optimum of a box-plus-rows LP sits at a vertex: a point where some k
rows are active (at one of their bounds) and the remaining n-k variables sit
on box bounds.  For the self-test sizes (n <= 6, m <= 8) all such candidate
systems can be solved in batch and checked for feasibility, which gives an
oracle objective independent of the simplex code.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .lp import (FEAS_TOL, INFEASIBLE, OPTIMAL, LpProblem, _row_arrays,
                 solve_lp)

_DET_TOL = 1e-10


def _side_grid(lo, hi, k):
    """(2^k, k) matrix of all lower/upper bound choices."""
    if k == 0:
        return np.zeros((1, 0))
    bits = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
    return np.where(bits == 1, hi[None, :], lo[None, :])


def _feasible_points(x, c_A, row_lo, row_hi, var_lo, var_hi):
    """Rows of x that satisfy box and row constraints (staged filtering)."""
    x = x[np.isfinite(x).all(axis=-1)]
    x = x[((x >= var_lo - FEAS_TOL) & (x <= var_hi + FEAS_TOL)).all(axis=-1)]
    if c_A.shape[0] and x.shape[0]:
        act = x @ c_A.T
        x = x[((act >= row_lo - FEAS_TOL)
               & (act <= row_hi + FEAS_TOL)).all(axis=-1)]
    return x


def brute_force_objective(problem: LpProblem):
    """Best objective over all basic feasible points, or None if infeasible.

    Candidate points fix n-k variables on box bounds and make k rows active;
    for each k all (row subset, variable subset, bound side) combinations are
    assembled and solved in a single batch.
    """
    n = problem.n_vars
    A, row_lo, row_hi = _row_arrays(problem)
    m = A.shape[0]
    c = problem.objective
    vlo, vhi = problem.var_lo, problem.var_hi
    candidates = [_side_grid(vlo, vhi, n)]

    for k in range(1, min(n, m) + 1):
        row_subsets = np.array(list(combinations(range(m), k)), dtype=int)
        if k == n:
            fixed_subsets = np.zeros((1, 0), dtype=int)
        else:
            fixed_subsets = np.array(list(combinations(range(n), n - k)),
                                     dtype=int)
        nF = fixed_subsets.shape[0]
        mask = np.ones((nF, n), dtype=bool)
        np.put_along_axis(mask, fixed_subsets, False, axis=1)
        free_subsets = np.broadcast_to(np.arange(n), (nF, n))[mask].reshape(nF, k)

        A_rs = A[row_subsets]                                  # (R, k, n)
        A_sys = np.moveaxis(A_rs[:, :, free_subsets], 2, 0)    # (F, R, k, k)
        if k == 1:
            good = np.abs(A_sys[..., 0, 0]) > _DET_TOL
        else:
            good = np.abs(np.linalg.det(A_sys)) > _DET_TOL
        if not np.any(good):
            continue

        bits = (np.arange(2 ** k)[:, None] >> np.arange(k)[None, :]) & 1
        bvals = np.where(bits[:, None, :] == 1, row_hi[row_subsets][None],
                         row_lo[row_subsets][None])            # (Pr, R, k)
        vbits = ((np.arange(2 ** (n - k))[:, None]
                  >> np.arange(n - k)[None, :]) & 1)
        xv = np.where(vbits[None, :, :] == 1, vhi[fixed_subsets][:, None, :],
                      vlo[fixed_subsets][:, None, :])          # (F, Pv, n-k)
        fixed_part = np.einsum("rkfj,fpj->frpk", A_rs[:, :, fixed_subsets], xv)
        rhs = bvals[None, :, :, None, :] - fixed_part[:, None, :, :, :]
        rhs = np.where(np.isfinite(rhs), rhs, np.nan)          # (F,Pr,R,Pv,k)
        if k == 1:
            piv = np.where(good, A_sys[..., 0, 0], 1.0)
            sol = rhs / piv[:, None, :, None, None]
        else:
            A_safe = np.where(good[..., None, None], A_sys,
                              np.eye(k)[None, None])
            nF2, Pr, R, Pv, _ = rhs.shape
            rhs2 = rhs.transpose(0, 2, 4, 1, 3).reshape(nF2, R, k, Pr * Pv)
            sol2 = np.linalg.solve(A_safe, rhs2)       # (F, R, k, Pr*Pv)
            sol = sol2.reshape(nF2, R, k, Pr, Pv).transpose(0, 3, 1, 4, 2)
        sol = np.where(good[:, None, :, None, None], sol, np.nan)
        X = np.empty(sol.shape[:-1] + (n,))
        for f in range(nF):
            X[f, ..., fixed_subsets[f]] = np.moveaxis(
                np.broadcast_to(xv[f][None, None], sol.shape[1:-1] + (n - k,)),
                -1, 0)
            X[f, ..., free_subsets[f]] = np.moveaxis(sol[f], -1, 0)
        candidates.append(X.reshape(-1, n))

    X = np.concatenate(candidates, axis=0)
    X = _feasible_points(X, A, row_lo, row_hi, vlo, vhi)
    if X.shape[0] == 0:
        return None
    return float(np.max(X @ c))


def random_problem(rng: np.random.Generator) -> LpProblem:
    """Small random bounded LP; mostly feasible by construction."""
    n = int(rng.integers(1, 7))
    m = int(rng.integers(0, 9))
    c = np.round(rng.uniform(-2.0, 2.0, n), 2)
    vlo = np.round(rng.uniform(-2.0, 0.0, n), 2)
    vhi = vlo + np.round(rng.uniform(0.5, 3.0, n), 2)
    x0 = rng.uniform(vlo, vhi)
    rows = []
    for _ in range(m):
        nnz = int(rng.integers(1, n + 1))
        idx = rng.choice(n, size=nnz, replace=False)
        coef = np.round(rng.uniform(-2.0, 2.0, nnz), 2)
        coef[coef == 0.0] = 1.0
        act = float(coef @ x0[idx])
        lo = act - float(rng.uniform(0.05, 2.0))
        hi = act + float(rng.uniform(0.05, 2.0))
        which = rng.uniform()
        if which < 0.2:
            lo = -np.inf
        elif which < 0.4:
            hi = np.inf
        rows.append(([(int(j), float(a)) for j, a in zip(idx, coef)], lo, hi))
    if m and rng.uniform() < 0.15:
        # deliberately unsatisfiable row
        pairs, _, _ = rows[0]
        idx = np.array([j for j, _ in pairs])
        coef = np.array([a for _, a in pairs])
        amax = float(np.sum(np.maximum(coef * vlo[idx], coef * vhi[idx])))
        rows[0] = (pairs, amax + 0.5, np.inf)
    return LpProblem(n_vars=n, objective=c, var_lo=vlo, var_hi=vhi, rows=rows)


def run_selftest(count: int, seed: int, objective_offset: float = 0.0):
    """Compare solver output with the vertex oracle on ``count`` instances.

    objective_offset is a test hook: a nonzero value corrupts the solver's
    reported objective before comparison, which must be reported as failures.
    Returns (n_failures, messages).
    """
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(count):
        problem = random_problem(rng)
        sol = solve_lp(problem)
        ref = brute_force_objective(problem)
        if ref is None:
            if sol.status != INFEASIBLE:
                failures.append(
                    f"case {i}: oracle infeasible, solver says {sol.status}")
            continue
        if sol.status != OPTIMAL:
            failures.append(f"case {i}: solver status {sol.status}, "
                            f"oracle objective {ref:.12g}")
            continue
        got = sol.objective_value + objective_offset
        if abs(got - ref) > 1e-8:
            failures.append(f"case {i}: objective {got:.12g} != oracle "
                            f"{ref:.12g}")
    return len(failures), failures
