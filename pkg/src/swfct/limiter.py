"""Flux limiter strategies for the hybrid low/central scheme.

Four ways to pick the per-interface blending factor alpha in [0, 1]:

* positivity-preserving closed form from the interface velocities,
* Zalesak-style closed-form bounds on water level, discharge, and the cell
  entropy budget (a feasible point of the limiter program),
* the exact limiter program solved by the in-repo simplex: maximize the sum
  of alphas subject to two-sided level/discharge rows and one-sided entropy
  rows,
* a fixed-point iteration that alternates limiter computation with the
  explicit hybrid update until states and limiters stop moving.

All bound assembly is vectorized over cells; ghost-side contributions are
unconstrained.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CellField, PhysicsParams
from .entropy import entropy, entropy_gradient, low_order_direction
from .lp import OPTIMAL, LpProblem, solve_lp
from .reconstruction import InterfaceData, apply_fluxes

# An entropy row with no antidiffusive coupling can only be satisfied if its
# left-hand side is non-positive; anything above this is a time-step problem.
_EMPTY_ROW_TOL = 1e-12


class InfeasibleStep(Exception):
    """Limiter constraints cannot be met at this dt; caller should halve."""


@dataclass(frozen=True)
class IterationConfig:
    """Floors and tolerances of the fixed-point stop criterion."""

    delta: float = 1e-8
    eps1: float = 1e-6
    eps2: float = 1e-6
    max_iters: int = 20

    def __post_init__(self):
        if min(self.delta, self.eps1, self.eps2) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class LimiterBundle:
    """Final alpha plus the per-family intermediate bounds (for dumps)."""

    alpha: np.ndarray
    alpha_y: np.ndarray | None = None
    alpha_q: np.ndarray | None = None
    alpha_U: np.ndarray | None = None


def pp_limiters(iface: InterfaceData) -> np.ndarray:
    """Positivity-preserving closed form; dry interfaces (c = 0) get 0."""
    c = iface.c
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.minimum(1.0, np.minimum(1.0 - iface.u_right / c,
                                       1.0 + iface.u_left / c))
    a = np.where(c > 0.0, a, 0.0)
    return np.maximum(a, 0.0)


def _transport_term(w_cell, w_minus_left, w_plus_right, c, u_pad):
    """Shared interface-drift term of the two-sided bound rows."""
    return (0.5 * (c[1:] - u_pad[2:]) * (w_cell - w_plus_right)
            + 0.5 * (c[:-1] + u_pad[:-2]) * (w_cell - w_minus_left))


def _bounds(value_cell, value_minus, value_plus, g_ad, c, u_pad, dt, dx):
    lo = np.minimum(value_cell, np.minimum(value_minus[:-1], value_plus[1:]))
    hi = np.maximum(value_cell, np.maximum(value_minus[:-1], value_plus[1:]))
    T = _transport_term(value_cell, value_minus[:-1], value_plus[1:], c, u_pad)
    r = dx / dt
    Qm = r * (lo - value_cell) + T
    Qp = r * (hi - value_cell) + T
    Pm = np.minimum(0.0, -g_ad[1:]) + np.minimum(0.0, g_ad[:-1])
    Pp = np.maximum(0.0, -g_ad[1:]) + np.maximum(0.0, g_ad[:-1])
    with np.errstate(divide="ignore", invalid="ignore"):
        Rm = np.where(Pm < 0.0,
                      np.minimum(1.0, np.minimum(0.0, Qm) / Pm), 1.0)
        Rp = np.where(Pp > 0.0,
                      np.minimum(1.0, np.maximum(0.0, Qp) / Pp), 1.0)
    return Qm, Qp, Pm, Pp, Rm, Rp


def depth_bounds(fields: CellField, iface: InterfaceData, u_pad, dt, dx):
    """Water-level bound quantities Q-+, P-+, R-+ per interior cell."""
    w = fields.y + fields.z
    return _bounds(w, iface.w_minus, iface.w_plus, iface.g_ad_y,
                   iface.c, u_pad, dt, dx)


def discharge_bounds(fields: CellField, iface: InterfaceData, u_pad, dt, dx):
    """Discharge analogues of depth_bounds."""
    return _bounds(fields.q, iface.q_minus, iface.q_plus, iface.g_ad_q,
                   iface.c, u_pad, dt, dx)


def alpha_from_bounds(Rm, Rp, g_ad):
    """Per-interface cap from the per-cell ratios of both neighbours.

    An interface with negative antidiffusive component raises its left cell
    and drains its right one, so it is capped by R+ on the left and R- on
    the right; the opposite sign swaps roles, zero imposes nothing.
    """
    Rm_p = np.concatenate([[1.0], Rm, [1.0]])
    Rp_p = np.concatenate([[1.0], Rp, [1.0]])
    a_neg = np.minimum(Rp_p[:-1], Rm_p[1:])
    a_pos = np.minimum(Rm_p[:-1], Rp_p[1:])
    return np.where(g_ad < 0.0, a_neg, np.where(g_ad > 0.0, a_pos, 1.0))


def entropy_terms(fields: CellField, iface: InterfaceData, v_hat_y, v_hat_q,
                  dt, dx, params: PhysicsParams):
    """Entropy row data per cell: (A, d_right, d_left).

    A is the cell's entropy production at the candidate state v_hat
    (Taylor remainder plus the low-order flux/entropy-flux mismatch);
    d_right/d_left couple it to the adjacent interface limiters.  The row
    reads A_i <= alpha_right * d_right + alpha_left * d_left.
    """
    g = params.g
    eps = params.eps_desing
    Uy, Uq = entropy_gradient(fields.y, fields.q, fields.z, g, eps)
    U_old = entropy(fields.y, fields.q, fields.z, g, eps)
    U_hat = entropy(v_hat_y, v_hat_q, fields.z, g, eps)
    D_y, D_q = low_order_direction(iface)
    remainder = (U_hat - U_old - Uy * (v_hat_y - fields.y)
                 - Uq * (v_hat_q - fields.q))
    A = ((dx / dt) * remainder + (iface.G_low[1:] - iface.G_low[:-1])
         - (Uy * D_y + Uq * D_q))
    d_right = (Uy * iface.g_ad_y[1:] + Uq * iface.g_ad_q[1:]) - iface.G_ad[1:]
    d_left = -((Uy * iface.g_ad_y[:-1] + Uq * iface.g_ad_q[:-1])
               - iface.G_ad[:-1])
    return A, d_right, d_left


def entropy_bound(A, d_right, d_left):
    """Per-interface cap from the entropy rows of both adjacent cells.

    A cell with slack (A <= 0) allows each negatively-coupled limiter up to
    A/B, the fair share of the slack over all negative couplings; positive
    couplings are unconstrained.  A cell with no couplings contributes 1
    when slack, 0 otherwise.
    """
    B = np.minimum(0.0, d_right) + np.minimum(0.0, d_left)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.minimum(1.0, A / B)

    def contrib(d):
        neg = np.where(A <= 0.0, ratio, 0.0)
        out = np.where(d < 0.0, neg, 1.0)
        return np.where(B == 0.0, np.where(A <= 0.0, 1.0, 0.0), out)

    right = np.concatenate([[1.0], contrib(d_right)])
    left = np.concatenate([contrib(d_left), [1.0]])
    return np.clip(np.minimum(right, left), 0.0, 1.0)


def approximate_limiters(fields: CellField, iface: InterfaceData, v_hat_y,
                         v_hat_q, u_pad, dt, dx, params: PhysicsParams,
                         include_q: bool) -> LimiterBundle:
    """Closed-form feasible point of the limiter program (min of the caps)."""
    *_, Rm, Rp = depth_bounds(fields, iface, u_pad, dt, dx)
    alpha_y = alpha_from_bounds(Rm, Rp, iface.g_ad_y)
    alpha_q = None
    alpha = alpha_y
    if include_q:
        *_, Rmq, Rpq = discharge_bounds(fields, iface, u_pad, dt, dx)
        alpha_q = alpha_from_bounds(Rmq, Rpq, iface.g_ad_q)
        alpha = np.minimum(alpha, alpha_q)
    A, d_right, d_left = entropy_terms(fields, iface, v_hat_y, v_hat_q,
                                       dt, dx, params)
    alpha_U = entropy_bound(A, d_right, d_left)
    alpha = np.clip(np.minimum(alpha, alpha_U), 0.0, 1.0)
    return LimiterBundle(alpha=alpha, alpha_y=alpha_y, alpha_q=alpha_q,
                         alpha_U=alpha_U)


def assemble_lp(fields: CellField, iface: InterfaceData, v_hat_y, v_hat_q,
                u_pad, dt, dx, params: PhysicsParams,
                include_q: bool) -> LpProblem:
    """Limiter program: maximize sum(alpha) under bound and entropy rows.

    Raises InfeasibleStep for rows that no limiter choice can satisfy
    (entropy row with positive left-hand side and no couplings, or crossed
    two-sided bounds), both signs of an oversized dt.
    """
    n = fields.n_cells
    n_ifc = iface.n_interfaces
    rows = []

    def add_two_sided(Qm, Qp, g_ad):
        for i in range(n):
            c_right = -g_ad[i + 1]
            c_left = g_ad[i]
            if c_right == 0.0 and c_left == 0.0:
                if Qm[i] > _EMPTY_ROW_TOL or Qp[i] < -_EMPTY_ROW_TOL:
                    raise InfeasibleStep(
                        f"bound row {i} unsatisfiable with zero coupling")
                continue
            if Qm[i] > Qp[i] + _EMPTY_ROW_TOL:
                raise InfeasibleStep(f"bound row {i} has crossed bounds")
            rows.append(([(i + 1, c_right), (i, c_left)], Qm[i], Qp[i]))

    Qm, Qp, *_ = depth_bounds(fields, iface, u_pad, dt, dx)
    add_two_sided(Qm, Qp, iface.g_ad_y)
    if include_q:
        Qmq, Qpq, *_ = discharge_bounds(fields, iface, u_pad, dt, dx)
        add_two_sided(Qmq, Qpq, iface.g_ad_q)

    A, d_right, d_left = entropy_terms(fields, iface, v_hat_y, v_hat_q,
                                       dt, dx, params)
    for i in range(n):
        if d_right[i] == 0.0 and d_left[i] == 0.0:
            if A[i] > _EMPTY_ROW_TOL:
                raise InfeasibleStep(
                    f"entropy row {i} positive with zero coupling")
            continue
        rows.append(([(i + 1, d_right[i]), (i, d_left[i])], A[i], np.inf))

    return LpProblem(n_vars=n_ifc, objective=np.ones(n_ifc),
                     var_lo=np.zeros(n_ifc), var_hi=np.ones(n_ifc),
                     rows=rows)


def _stop_reached(y_new, q_new, y_old, q_old, a_new, a_old,
                  cfg: IterationConfig) -> bool:
    ry = np.abs(y_new - y_old) / np.maximum(cfg.delta, np.abs(y_new))
    rq = np.abs(q_new - q_old) / np.maximum(cfg.delta, np.abs(q_new))
    da = np.abs(a_new - a_old)
    return bool(np.all(ry < cfg.eps1) and np.all(rq < cfg.eps1)
                and np.all(da < cfg.eps2))


def fixed_point_limiters(fields: CellField, iface: InterfaceData, u_pad,
                         dt, dx, params: PhysicsParams,
                         cfg: IterationConfig, use_lp: bool, include_q: bool,
                         max_iters: int | None = None):
    """Alternate limiter computation and the explicit hybrid update.

    Starts from the pre-step state with zero limiters; each pass computes
    alpha at the current candidate state (LP or closed form) and applies the
    explicit update.  Returns (alpha, y_hat, q_hat, iterations, converged,
    bundle).  Raises InfeasibleStep if the program is unsolvable at this dt.
    """
    iters_cap = cfg.max_iters if max_iters is None else max_iters
    y_hat = fields.y
    q_hat = fields.q
    alpha = np.zeros(iface.n_interfaces)
    bundle = None
    converged = False
    iterations = 0
    for _ in range(iters_cap):
        if use_lp:
            problem = assemble_lp(fields, iface, y_hat, q_hat, u_pad, dt, dx,
                                  params, include_q)
            sol = solve_lp(problem)
            if sol.status != OPTIMAL:
                raise InfeasibleStep(f"limiter program {sol.status}")
            alpha_new = np.clip(sol.x, 0.0, 1.0)
        else:
            bundle = approximate_limiters(fields, iface, y_hat, q_hat, u_pad,
                                          dt, dx, params, include_q)
            alpha_new = bundle.alpha
        y_new, q_new = apply_fluxes(fields.y, fields.q, iface, alpha_new,
                                    dt, dx)
        iterations += 1
        converged = _stop_reached(y_new, q_new, y_hat, q_hat,
                                  alpha_new, alpha, cfg)
        y_hat, q_hat, alpha = y_new, q_new, alpha_new
        if converged:
            break
    if bundle is None:
        bundle = LimiterBundle(alpha=alpha)
    else:
        bundle.alpha = alpha
    return alpha, y_hat, q_hat, iterations, converged, bundle
