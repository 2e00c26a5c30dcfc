"""Pure-numpy implementations of the hot kernels.

These are the reference semantics for the compiled extension in
``_kernels.pyx``; both backends must produce identical results (same
operation order, no fused multiply-add), so either can back the solver.

Speed modes: 0 = plain local speed, 1 = adds the homogeneous entropy-stable
roots, 2 = adds the variable-topography entropy-stable roots.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

_A_DEGENERATE = 1e-12


def assemble_interfaces(y, q, z, w, u, g, mode):
    """Interface reconstruction, speeds, fluxes, sources, entropy fluxes.

    Inputs are ghost-padded per-cell arrays of length N+2; outputs are
    per-interface arrays of length N+1 (interface j sits between padded
    cells j and j+1).

    Returns (z_half, y_minus, y_plus, q_minus, q_plus, w_minus, w_plus, c,
    g_low_y, g_low_q, g_low_q_left, g_low_q_right, g_ad_y, g_ad_q, G_low,
    G_ad).  g_low_q_left/right are the momentum fluxes seen by the left and
    right cell with the bed-slope source folded in; they are grouped so that
    for a resting state with bitwise-uniform level the cancellation against
    the cell pressure is exact (the source itself is g_low_q minus them).
    """
    yl = y[:-1]
    yr = y[1:]
    zl = z[:-1]
    zr = z[1:]
    wl = w[:-1]
    wr = w[1:]
    ul = u[:-1]
    ur = u[1:]

    z_half = np.minimum(np.maximum(zl, zr), np.minimum(wl, wr))
    cut_l = (wl - z_half) < yl   # reconstruction truncated by the bottom step
    cut_r = (wr - z_half) < yr
    ym = np.maximum(np.where(cut_l, wl - z_half, yl), 0.0)
    yp = np.maximum(np.where(cut_r, wr - z_half, yr), 0.0)
    qm = ym * ul
    qp = yp * ur
    wm = ym + z_half
    wp = yp + z_half

    c = np.maximum(np.abs(ul) + np.sqrt(g * ym), np.abs(ur) + np.sqrt(g * yp))

    if mode == 1:
        du = ur - ul
        disc_l = np.sqrt(du * du + 4.0 * g * yl)
        disc_r = np.sqrt(du * du + 4.0 * g * yr)
        c = np.maximum(c, 0.5 * (-ur - ul + disc_l))
        c = np.maximum(c, 0.5 * (ur + ul + disc_r))
    elif mode == 2:
        # Quadratic lower bounds from the interface-state entropy budget of
        # each adjacent cell; a degenerate leading coefficient falls back to
        # the linear-term root (constraint is vacuous when both vanish).
        dw_l = wp - wl
        a_m = (yp - ym) * (wp + wm - 2.0 * wl)
        b_m = (ym - yl) * (ym - yl) - (yp - yl) * (yp - yl) \
            + 2.0 * (yp - yl) * dw_l
        disc_m = (a_m * ur - b_m * ul) ** 2 + 4.0 * g * a_m * yp * dw_l * dw_l
        with np.errstate(divide="ignore", invalid="ignore"):
            root_m = (a_m * ur + b_m * ul + np.sqrt(np.maximum(disc_m, 0.0))) \
                / (2.0 * a_m)
            lin_m = (ur * ul * b_m - g * yp * dw_l * dw_l) / (b_m * ul)
        use_quad = a_m > _A_DEGENERATE
        use_lin = ~use_quad & (np.abs(b_m * ul) > _A_DEGENERATE)
        c = np.maximum(c, np.where(use_quad & np.isfinite(root_m), root_m, 0.0))
        c = np.maximum(c, np.where(use_lin & np.isfinite(lin_m), lin_m, 0.0))

        dw_r = wm - wr
        a_p = (yp - ym) * (2.0 * wr - wp - wm)
        b_p = (yp - yr) * (yp - yr) - (ym - yr) * (ym - yr) \
            + 2.0 * (ym - yr) * dw_r
        disc_p = (a_p * ul - b_p * ur) ** 2 + 4.0 * g * a_p * ym * dw_r * dw_r
        with np.errstate(divide="ignore", invalid="ignore"):
            root_p = (-a_p * ul - b_p * ur + np.sqrt(np.maximum(disc_p, 0.0))) \
                / (2.0 * a_p)
            lin_p = (-ul * ur * b_p - g * ym * dw_r * dw_r) / (b_p * ur)
        use_quad = a_p > _A_DEGENERATE
        use_lin = ~use_quad & (np.abs(b_p * ur) > _A_DEGENERATE)
        c = np.maximum(c, np.where(use_quad & np.isfinite(root_p), root_p, 0.0))
        c = np.maximum(c, np.where(use_lin & np.isfinite(lin_p), lin_p, 0.0))

    pm = (0.5 * g * ym) * ym
    pp = (0.5 * g * yp) * yp
    fm_q = qm * ul + pm
    fp_q = qp * ur + pp
    g_low_y = 0.5 * (qm + qp - c * (yp - ym))
    g_low_q = 0.5 * (fm_q + fp_q - c * (qp - qm))
    g_ad_y = 0.5 * c * (yp - ym)
    g_ad_q = 0.5 * c * (qp - qm)

    # One-sided momentum fluxes with the interface source folded in.  Where
    # the reconstruction was cut by the bottom step the source equals the
    # pressure difference between the cell and the reconstructed state, and
    # grouping it as (flux - interface pressure) + cell pressure makes the
    # lake-at-rest cancellation exact in floating point; otherwise the plain
    # depth-times-step form applies.
    g_low_q_left = np.where(
        cut_l, (g_low_q - pm) + (0.5 * g * yl) * yl,
        g_low_q - (0.5 * g * (yl + ym)) * (zl - z_half))
    g_low_q_right = np.where(
        cut_r, (g_low_q - pp) + (0.5 * g * yr) * yr,
        g_low_q - (0.5 * g * (yp + yr)) * (zr - z_half))

    Um = 0.5 * (qm * ul + g * ym * ym) + g * ym * z_half
    Up = 0.5 * (qp * ur + g * yp * yp) + g * yp * z_half
    Fm = qm * (0.5 * ul * ul + g * wm)
    Fp = qp * (0.5 * ur * ur + g * wp)
    G_low = 0.5 * (Fm + Fp - c * (Up - Um))
    G_ad = 0.5 * c * (Up - Um)

    return (z_half, ym, yp, qm, qp, wm, wp, c, g_low_y, g_low_q,
            g_low_q_left, g_low_q_right, g_ad_y, g_ad_q, G_low, G_ad)


# ---------------------------------------------------------------------------
# Simplex primitives.  The driver in lp.py owns all bookkeeping; these are the
# inner scans over tableau rows/columns.
# ---------------------------------------------------------------------------

def pick_entering_dantzig(d, status, lo, hi, tol):
    """Most-improving eligible nonbasic column, or -1 (first index on ties)."""
    up = (status == 0) & (d > tol) & (hi > lo)
    dn = (status == 1) & (d < -tol) & (hi > lo)
    score = np.where(up, d, np.where(dn, -d, -np.inf))
    j = int(np.argmax(score))
    if score[j] == -np.inf:
        return -1
    return j


def pick_entering_bland(d, status, lo, hi, tol):
    """Lowest-index eligible nonbasic column, or -1."""
    up = (status == 0) & (d > tol) & (hi > lo)
    dn = (status == 1) & (d < -tol) & (hi > lo)
    idx = np.nonzero(up | dn)[0]
    if idx.size == 0:
        return -1
    return int(idx[0])


def ratio_test(col, xb, basis, lo, hi, s, own_range, piv_tol):
    """Step length along entering direction s and the blocking row.

    Returns (t, r): r = -1 means no basic variable blocks (bound flip of the
    entering variable, t = own_range, possibly inf).  Ties prefer the
    blocking row whose basic variable has the smallest column index.
    """
    coef = s * col
    blo = lo[basis]
    bhi = hi[basis]
    t = np.full(coef.shape, np.inf)
    pos = coef > piv_tol
    neg = coef < -piv_tol
    with np.errstate(divide="ignore", invalid="ignore"):
        t[pos] = (xb[pos] - blo[pos]) / coef[pos]
        t[neg] = (xb[neg] - bhi[neg]) / coef[neg]
    np.maximum(t, 0.0, out=t)
    t_min = t.min() if t.size else np.inf
    if own_range <= t_min:
        return own_range, -1
    if not np.isfinite(t_min):
        return np.inf, -1
    rows = np.nonzero(t == t_min)[0]
    r = int(rows[np.argmin(basis[rows])])
    return float(t_min), r


def pivot_update(T, d, r, jq):
    """Gauss-Jordan elimination on column jq with pivot row r."""
    piv = T[r, jq]
    prow = T[r] / piv
    colq = T[:, jq].copy()
    T -= colq[:, None] * prow[None, :]
    T[r, :] = prow
    T[:, jq] = 0.0
    T[r, jq] = 1.0
    dq = d[jq]
    d -= dq * prow
    d[jq] = 0.0
