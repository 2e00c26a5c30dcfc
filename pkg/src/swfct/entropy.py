"""Total-energy entropy pair, discrete entropy fluxes, and audit quantities.

The convex entropy is the total energy U = (q^2/y + g y^2)/2 + g y z with
flux F = q^3/(2 y^2) + g q y + g q z; kinetic terms are evaluated through
the desingularized velocity so both are total on y >= 0 and vanish on dry
cells.  The audit checks the per-cell inequality

    U(new) - U(old) + (dt/dx) * [G_{i+1/2} - G_{i-1/2}] <= tol

with the low-order numerical entropy flux plus the limited antidiffusive
part, exactly mirroring the hybrid update.
"""

from __future__ import annotations

import numpy as np

from .core import CellField, PhysicsParams, desingularized_velocity
from .reconstruction import InterfaceData

# Absolute slack granted to the discrete entropy inequality (round-off scale
# for double precision at the benchmark magnitudes).
AUDIT_TOL = 1e-10

# Factor applied to the entropy Hessian eigenvalue when turning the implicit
# time-step bound into an a-priori one; the post-step residual check with
# halving is the authoritative guard.
LAMBDA_INFLATION = 2.0


def entropy(y, q, z, g, eps):
    """Total energy per cell; zero on dry cells."""
    u = desingularized_velocity(y, q, eps)
    return 0.5 * (u * q + g * np.square(y)) + g * np.asarray(y) * np.asarray(z)


def entropy_flux(y, q, z, g, eps):
    """Energy flux; odd in q, zero on dry cells."""
    u = desingularized_velocity(y, q, eps)
    return np.asarray(q) * (0.5 * u * u + g * (np.asarray(y) + np.asarray(z)))


def entropy_gradient(y, q, z, g, eps):
    """(dU/dy, dU/dq); on a dry cell this degenerates to (g z, 0)."""
    u = desingularized_velocity(y, q, eps)
    return g * (np.asarray(y) + np.asarray(z)) - 0.5 * u * u, u


def entropy_hessian_max_eig(y, q, g, eps):
    """Largest eigenvalue of the (y, q) Hessian of the entropy.

    The 2x2 Hessian is [[u^2/y + g, -u/y], [-u/y, 1/y]]; dry cells return
    +inf so callers fall back to the wave-speed time-step bound.
    """
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    q = np.atleast_1d(np.asarray(q, dtype=float))
    u = np.atleast_1d(desingularized_velocity(y, q, eps))
    lam = np.full(y.shape, np.inf)
    wet = y > 0.0
    yw = y[wet]
    uw = u[wet]
    trace = uw * uw / yw + g + 1.0 / yw
    det = g / yw
    lam[wet] = 0.5 * (trace + np.sqrt(np.maximum(trace * trace - 4.0 * det, 0.0)))
    if scalar:
        return float(lam[0])
    return lam


def proper_entropy_flux(y_minus, q_minus, y_plus, q_plus, z_half, c, g, eps):
    """Low-order and antidiffusive numerical entropy fluxes at an interface.

    Both evaluate U and F at the reconstructed states with the interface
    bottom; their sum is the central entropy flux.
    """
    Um = entropy(y_minus, q_minus, z_half, g, eps)
    Up = entropy(y_plus, q_plus, z_half, g, eps)
    Fm = entropy_flux(y_minus, q_minus, z_half, g, eps)
    Fp = entropy_flux(y_plus, q_plus, z_half, g, eps)
    G_low = 0.5 * (Fm + Fp - c * (Up - Um))
    G_ad = 0.5 * c * (Up - Um)
    return G_low, G_ad


def delta_G(y_l, q_l, z_l, y_r, q_r, z_r, c, g, eps):
    """Entropy-budget excess of one interface as seen by each adjacent cell.

    Returns (dG_minus, dG_plus): dG_minus charges the left cell through its
    right interface, dG_plus credits the right cell through its left
    interface.  An entropy-stable speed makes dG_minus <= 0 <= dG_plus.
    Diagnostic only; equals delta_G_definition up to round-off.
    """
    u_l = desingularized_velocity(y_l, q_l, eps)
    u_r = desingularized_velocity(y_r, q_r, eps)
    w_l = np.asarray(y_l) + np.asarray(z_l)
    w_r = np.asarray(y_r) + np.asarray(z_r)
    z_half = np.minimum(np.maximum(z_l, z_r), np.minimum(w_l, w_r))
    ym = np.maximum(np.minimum(w_l - z_half, y_l), 0.0)
    yp = np.maximum(np.minimum(w_r - z_half, y_r), 0.0)

    du = u_r - u_l
    dG_minus = 0.5 * (
        0.5 * u_r * yp * du * du
        + g * (u_r * yp - u_l * y_l) * (z_half - z_l)
        + g * (0.5 * u_l * np.square(ym - y_l)
               + (yp - y_l) * (u_r * yp - 0.5 * u_l * (yp + y_l)))
        - c * (0.5 * yp * du * du
               + 0.5 * g * np.square(yp - y_l) - 0.5 * g * np.square(ym - y_l)
               + g * (yp - ym) * (z_half - z_l)))
    dG_plus = 0.5 * (
        0.5 * u_l * ym * du * du
        - g * (u_l * ym - u_r * y_r) * (z_r - z_half)
        + g * (0.5 * u_r * np.square(yp - y_r)
               + (ym - y_r) * (u_l * ym - 0.5 * u_r * (ym + y_r)))
        + c * (0.5 * ym * du * du
               - 0.5 * g * np.square(yp - y_r) + 0.5 * g * np.square(ym - y_r)
               + g * (yp - ym) * (z_r - z_half)))
    return dG_minus, dG_plus


def delta_G_definition(y_l, q_l, z_l, y_r, q_r, z_r, c, g, eps):
    """Same quantities assembled from their defining flux combination."""
    u_l = desingularized_velocity(y_l, q_l, eps)
    u_r = desingularized_velocity(y_r, q_r, eps)
    w_l = np.asarray(y_l) + np.asarray(z_l)
    w_r = np.asarray(y_r) + np.asarray(z_r)
    z_half = np.minimum(np.maximum(z_l, z_r), np.minimum(w_l, w_r))
    ym = np.maximum(np.minimum(w_l - z_half, y_l), 0.0)
    yp = np.maximum(np.minimum(w_r - z_half, y_r), 0.0)
    qm = ym * u_l
    qp = yp * u_r
    gl_y = 0.5 * (qm + qp - c * (yp - ym))
    gl_q = 0.5 * (qm * u_l + 0.5 * g * ym * ym + qp * u_r + 0.5 * g * yp * yp
                  - c * (qp - qm))
    G_low, _ = proper_entropy_flux(ym, qm, yp, qp, z_half, c, g, eps)
    S_minus = 0.5 * g * (np.asarray(y_l) + ym) * (np.asarray(z_l) - z_half)
    S_plus = 0.5 * g * (yp + np.asarray(y_r)) * (np.asarray(z_r) - z_half)

    def one_side(yc, qc, zc, uc, S):
        Uy, Uq = entropy_gradient(yc, qc, zc, g, eps)
        f_q = qc * uc + 0.5 * g * np.square(yc)
        inner = Uy * (gl_y - qc) + Uq * (gl_q - S - f_q)
        return G_low - entropy_flux(yc, qc, zc, g, eps) - inner

    dG_minus = one_side(y_l, q_l, z_l, u_l, S_minus)
    dG_plus = one_side(y_r, q_r, z_r, u_r, S_plus)
    return dG_minus, dG_plus


def low_order_direction(iface: InterfaceData):
    """Per-cell update direction (g_diff - sources) of the unlimited scheme.

    Returns (D_y, D_q) such that the low-order step is v_new = v - (dt/dx) D.
    """
    D_y = iface.g_low_y[1:] - iface.g_low_y[:-1]
    D_q = iface.g_low_q_left[1:] - iface.g_low_q_right[:-1]
    return D_y, D_q


def entropy_dt_bound(fields: CellField, iface: InterfaceData, dx: float,
                     params: PhysicsParams,
                     inflation: float = LAMBDA_INFLATION,
                     slack: float = 0.5 * AUDIT_TOL) -> float:
    """Largest dt keeping the per-cell entropy budget within the audit slack.

    The budget of a low-order step with update direction D per cell is

        r(dt) ~ (dt/dx)^2 <U''(v) D, D>/2 - (dt/dx) (<U'(v), D> - G_diff)

    and the bound solves the quadratic r(dt) <= slack per cell, with the
    Hessian form at the pre-step state inflated by ``inflation`` to stand in
    for the unknown mid-segment value (the post-step residual re-check is
    what actually enforces the inequality).  The slack keeps round-off-scale
    cells from throttling dt to zero.  Dry cells and cells with a vanishing
    update direction impose no bound; returns +inf if none do.
    """
    g = params.g
    eps = params.eps_desing
    D_y, D_q = low_order_direction(iface)
    u = desingularized_velocity(fields.y, fields.q, eps)
    wet = fields.y > 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        quad = ((u * u / fields.y + g) * D_y * D_y
                - 2.0 * (u / fields.y) * D_y * D_q
                + D_q * D_q / fields.y) * inflation
    Uy, Uq = entropy_gradient(fields.y, fields.q, fields.z, g, eps)
    rhs = (Uy * D_y + Uq * D_q) - (iface.G_low[1:] - iface.G_low[:-1])
    a = quad / (2.0 * dx * dx)
    b = rhs / dx
    with np.errstate(divide="ignore", invalid="ignore"):
        dt_quad = (b + np.sqrt(np.maximum(b * b + 4.0 * a * slack, 0.0))) \
            / (2.0 * a)
        # no quadratic production: only a negative linear rate can bind
        dt_lin = np.where(b < 0.0, -slack / b, np.inf)
    # dry cells have a linear-in-dt budget with non-positive rate: no bound
    dt_cells = np.where(wet & (a > 0.0), dt_quad,
                        np.where(wet, dt_lin, np.inf))
    dt_cells = np.where(np.isnan(dt_cells), np.inf, dt_cells)
    bound = float(np.min(dt_cells, initial=np.inf))
    return max(bound, 0.0)


def entropy_residual(old: CellField, new: CellField, iface: InterfaceData,
                     alpha, dt: float, dx: float,
                     params: PhysicsParams) -> np.ndarray:
    """Per-cell discrete entropy inequality left-hand side for one step.

    alpha is the per-interface limiter actually applied (None means the pure
    low-order step).  Audited steps require residual <= AUDIT_TOL.
    """
    g = params.g
    eps = params.eps_desing
    G = iface.G_low
    if alpha is not None:
        G = G + np.asarray(alpha) * iface.G_ad
    U_old = entropy(old.y, old.q, old.z, g, eps)
    U_new = entropy(new.y, new.q, new.z, g, eps)
    return U_new - U_old + (dt / dx) * (G[1:] - G[:-1])
