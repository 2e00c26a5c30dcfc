"""Time integration: CFL selection, low-order/hybrid steps, variant dispatch.

Scheme variants (tags as used in run configs and reports):

* LOW   pure first-order reconstruction scheme with Rusanov flux
* PP    positivity-preserving closed-form limiters
* AHE   closed-form level+entropy limiters (two passes)
* AHQE  closed-form level+discharge+entropy limiters
* LHE   exact limiter program, level+entropy rows
* LHQE  exact limiter program, level+discharge+entropy rows

Entropy-audited variants cap dt with the entropy budget bound and re-check
the per-cell inequality after every step, halving dt on violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import limiter as limiter_mod
from .core import (CellField, Grid1D, PhysicsParams, apply_depth_floor,
                   desingularized_velocity)
from .entropy import AUDIT_TOL, entropy_dt_bound, entropy_residual
from .limiter import InfeasibleStep, IterationConfig
from .reconstruction import InterfaceData, apply_fluxes, assemble

VARIANT_TAGS = ("LOW", "PP", "AHE", "AHQE", "LHE", "LHQE")

_MAX_HALVINGS = 10
_NEG_DEPTH_TOL = -1e-14


class SolverAbort(RuntimeError):
    """A step could not be completed within the retry budget."""


@dataclass(frozen=True)
class SchemeVariant:
    tag: str
    limiter: str            # none | pp | approx | lp
    include_q: bool
    wavespeed_mode: str
    audit_enabled: bool

    @classmethod
    def from_tag(cls, tag: str, wavespeed_mode: str | None = None,
                 audit: bool | None = None) -> "SchemeVariant":
        tag = tag.upper()
        table = {
            "LOW": ("none", False, "basic", False),
            "PP": ("pp", False, "basic", False),
            "AHE": ("approx", False, "topography_entropy", True),
            "AHQE": ("approx", True, "topography_entropy", True),
            "LHE": ("lp", False, "topography_entropy", True),
            "LHQE": ("lp", True, "topography_entropy", True),
        }
        if tag not in table:
            raise ValueError(f"unknown variant {tag!r}; valid: "
                             + ", ".join(VARIANT_TAGS))
        lim, incq, mode, aud = table[tag]
        if wavespeed_mode is not None:
            mode = wavespeed_mode
        if audit is not None:
            aud = audit
        if tag.endswith("E") and tag != "PP":
            aud = True  # entropy-constrained variants are always audited
        return cls(tag=tag, limiter=lim, include_q=incq,
                   wavespeed_mode=mode, audit_enabled=aud)


@dataclass(frozen=True)
class BoundaryCondition:
    kind: str               # wall | open | inflow_discharge | outflow_level
    value: float = 0.0

    @classmethod
    def wall(cls):
        return cls("wall")

    @classmethod
    def open(cls):
        return cls("open")

    @classmethod
    def inflow_discharge(cls, q_in: float):
        return cls("inflow_discharge", q_in)

    @classmethod
    def outflow_level(cls, w_out: float):
        return cls("outflow_level", w_out)


def _ghost(y, q, z, bc: BoundaryCondition):
    """Ghost-cell (y, q, z) next to the edge cell (y, q, z) given."""
    if bc.kind == "wall":
        return y, -q, z
    if bc.kind == "open":
        return y, q, z
    if bc.kind == "inflow_discharge":
        return y, bc.value, z
    if bc.kind == "outflow_level":
        return max(bc.value - z, 0.0), q, z
    raise ValueError(f"unknown boundary kind {bc.kind!r}")


def apply_boundary(fields: CellField, bc_left: BoundaryCondition,
                   bc_right: BoundaryCondition):
    """Ghost-padded (y, q, z) arrays of length N+2."""
    n = fields.n_cells
    y = np.empty(n + 2)
    q = np.empty(n + 2)
    z = np.empty(n + 2)
    y[1:-1] = fields.y
    q[1:-1] = fields.q
    z[1:-1] = fields.z
    y[0], q[0], z[0] = _ghost(fields.y[0], fields.q[0], fields.z[0], bc_left)
    y[-1], q[-1], z[-1] = _ghost(fields.y[-1], fields.q[-1], fields.z[-1],
                                 bc_right)
    return y, q, z


def cfl_dt(fields: CellField, iface: InterfaceData, u_pad, dx: float,
           cfl_safety: float, dt_max: float) -> float:
    """Time step from the wave-speed bound, capped by depth positivity."""
    c = iface.c
    denom = c[1:] - u_pad[2:] + c[:-1] + u_pad[:-2]
    dmax = float(np.max(denom, initial=0.0))
    dt = cfl_safety * 2.0 * dx / dmax if dmax > 0.0 else np.inf
    drain = (0.5 * (c[1:] + u_pad[1:-1]) * iface.y_minus[1:]
             + 0.5 * (c[:-1] - u_pad[1:-1]) * iface.y_plus[:-1])
    pos = drain > 0.0
    if np.any(pos):
        dt = min(dt, float(np.min(dx * fields.y[pos] / drain[pos])))
    if not np.isfinite(dt):
        dt = dt_max
    return min(dt, dt_max)


def _step_arrays(fields: CellField, iface: InterfaceData, alpha, dt, dx,
                 strict_positivity: bool) -> CellField:
    y_new, q_new = apply_fluxes(fields.y, fields.q, iface, alpha, dt, dx)
    worst = float(np.min(y_new, initial=0.0))
    if worst < _NEG_DEPTH_TOL:
        if strict_positivity:
            raise SolverAbort(
                f"negative depth {worst:.3e} from the low-order step")
        raise InfeasibleStep(f"negative depth {worst:.3e}")
    np.maximum(y_new, 0.0, out=y_new)
    apply_depth_floor(y_new, q_new)
    return CellField(y=y_new, q=q_new, z=fields.z)


def low_order_step(fields: CellField, iface: InterfaceData, dt: float,
                   dx: float) -> CellField:
    """One explicit step of the unlimited scheme."""
    return _step_arrays(fields, iface, None, dt, dx, strict_positivity=True)


def hybrid_step(fields: CellField, iface: InterfaceData, alpha, dt: float,
                dx: float) -> CellField:
    """One explicit step with limited antidiffusive fluxes added."""
    strict = alpha is None
    return _step_arrays(fields, iface, alpha, dt, dx,
                        strict_positivity=strict)


def theorem_bounds_margin(fields: CellField, new: CellField,
                          iface: InterfaceData, u_pad, dt: float, dx: float,
                          g: float):
    """Violation of the local level/discharge bracket bounds for one step.

    Returns (viol_w, viol_q): the largest amount by which the bracketed
    update expression escapes [min, max] of the cell value and its
    neighbour-side interface reconstructions; non-positive means satisfied.
    """
    r = dx / dt
    c = iface.c
    u_l = u_pad[:-2]
    u_c = u_pad[1:-1]
    u_r = u_pad[2:]
    w = fields.y + fields.z
    w_hat = new.y + new.z

    M_w = (r * w_hat
           - 0.5 * (u_c + u_r) * iface.z_half[1:]
           - (0.5 * (c[1:] - u_r) * w - 0.5 * (c[1:] + u_c) * iface.w_minus[1:])
           + 0.5 * (u_c + u_l) * iface.z_half[:-1]
           - (0.5 * (c[:-1] + u_l) * w
              - 0.5 * (c[:-1] - u_c) * iface.w_plus[:-1]))
    w_lo = np.minimum(w, np.minimum(iface.w_minus[:-1], iface.w_plus[1:]))
    w_hi = np.maximum(w, np.maximum(iface.w_minus[:-1], iface.w_plus[1:]))
    viol_w = float(np.max(np.maximum(r * w_lo - M_w, M_w - r * w_hi),
                          initial=-np.inf))

    ym_r, yp_r = iface.y_minus[1:], iface.y_plus[1:]
    ym_l, yp_l = iface.y_minus[:-1], iface.y_plus[:-1]
    M_q = (r * new.q
           - (0.5 * (c[1:] - u_r) * fields.q
              - 0.5 * (c[1:] + u_c) * iface.q_minus[1:])
           + 0.5 * g * (0.5 * (ym_r * ym_r + yp_r * yp_r)
                        + (fields.y + ym_r) * (iface.z_half[1:] - fields.z))
           - 0.5 * g * (0.5 * (ym_l * ym_l + yp_l * yp_l)
                        + (fields.y + yp_l) * (iface.z_half[:-1] - fields.z))
           - (0.5 * (c[:-1] + u_l) * fields.q
              - 0.5 * (c[:-1] - u_c) * iface.q_plus[:-1]))
    q_lo = np.minimum(fields.q, np.minimum(iface.q_minus[:-1],
                                           iface.q_plus[1:]))
    q_hi = np.maximum(fields.q, np.maximum(iface.q_minus[:-1],
                                           iface.q_plus[1:]))
    viol_q = float(np.max(np.maximum(r * q_lo - M_q, M_q - r * q_hi),
                          initial=-np.inf))
    return viol_w, viol_q


@dataclass
class StepRecord:
    step: int
    time: float
    dt: float
    mass: float
    min_depth: float
    max_residual: float      # nan when the audit is off
    alpha_sum: float
    alpha_min: float
    fp_iters: int
    fp_converged: bool


@dataclass
class AdvanceResult:
    fields: CellField
    time: float
    n_steps: int
    summary: list[StepRecord] = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    audit_violations: list = field(default_factory=list)


def _compute_alpha(variant: SchemeVariant, fields, iface, u_pad, dt, dx,
                   params, iter_cfg):
    """Limiters for one step attempt: (alpha, bundle, iters, converged)."""
    if variant.limiter == "none":
        return None, None, 0, True
    if variant.limiter == "pp":
        return limiter_mod.pp_limiters(iface), None, 0, True
    use_lp = variant.limiter == "lp"
    # non-converged iterates are accepted; the residual audit gates the step
    alpha, _, _, iters, converged, bundle = limiter_mod.fixed_point_limiters(
        fields, iface, u_pad, dt, dx, params, iter_cfg, use_lp,
        variant.include_q)
    return alpha, bundle, iters, converged


def advance(grid: Grid1D, fields: CellField, variant: SchemeVariant,
            bc_left: BoundaryCondition, bc_right: BoundaryCondition,
            t_end: float, params: PhysicsParams,
            iter_cfg: IterationConfig | None = None,
            snapshot_times=(), cfl_safety: float = 0.45,
            dt_max: float = 1.0, max_steps: int | None = None,
            audit_tol: float = AUDIT_TOL,
            per_step=None) -> AdvanceResult:
    """March the scheme to t_end, recording summaries and snapshots.

    per_step, if given, is called after each accepted step with
    (step_index, time, fields_old, fields_new, iface, u_pad, alpha, dt, dx)
    for audits and dumps.  Snapshot times are hit exactly by clipping dt.
    """
    if iter_cfg is None:
        iter_cfg = IterationConfig()
    dx = grid.dx
    result = AdvanceResult(fields=fields.copy(), time=0.0, n_steps=0)
    events = sorted({float(ts) for ts in snapshot_times if 0.0 < ts <= t_end})
    if 0.0 in [float(ts) for ts in snapshot_times]:
        result.snapshots[0.0] = fields.copy()
    t = 0.0
    step = 0
    fields = fields.copy()

    while t < t_end and (max_steps is None or step < max_steps):
        y_pad, q_pad, z_pad = apply_boundary(fields, bc_left, bc_right)
        iface = assemble(y_pad, q_pad, z_pad, params, dx,
                         mode=variant.wavespeed_mode)
        u_pad = desingularized_velocity(y_pad, q_pad, params.eps_desing)
        dt = cfl_dt(fields, iface, u_pad, dx, cfl_safety, dt_max)
        if variant.audit_enabled:
            dt = min(dt, entropy_dt_bound(fields, iface, dx, params))
        next_event = events[0] if events else t_end
        hit_event = t + dt >= next_event
        if hit_event:
            dt = next_event - t
        if not dt > 0.0:
            raise SolverAbort(f"non-positive dt at t={t:.6g}")

        accepted = False
        new_fields = None
        alpha = bundle = None
        iters = 0
        converged = True
        for _ in range(_MAX_HALVINGS + 1):
            try:
                alpha, bundle, iters, converged = _compute_alpha(
                    variant, fields, iface, u_pad, dt, dx, params, iter_cfg)
                new_fields = hybrid_step(fields, iface, alpha, dt, dx)
            except InfeasibleStep:
                dt *= 0.5
                hit_event = False
                continue
            if variant.audit_enabled:
                res = entropy_residual(fields, new_fields, iface, alpha, dt,
                                       dx, params)
                max_res = float(np.max(res, initial=-np.inf))
                if max_res > audit_tol:
                    bad = np.nonzero(res > audit_tol)[0]
                    result.audit_violations.append(
                        (step, t + dt, [int(b) for b in bad[:16]], max_res))
                    dt *= 0.5
                    hit_event = False
                    continue
            else:
                max_res = np.nan
            accepted = True
            break
        if not accepted:
            raise SolverAbort(
                f"step {step} rejected after {_MAX_HALVINGS} dt halvings "
                f"at t={t:.6g}")

        t = next_event if hit_event else t + dt
        step += 1
        if per_step is not None:
            per_step(step, t, fields, new_fields, iface, u_pad, alpha, dt, dx)
        fields = new_fields
        asum = float(np.sum(alpha)) if alpha is not None else 0.0
        amin = float(np.min(alpha)) if alpha is not None else 0.0
        result.summary.append(StepRecord(
            step=step, time=t, dt=dt, mass=float(np.sum(fields.y) * dx),
            min_depth=float(np.min(fields.y)), max_residual=max_res,
            alpha_sum=asum, alpha_min=amin, fp_iters=iters,
            fp_converged=bool(converged)))
        if hit_event and events and t == events[0]:
            result.snapshots[t] = fields.copy()
            events.pop(0)

    result.fields = fields
    result.time = t
    result.n_steps = step
    return result
