"""Reference solutions and benchmark definitions.

Closed-form references: the classical wet/dry dam-break solutions and the
steady transcritical profile over a parabolic bump with a stationary
hydraulic jump.  Root finding is bracketing bisection followed by a Newton
polish; residual-style checks (jump conditions, energy constants) are the
correctness oracles for all of them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Grid1D
from .stepper import BoundaryCondition

BENCHMARK_NAMES = ("wet_dambreak", "dry_dambreak", "step_dambreak",
                   "transcritical_bump", "drainage_hump")

_ROOT_TOL = 1e-12
_BISECT_CAP = 200


def _bisect_newton(f, df, lo, hi):
    """Bracketing bisection to ~1e-12, then a few Newton steps."""
    flo = f(lo)
    fhi = f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0.0:
        raise ValueError(f"root not bracketed in [{lo}, {hi}]")
    for _ in range(_BISECT_CAP):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or (hi - lo) < _ROOT_TOL * max(1.0, abs(mid)):
            break
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    x = 0.5 * (lo + hi)
    if df is not None:
        for _ in range(4):
            d = df(x)
            if d == 0.0:
                break
            x -= f(x) / d
    return x


# ---------------------------------------------------------------------------
# dam breaks on a flat bed
# ---------------------------------------------------------------------------

def stoker_star_depth(h_l: float, h_r: float, g: float) -> float:
    """Intermediate depth of the wet dam break (rarefaction + shock)."""

    def match(h):
        return (2.0 * (np.sqrt(g * h_l) - np.sqrt(g * h))
                - (h - h_r) * np.sqrt(0.5 * g * (h + h_r) / (h * h_r)))

    def dmatch(h):
        e = 1e-8 * h
        return (match(h + e) - match(h - e)) / (2.0 * e)

    return _bisect_newton(match, dmatch, h_r * (1.0 + 1e-12), h_l)


def stoker_wet(x, t: float, h_l: float, h_r: float, g: float,
               x_dam: float = 0.0):
    """Depth and velocity of the dam break onto a wet bed at time t."""
    if not (h_l > h_r > 0.0):
        raise ValueError("requires h_l > h_r > 0")
    x = np.asarray(x, dtype=float)
    xi = np.where(t > 0.0, (x - x_dam) / max(t, np.finfo(float).tiny), np.inf)
    if t == 0.0:
        h = np.where(x <= x_dam, h_l, h_r)
        return h, np.zeros_like(h)
    h_m = stoker_star_depth(h_l, h_r, g)
    u_m = 2.0 * (np.sqrt(g * h_l) - np.sqrt(g * h_m))
    s = h_m * u_m / (h_m - h_r)  # shock speed from mass conservation
    c_l = np.sqrt(g * h_l)
    c_m = np.sqrt(g * h_m)
    head = -c_l
    tail = u_m - c_m

    h_fan = (2.0 * c_l - xi) ** 2 / (9.0 * g)
    u_fan = 2.0 / 3.0 * (xi + c_l)
    h = np.select([xi <= head, xi < tail, xi < s],
                  [h_l, h_fan, h_m], default=h_r)
    u = np.select([xi <= head, xi < tail, xi < s],
                  [0.0, u_fan, u_m], default=0.0)
    return h, u


def ritter_dry(x, t: float, h_l: float, g: float, x_dam: float = 0.0):
    """Depth and velocity of the dam break onto a dry bed at time t."""
    if not h_l > 0.0:
        raise ValueError("requires h_l > 0")
    x = np.asarray(x, dtype=float)
    if t == 0.0:
        h = np.where(x <= x_dam, h_l, 0.0)
        return h, np.zeros_like(h)
    xi = (x - x_dam) / t
    c_l = np.sqrt(g * h_l)
    h_fan = (2.0 * c_l - xi) ** 2 / (9.0 * g)
    u_fan = 2.0 / 3.0 * (xi + c_l)
    h = np.select([xi <= -c_l, xi < 2.0 * c_l], [h_l, h_fan], default=0.0)
    u = np.select([xi <= -c_l, xi < 2.0 * c_l], [0.0, u_fan], default=0.0)
    return h, u


# ---------------------------------------------------------------------------
# steady transcritical flow with a hydraulic jump over a parabolic bump
# ---------------------------------------------------------------------------

def bathymetry_bump(x):
    """Parabolic bump of height 0.2 between x = 8 and x = 12."""
    x = np.asarray(x, dtype=float)
    return np.where((x > 8.0) & (x < 12.0), 0.2 - 0.05 * np.square(x - 10.0),
                    0.0)


def _energy_depth(E, q, g, branch: str) -> float:
    """Depth with specific energy E at discharge q: h + q^2/(2 g h^2) = E."""
    h_c = (q * q / g) ** (1.0 / 3.0)

    def f(h):
        return h + q * q / (2.0 * g * h * h) - E

    def df(h):
        return 1.0 - q * q / (g * h ** 3)

    if branch == "subcritical":
        return _bisect_newton(f, df, h_c, E * (1.0 + 1e-9))
    return _bisect_newton(f, df, 1e-12, h_c)


def transcritical_shock_bump(x, q_in: float = 0.18, w_out: float = 0.33,
                             g: float = 9.81):
    """Steady depth/discharge profile: critical at the crest, supercritical
    behind it, then a stationary jump matching the downstream level."""
    x = np.asarray(x, dtype=float)
    z = bathymetry_bump(x)
    z_crest = 0.2
    x_crest = 10.0
    h_c = (q_in * q_in / g) ** (1.0 / 3.0)
    E_up = 1.5 * h_c + z_crest          # energy head through the crest
    E_dn = w_out + q_in * q_in / (2.0 * g * w_out * w_out)

    def momentum_flux(h):
        return q_in * q_in / h + 0.5 * g * h * h

    def jump_mismatch(xs):
        zs = float(bathymetry_bump(xs))
        h1 = _energy_depth(E_up - zs, q_in, g, "supercritical")
        h2 = _energy_depth(E_dn - zs, q_in, g, "subcritical")
        return momentum_flux(h1) - momentum_flux(h2)

    x_jump = _bisect_newton(jump_mismatch, None, x_crest + 1e-9, 12.0)

    h = np.empty_like(z)
    for i, (xi, zi) in enumerate(zip(x, z)):
        if xi <= x_crest:
            h[i] = _energy_depth(E_up - zi, q_in, g, "subcritical")
        elif xi < x_jump:
            h[i] = _energy_depth(E_up - zi, q_in, g, "supercritical")
        else:
            h[i] = _energy_depth(E_dn - zi, q_in, g, "subcritical")
    return h, np.full_like(h, q_in)


# ---------------------------------------------------------------------------
# error norm and benchmark catalog
# ---------------------------------------------------------------------------

def l1_error(numeric, reference) -> float:
    """Mean absolute difference of two equally-sampled cell arrays."""
    numeric = np.asarray(numeric, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if numeric.shape != reference.shape:
        raise ValueError("sample counts differ")
    return float(np.mean(np.abs(numeric - reference)))


def level_resting_state(z: np.ndarray, w: float):
    """(y, z) of a resting state with level w, exact in floating point.

    Nudges depths (and, where the float grid of y + z skips w, the bottom
    by one or two ulps) until y + z rounds exactly to w in every wet cell,
    so the discrete lake at rest is a bitwise fixed point of the scheme.
    Cells with bottom above w stay dry.
    """
    z = np.array(z, dtype=float)
    y = np.maximum(w - z, 0.0)
    for i in range(z.shape[0]):
        if y[i] == 0.0 or z[i] >= w:
            y[i] = 0.0
            continue
        done = False
        zi = z[i]
        for _ in range(5):              # widen the z candidate one ulp a time
            yi = max(w - zi, 0.0)
            for _ in range(64):
                s = yi + zi
                if s == w:
                    done = True
                    break
                yi = np.nextafter(yi, np.inf if s < w else -np.inf)
            if done:
                break
            zi = np.nextafter(zi, np.inf)
        if not done:
            raise AssertionError("could not level resting state")
        y[i] = yi
        z[i] = zi
    return y, z


def _resting_initial(x, z, w):
    y, z_adj = level_resting_state(z, w)
    return y, np.zeros_like(x), z_adj


@dataclass
class BenchmarkCase:
    """Named initial-value problem with boundary conditions and reference."""

    name: str
    x0: float
    x1: float
    default_n: int
    t_end: float
    g: float
    bc_left: BoundaryCondition
    bc_right: BoundaryCondition
    bathymetry: callable
    initial: callable                  # x, z -> (y, q, z)
    reference_kind: str                # analytic | fine_grid_file | none
    reference: callable | None = None  # x, t -> (h, q)
    snapshot_times: tuple = ()

    def grid(self, n_cells: int | None = None) -> Grid1D:
        n = self.default_n if n_cells is None else n_cells
        return Grid1D.from_extent(self.x0, self.x1, n)

    def fields(self, grid: Grid1D):
        from .core import CellField
        x = grid.centers()
        z = self.bathymetry(x)
        y, q, z = self.initial(x, z)
        return CellField(y=np.asarray(y, dtype=float),
                         q=np.asarray(q, dtype=float),
                         z=np.asarray(z, dtype=float))


def make_benchmark(name: str) -> BenchmarkCase:
    if name == "wet_dambreak":
        return BenchmarkCase(
            name=name, x0=0.0, x1=1000.0, default_n=100, t_end=10.0, g=9.81,
            bc_left=BoundaryCondition.open(),
            bc_right=BoundaryCondition.open(),
            bathymetry=lambda x: np.zeros_like(x),
            initial=lambda x, z: (np.where(x <= 500.0, 100.0, 1.0),
                                  np.zeros_like(x), z),
            reference_kind="analytic",
            reference=lambda x, t: (
                lambda hu: (hu[0], hu[0] * hu[1]))(
                    stoker_wet(x, t, 100.0, 1.0, 9.81, x_dam=500.0)),
            snapshot_times=(10.0,))
    if name == "dry_dambreak":
        return BenchmarkCase(
            name=name, x0=0.0, x1=1000.0, default_n=100, t_end=7.0, g=9.81,
            bc_left=BoundaryCondition.open(),
            bc_right=BoundaryCondition.open(),
            bathymetry=lambda x: np.zeros_like(x),
            initial=lambda x, z: (np.where(x <= 500.0, 100.0, 0.0),
                                  np.zeros_like(x), z),
            reference_kind="analytic",
            reference=lambda x, t: (
                lambda hu: (hu[0], hu[0] * hu[1]))(
                    ritter_dry(x, t, 100.0, 9.81, x_dam=500.0)),
            snapshot_times=(7.0,))
    if name == "step_dambreak":
        # bottom drops by 1 m at x = 0; level 1.75 m upstream, 1.0 downstream
        return BenchmarkCase(
            name=name, x0=-1.0, x1=1.0, default_n=200, t_end=0.1, g=9.81,
            bc_left=BoundaryCondition.open(),
            bc_right=BoundaryCondition.open(),
            bathymetry=lambda x: np.where(x <= 0.0, 1.0, 0.0),
            initial=lambda x, z: (np.where(x <= 0.0, 0.75, 1.0),
                                  np.zeros_like(x), z),
            reference_kind="fine_grid_file",
            snapshot_times=(0.1,))
    if name == "transcritical_bump":
        return BenchmarkCase(
            name=name, x0=0.0, x1=25.0, default_n=100, t_end=200.0, g=9.81,
            bc_left=BoundaryCondition.inflow_discharge(0.18),
            bc_right=BoundaryCondition.outflow_level(0.33),
            bathymetry=bathymetry_bump,
            initial=lambda x, z: _resting_initial(x, z, 0.33),
            reference_kind="analytic",
            reference=lambda x, t: transcritical_shock_bump(x),
            snapshot_times=(200.0,))
    if name == "drainage_hump":
        # half of a symmetric reservoir drained through the open right end;
        # water remains trapped left of the cosine hump
        def hump(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x - 0.5) < 0.1,
                            0.25 * (1.0 + np.cos(np.pi * (x - 0.5) / 0.1)),
                            0.0)

        return BenchmarkCase(
            name=name, x0=0.0, x1=1.0, default_n=200, t_end=1.0, g=9.81,
            bc_left=BoundaryCondition.wall(),
            bc_right=BoundaryCondition.open(),
            bathymetry=hump,
            initial=lambda x, z: _resting_initial(x, z, 1.0),
            reference_kind="none",
            snapshot_times=(0.15, 0.25, 0.5, 1.0))
    raise ValueError(f"unknown benchmark {name!r}; valid: "
                     + ", ".join(BENCHMARK_NAMES))
