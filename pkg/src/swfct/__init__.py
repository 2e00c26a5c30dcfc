"""Entropy-audited flux-corrected finite-volume solver for 1D shallow water
flows over variable bathymetry.

A first-order hydrostatic-reconstruction scheme with Rusanov flux supplies
the diffusive baseline; per-interface limiters blend in the central-flux
antidiffusion, chosen either by closed-form bounds or by maximizing the
total limiter sum with a small in-repo simplex, subject to local bound and
discrete entropy-inequality constraints.
"""

from ._backend import backend_name
from .core import CellField, Grid1D, PhysicsParams

__all__ = ["CellField", "Grid1D", "PhysicsParams", "backend_name"]

__version__ = "0.1.0"
