"""Simulation state and the three-way unknown partition.

X1 holds the per-cell flow unknowns interleaved as (P_g, S_w, S_h, T),
X2 the nodal displacements flattened (node-major, component-minor),
X3 the per-cell total porosity.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InternalError
from .grid import StructuredGrid

FLOW_VARS = ("P_g", "S_w", "S_h", "T")
N_FLOW_VARS = 4


@dataclass
class SimulationState:
    grid: StructuredGrid
    t: float
    P_g: np.ndarray
    S_w: np.ndarray
    S_h: np.ndarray
    T: np.ndarray
    phi: np.ndarray
    u: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("P_g", "S_w", "S_h", "T", "phi"):
            self.grid.check_field(getattr(self, name), "cell")
        if self.u is None:
            self.u = np.zeros((self.grid.n_nodes, self.grid.dim))
        else:
            self.u = np.asarray(self.u, dtype=float).reshape(
                self.grid.n_nodes, self.grid.dim
            )

    @property
    def S_g(self):
        return 1.0 - self.S_w - self.S_h

    @property
    def phi_eff(self):
        return self.phi * (1.0 - self.S_h)

    def copy(self):
        return SimulationState(
            grid=self.grid,
            t=self.t,
            P_g=self.P_g.copy(),
            S_w=self.S_w.copy(),
            S_h=self.S_h.copy(),
            T=self.T.copy(),
            phi=self.phi.copy(),
            u=self.u.copy(),
        )

    def validate(self, require_positive_pressure=True, sat_tol=1e-12):
        """Check saturation closure and admissibility bounds."""
        bad = []
        if np.any(self.S_w < -sat_tol) or np.any(self.S_h < -sat_tol):
            bad.append("negative saturation")
        if np.any(self.S_w + self.S_h > 1.0 + sat_tol):
            bad.append("S_w + S_h exceeds 1")
        if np.any(self.phi <= 0.0) or np.any(self.phi >= 1.0):
            bad.append("porosity outside (0, 1)")
        if np.any(self.T <= 0.0):
            bad.append("nonpositive temperature")
        if require_positive_pressure and np.any(self.P_g <= 0.0):
            bad.append("nonpositive gas pressure")
        if bad:
            raise InternalError("inadmissible state: " + ", ".join(bad))

    # -- packing helpers used by the flow Newton loop ------------------
    def pack_x1(self):
        out = np.empty(self.grid.n_cells * N_FLOW_VARS)
        out[0::4] = self.P_g
        out[1::4] = self.S_w
        out[2::4] = self.S_h
        out[3::4] = self.T
        return out

    def unpack_x1(self, x1):
        if x1.shape[0] != self.grid.n_cells * N_FLOW_VARS:
            raise InternalError(
                f"X1 has length {x1.shape[0]}, expected {self.grid.n_cells * N_FLOW_VARS}"
            )
        self.P_g = x1[0::4].copy()
        self.S_w = x1[1::4].copy()
        self.S_h = x1[2::4].copy()
        self.T = x1[3::4].copy()


def partition_state(state):
    """Split a state into (X1, X2, X3) vectors."""
    x1 = state.pack_x1()
    x2 = state.u.reshape(-1).copy()
    x3 = state.phi.copy()
    return x1, x2, x3


def assemble_state(grid, x1, x2, x3, t=0.0):
    """Inverse of partition_state."""
    if x1.shape[0] != grid.n_cells * N_FLOW_VARS:
        raise InternalError("X1 size mismatch")
    if x2.shape[0] != grid.n_nodes * grid.dim:
        raise InternalError("X2 size mismatch")
    if x3.shape[0] != grid.n_cells:
        raise InternalError("X3 size mismatch")
    return SimulationState(
        grid=grid,
        t=t,
        P_g=x1[0::4].copy(),
        S_w=x1[1::4].copy(),
        S_h=x1[2::4].copy(),
        T=x1[3::4].copy(),
        phi=x3.copy(),
        u=x2.copy().reshape(grid.n_nodes, grid.dim),
    )
