"""Implicit-Euler FV solve of the soil mass balance for total porosity, plus
the effective-porosity rate diagnostic."""

from dataclasses import dataclass

import numpy as np

from .errors import AssemblyError
from .newton import GridColoring, NewtonOptions, newton_solve


@dataclass
class PorosityOptions:
    newton: NewtonOptions = None
    warn_clip: bool = True

    def __post_init__(self):
        if self.newton is None:
            self.newton = NewtonOptions(rtol=1e-10, atol=1e-12, max_iter=15,
                                        scales=(1.0,))


class PorosityModel:
    """Solves d/dt[(1-phi) rho_s] + div[(1-phi) rho_s v_s] = 0 for phi."""

    def __init__(self, grid, soil_density_law, options=None):
        self.grid = grid
        self.law = soil_density_law
        self.options = options or PorosityOptions()
        self.coloring = GridColoring(grid, 1)
        self.clip_events = 0

    def _rho_s(self, phi, ctx):
        return self.law(
            dP_eff=ctx["dP_eff"], phi=phi, phi_eff=phi * (1.0 - ctx["S_h"]),
            eps_v=ctx["eps_v"], alpha=ctx["alpha"], B_m=ctx["B_m"],
            B_sh=ctx["B_sh"],
        )

    def residual_factory(self, phi_old, rho_s_old, dt, v_s, ctx):
        g = self.grid
        V = g.cell_volume
        mass_old = (1.0 - phi_old) * rho_s_old

        def residual(phi):
            if not np.all(np.isfinite(phi)):
                raise AssemblyError("non-finite porosity iterate")
            rho = self._rho_s(phi, ctx)
            mass = (1.0 - phi) * rho
            R = (mass - mass_old) * V / dt
            for face in self.grid.faces_info:
                L, Rc = face["left"], face["right"]
                v_face = 0.5 * (v_s[L, face["axis"]] + v_s[Rc, face["axis"]])
                up = np.where(v_face >= 0.0, L, Rc)
                flux = v_face * face["area"] * mass[up]
                np.add.at(R, L, flux)
                np.add.at(R, Rc, -flux)
            # boundary closure: extrapolate the boundary cell's content
            for tag, cells in g.boundary_cells.items():
                d = "xyz".index(tag[0])
                sign = -1.0 if tag.endswith("-") else 1.0
                v_b = v_s[cells, d] * sign      # outward normal velocity
                np.add.at(R, cells, v_b * g.face_area[d] * mass[cells])
            return R

        return residual

    def step(self, phi_old, rho_s_old, dt, v_s, ctx):
        """Advance porosity one implicit Euler step; returns (phi, diagnostics)."""
        if np.all(v_s == 0.0) and getattr(self.law, "kind", "") == "constant":
            return phi_old.copy(), None   # identity preservation, exact
        residual = self.residual_factory(phi_old, rho_s_old, dt, v_s, ctx)
        w = np.full(self.grid.n_cells,
                    self.grid.cell_volume * np.mean(rho_s_old) / dt)
        phi, diag = newton_solve(residual, phi_old.copy(), self.coloring, w,
                                 options=self.options.newton,
                                 project=self._project)
        clipped = np.clip(phi, 1e-6, 1.0 - 1e-6)
        if np.any(clipped != phi):
            self.clip_events += int(np.sum(clipped != phi))
        return clipped, diag

    @staticmethod
    def _project(phi):
        return np.clip(phi, 1e-6, 1.0 - 1e-6)


def effective_porosity_rate(dsigma_dt, dP_dt, div_term, q_dot_h, phi_e, B_sh, rho_sh):
    """Rate of change of effective porosity from stress, pressure, deformation
    and hydrate phase change (diagnostic cross-check)."""
    return (dsigma_dt / B_sh - phi_e * dP_dt / B_sh + div_term - q_dot_h / rho_sh)
