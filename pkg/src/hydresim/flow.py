"""Fully implicit finite-volume solver for the flow unknowns (P_g, S_w, S_h, T).

Component mass balances for CH4 and H2O, hydrate mass balance and a single
LTE energy balance, discretized with two-point flux approximation, per-phase
potential upwinding and implicit Euler. Solid deformation enters through the
lagged porosity field, the sediment velocity and the volumetric strain
supplied by the coupling loop.
"""

from dataclasses import dataclass, field

import numpy as np

from . import constitutive as cst
from . import kinetics as kin_mod
from .eos import peng_robinson_z
from .errors import AssemblyError, ConfigError
from .newton import GridColoring, NewtonOptions, newton_solve
from .state import N_FLOW_VARS

EQ_CH4, EQ_H2O, EQ_HYD, EQ_ENERGY = 0, 1, 2, 3
GRAVITY = 9.81


@dataclass
class TimeRamp:
    """value(t) = clip(start + rate * t, bounds); constant when rate = 0."""

    start: float
    rate: float = 0.0
    final: float = None

    def __call__(self, t):
        v = self.start + self.rate * t
        if self.final is not None:
            lo, hi = sorted((self.start, self.final))
            v = min(max(v, lo), hi)
        return v


@dataclass
class FlowBC:
    tag: str
    kind: str = "noflow"          # "noflow" | "dirichlet"
    P_g: object = None            # float or TimeRamp
    P_is_effective: bool = False
    S_w: float = None             # boundary saturation for inflow states
    S_h: float = 0.0
    T: float = None               # None -> adiabatic face
    box: tuple = None             # ((lo, hi), ...) face-centroid filter per axis


@dataclass
class WellSource:
    cell: int
    phase: str                    # "water" | "gas"
    mass_rate: object             # kg/s, negative = production; float or TimeRamp


@dataclass
class FlowOptions:
    energy_mode: str = "full"     # "full" | "isothermal"
    gravity: bool = False
    newton: NewtonOptions = field(default_factory=lambda: NewtonOptions(
        scales=(1e5, 1.0, 1.0, 1.0)))
    rho_ref: tuple = (50.0, 1000.0, 300.0, 2e6)   # eq scaling: CH4, H2O, hyd, energy
    # lateral thermal exchange with a surrounding bath (lab cells are jacketed
    # and immersed; 1D/2D sections cannot conduct laterally otherwise)
    bath_U: float = 0.0           # W/(m3 K), 0 disables
    bath_T: float = 273.15        # K


class FlowModel:
    def __init__(self, grid, params, K0, phi0, bcs=(), wells=(), options=None):
        self.grid = grid
        self.params = params
        self.K0 = np.broadcast_to(np.asarray(K0, dtype=float), (grid.n_cells,)).copy()
        self.phi0 = np.broadcast_to(np.asarray(phi0, dtype=float), (grid.n_cells,)).copy()
        self.options = options or FlowOptions()
        self.wells = list(wells)
        self.coloring = GridColoring(grid, N_FLOW_VARS)
        self._setup_faces()
        self._setup_bcs(bcs)
        self._uses_z = getattr(params.gas.density, "use_z", False)
        self._ctx = None

    # ------------------------------------------------------------------
    def _setup_faces(self):
        g = self.grid
        self.faces = []
        for d in range(g.dim):
            left, right = g.interior_faces[d]
            self.faces.append({
                "axis": d,
                "left": left,
                "right": right,
                "area": g.face_area[d],
                "dist": g.spacing[d],
            })

    def _setup_bcs(self, bcs):
        g = self.grid
        self.bc_faces = []
        for bc in bcs:
            if bc.kind == "noflow":
                continue
            if bc.tag not in g.boundary_cells:
                raise ConfigError(f"unknown boundary tag '{bc.tag}'")
            cells = g.boundary_cells[bc.tag]
            centers = g.boundary_face_centers(bc.tag)
            if bc.box is not None:
                mask = np.ones(len(cells), dtype=bool)
                for ax, bounds in enumerate(bc.box):
                    if bounds is None:
                        continue
                    lo, hi = bounds
                    mask &= (centers[:, ax] >= lo) & (centers[:, ax] <= hi)
                cells = cells[mask]
            d = "xyz".index(bc.tag[0])
            self.bc_faces.append({
                "bc": bc,
                "cells": cells,
                "area": g.face_area[d],
                "half_dist": 0.5 * g.spacing[d],
                "axis": d,
                "sign": -1.0 if bc.tag.endswith("-") else 1.0,
            })

    # ------------------------------------------------------------------
    def prepare_step(self, state_old, dt, phi_new=None, v_s=None, eps_v=None,
                     P_eff_ref=None, t_new=None):
        """Freeze the old-state storage and the lagged coupling fields."""
        g = self.grid
        n = g.n_cells
        ctx = {
            "dt": float(dt),
            "t_new": state_old.t + dt if t_new is None else t_new,
            "phi": state_old.phi.copy() if phi_new is None else np.asarray(phi_new, dtype=float),
            "phi_old": state_old.phi.copy(),
            "v_s": np.zeros((n, g.dim)) if v_s is None else np.asarray(v_s, dtype=float),
            "eps_v": np.zeros(n) if eps_v is None else np.asarray(eps_v, dtype=float),
            "P_eff_ref": np.full(n, np.nan) if P_eff_ref is None else np.asarray(P_eff_ref, dtype=float),
            "T_fixed": state_old.T.copy(),
        }
        self._ctx = ctx
        x1_old = state_old.pack_x1()
        old = self._eval_fields(x1_old, phi=ctx["phi_old"])
        ctx["storage_old"] = self._storage(old)
        # residual scaling weights, per cell and equation
        V = g.cell_volume
        w = np.empty(n * N_FLOW_VARS)
        for e, rho in enumerate(self.options.rho_ref):
            w[e::4] = V * np.maximum(self.phi0, 0.05) * rho / ctx["dt"]
        if self.options.energy_mode == "isothermal":
            w[EQ_ENERGY::4] = 1.0
        ctx["weights"] = w
        return ctx

    # ------------------------------------------------------------------
    def _eval_fields(self, x1, phi=None):
        p = self.params
        hyd = p.hydraulics
        P_g = x1[0::4]
        S_w = x1[1::4]
        S_h = x1[2::4]
        T = x1[3::4]
        phi = self._ctx["phi"] if phi is None else phi

        S_g, S_we, S_wf, S_gf = cst.derived_saturations(
            S_w, S_h, hyd.S_wr, hyd.S_gr, hyd.sat_eps)
        P_c = capillary = cst.capillary_pressure(S_w, S_h, phi, hyd)
        P_w = P_g - P_c
        P_eff = S_wf * P_w + S_gf * P_g

        K = cst.intrinsic_permeability(S_h, phi, self.K0, hyd)
        k_rw, k_rg = cst.relative_permeabilities(S_we, hyd)

        z = peng_robinson_z(P_g, T, p.eos) if self._uses_z else None
        th = cst.thermo_props(P_g, T, S_w, S_h, phi, p, z=z, P_w=P_w)
        v = cst.vle(P_g, T, p.vle)

        # composite-solid densities respond to pore pressure and strain
        mech = p.mechanics
        E_sh = cst.youngs_modulus_composite(0.0, S_h, mech)
        B_m = cst.bulk_modulus(E_sh, mech.nu)
        ref = self._ctx["P_eff_ref"]
        dP_eff = np.where(np.isfinite(ref), P_eff - ref, 0.0)
        phi_eff = phi * (1.0 - S_h)
        law_args = dict(dP_eff=dP_eff, phi=phi, phi_eff=phi_eff,
                        eps_v=self._ctx["eps_v"], alpha=mech.alpha_biot,
                        B_m=B_m, B_sh=mech.B_sh)
        rho_h = p.hydrate.density(**law_args)
        rho_s = p.soil.density(**law_args)

        return {
            "P_g": P_g, "S_w": S_w, "S_h": S_h, "T": T, "phi": phi,
            "S_g": S_g, "S_we": S_we, "P_c": P_c, "P_w": P_w, "P_eff": P_eff,
            "K": K, "k_rw": k_rw, "k_rg": k_rg, "z": z,
            "rho_g": th.rho_g, "rho_w": th.rho_w, "rho_h": rho_h, "rho_s": rho_s,
            "mu_g": th.mu_g, "mu_w": th.mu_w,
            "h_g": th.h_g, "h_w": th.h_w,
            "u_g": th.u_g, "u_w": th.u_w, "u_h": th.u_h, "u_s": th.u_s,
            "k_eff": th.k_eff, "vle": v, "E_sh": E_sh, "phi_eff": phi_eff,
        }

    def _storage(self, f):
        """Per-cell conserved quantities [per unit volume]."""
        phi = f["phi"]
        m_ch4 = phi * (f["rho_g"] * f["vle"].chi_g_ch4 * f["S_g"]
                       + f["rho_w"] * f["vle"].chi_w_ch4 * f["S_w"])
        m_h2o = phi * (f["rho_g"] * f["vle"].chi_g_h2o * f["S_g"]
                       + f["rho_w"] * f["vle"].chi_w_h2o * f["S_w"])
        m_hyd = phi * f["rho_h"] * f["S_h"]
        energy = ((1.0 - phi) * f["rho_s"] * f["u_s"]
                  + phi * (f["S_g"] * f["rho_g"] * f["u_g"]
                           + f["S_w"] * f["rho_w"] * f["u_w"]
                           + f["S_h"] * f["rho_h"] * f["u_h"]))
        return m_ch4, m_h2o, m_hyd, energy

    # ------------------------------------------------------------------
    def _phase_potentials(self, f):
        if not self.options.gravity:
            return f["P_g"], f["P_w"], None
        zc = self.grid.cell_centers[:, self.grid.dim - 1]
        pot_g = f["P_g"] + f["rho_g"] * GRAVITY * zc
        pot_w = f["P_w"] + f["rho_w"] * GRAVITY * zc
        return pot_g, pot_w, zc

    def _kinetics(self, f):
        return kin_mod.kinetic_rates(
            f["P_g"], f["T"], f["S_h"], f["S_w"], f["phi"], f["K"],
            self.params, dt=self._ctx["dt"])

    def residual(self, x1, want_extras=False):
        ctx = self._ctx
        if ctx is None:
            raise AssemblyError("prepare_step must be called before residual")
        if not np.all(np.isfinite(x1)):
            bad = int(np.argmax(~np.isfinite(x1)))
            raise AssemblyError(
                f"non-finite unknown: cell {bad // 4}, variable "
                f"{('P_g', 'S_w', 'S_h', 'T')[bad % 4]}")
        g = self.grid
        p = self.params
        dt = ctx["dt"]
        V = g.cell_volume
        f = self._eval_fields(x1)

        R = np.zeros(g.n_cells * N_FLOW_VARS)
        m_new = self._storage(f)
        for e in range(4):
            R[e::4] = (m_new[e] - ctx["storage_old"][e]) * V / dt

        pot_g, pot_w, _ = self._phase_potentials(f)
        mob_g = f["k_rg"] / f["mu_g"]
        mob_w = f["k_rw"] / f["mu_w"]
        diffusive = (p.vle.mode != "immiscible") and p.diffusion.enabled
        if diffusive:
            D_g = cst.diffusion_coefficient("g", f["P_g"], f["T"], p.diffusion)
            D_w = cst.diffusion_coefficient("w", f["P_g"], f["T"], p.diffusion)
            tau = cst.tortuosity(f["phi"], p.hydraulics.n_tau)

        conduction = self.options.energy_mode == "full"

        def scatter(cells, eq, val):
            np.add.at(R, cells * 4 + eq, val)

        # ---------------- interior faces ----------------
        for face in self.faces:
            L, Rc = face["left"], face["right"]
            A, dist = face["area"], face["dist"]
            T_geo = A / (dist / (2.0 * f["K"][L]) + dist / (2.0 * f["K"][Rc]))

            for pot, mob, rho, chi_c, chi_w_, h in (
                (pot_g, mob_g, f["rho_g"], f["vle"].chi_g_ch4, f["vle"].chi_g_h2o, f["h_g"]),
                (pot_w, mob_w, f["rho_w"], f["vle"].chi_w_ch4, f["vle"].chi_w_h2o, f["h_w"]),
            ):
                dpot = pot[L] - pot[Rc]
                up = np.where(dpot >= 0.0, L, Rc)
                q = T_geo * mob[up] * dpot          # m3/s, positive L -> R
                flux_ch4 = q * (rho[up] * chi_c[up])
                flux_h2o = q * (rho[up] * chi_w_[up])
                flux_e = q * (rho[up] * h[up])
                scatter(L, EQ_CH4, flux_ch4)
                scatter(Rc, EQ_CH4, -flux_ch4)
                scatter(L, EQ_H2O, flux_h2o)
                scatter(Rc, EQ_H2O, -flux_h2o)
                scatter(L, EQ_ENERGY, flux_e)
                scatter(Rc, EQ_ENERGY, -flux_e)

            # sediment-velocity advection: total velocity chains the moving frame
            v_face = 0.5 * (ctx["v_s"][L, face["axis"]] + ctx["v_s"][Rc, face["axis"]])
            if np.any(v_face != 0.0):
                vol = v_face * A
                up = np.where(vol >= 0.0, L, Rc)
                phiu = f["phi"][up]
                adv_ch4 = vol * phiu * (f["S_g"][up] * f["rho_g"][up] * f["vle"].chi_g_ch4[up]
                                        + f["S_w"][up] * f["rho_w"][up] * f["vle"].chi_w_ch4[up])
                adv_h2o = vol * phiu * (f["S_g"][up] * f["rho_g"][up] * f["vle"].chi_g_h2o[up]
                                        + f["S_w"][up] * f["rho_w"][up] * f["vle"].chi_w_h2o[up])
                adv_hyd = vol * phiu * f["rho_h"][up] * f["S_h"][up]
                adv_e = vol * phiu * (f["S_g"][up] * f["rho_g"][up] * f["h_g"][up]
                                      + f["S_w"][up] * f["rho_w"][up] * f["h_w"][up])
                scatter(L, EQ_CH4, adv_ch4)
                scatter(Rc, EQ_CH4, -adv_ch4)
                scatter(L, EQ_H2O, adv_h2o)
                scatter(Rc, EQ_H2O, -adv_h2o)
                scatter(L, EQ_HYD, adv_hyd)
                scatter(Rc, EQ_HYD, -adv_hyd)
                scatter(L, EQ_ENERGY, adv_e)
                scatter(Rc, EQ_ENERGY, -adv_e)

            if diffusive:
                coef_g = 0.5 * (f["phi"][L] * f["S_g"][L] * tau[L] * D_g[L] * f["rho_g"][L]
                                + f["phi"][Rc] * f["S_g"][Rc] * tau[Rc] * D_g[Rc] * f["rho_g"][Rc])
                coef_w = 0.5 * (f["phi"][L] * f["S_w"][L] * tau[L] * D_w[L] * f["rho_w"][L]
                                + f["phi"][Rc] * f["S_w"][Rc] * tau[Rc] * D_w[Rc] * f["rho_w"][Rc])
                geo = A / dist
                d_ch4 = geo * (coef_g * (f["vle"].chi_g_ch4[L] - f["vle"].chi_g_ch4[Rc])
                               + coef_w * (f["vle"].chi_w_ch4[L] - f["vle"].chi_w_ch4[Rc]))
                scatter(L, EQ_CH4, d_ch4)
                scatter(Rc, EQ_CH4, -d_ch4)
                # binary mixture: the H2O diffusive flux mirrors the CH4 one
                scatter(L, EQ_H2O, -d_ch4)
                scatter(Rc, EQ_H2O, d_ch4)

            if conduction:
                k_face = 0.5 * (f["k_eff"][L] + f["k_eff"][Rc])
                q_cond = A / dist * k_face * (f["T"][L] - f["T"][Rc])
                scatter(L, EQ_ENERGY, q_cond)
                scatter(Rc, EQ_ENERGY, -q_cond)

        # ---------------- boundary faces ----------------
        for bf in self.bc_faces:
            self._boundary_flux(R, f, bf, ctx)

        # moving-skeleton carry-through: the v_s advection needs boundary
        # closure on every face, extrapolating the boundary cell's content
        if np.any(ctx["v_s"] != 0.0):
            for tag, cells in g.boundary_cells.items():
                d = "xyz".index(tag[0])
                sign = -1.0 if tag.endswith("-") else 1.0
                vol = ctx["v_s"][cells, d] * sign * g.face_area[d]
                if not np.any(vol != 0.0):
                    continue
                phic = f["phi"][cells]
                adv_ch4 = vol * phic * (f["S_g"][cells] * f["rho_g"][cells] * f["vle"].chi_g_ch4[cells]
                                        + f["S_w"][cells] * f["rho_w"][cells] * f["vle"].chi_w_ch4[cells])
                adv_h2o = vol * phic * (f["S_g"][cells] * f["rho_g"][cells] * f["vle"].chi_g_h2o[cells]
                                        + f["S_w"][cells] * f["rho_w"][cells] * f["vle"].chi_w_h2o[cells])
                adv_hyd = vol * phic * f["rho_h"][cells] * f["S_h"][cells]
                adv_e = vol * phic * (f["S_g"][cells] * f["rho_g"][cells] * f["h_g"][cells]
                                      + f["S_w"][cells] * f["rho_w"][cells] * f["h_w"][cells])
                scatter(cells, EQ_CH4, adv_ch4)
                scatter(cells, EQ_H2O, adv_h2o)
                scatter(cells, EQ_HYD, adv_hyd)
                scatter(cells, EQ_ENERGY, adv_e)

        # ---------------- sources ----------------
        rates = self._kinetics(f)
        R[EQ_CH4::4] -= V * rates.g_ch4
        R[EQ_H2O::4] -= V * rates.g_h2o
        R[EQ_HYD::4] -= V * rates.g_hyd
        R[EQ_ENERGY::4] -= V * rates.Q_h
        if self.options.bath_U > 0.0:
            R[EQ_ENERGY::4] -= V * self.options.bath_U * (self.options.bath_T - f["T"])

        for well in self.wells:
            rate = well.mass_rate(ctx["t_new"]) if callable(well.mass_rate) \
                else well.mass_rate
            c = well.cell
            if well.phase == "water":
                R[c * 4 + EQ_H2O] -= rate
                R[c * 4 + EQ_ENERGY] -= rate * f["h_w"][c]
            else:
                R[c * 4 + EQ_CH4] -= rate
                R[c * 4 + EQ_ENERGY] -= rate * f["h_g"][c]

        if self.options.energy_mode == "isothermal":
            R[EQ_ENERGY::4] = f["T"] - ctx["T_fixed"]

        if not np.all(np.isfinite(R)):
            bad = int(np.argmax(~np.isfinite(R)))
            raise AssemblyError(
                f"non-finite residual: cell {bad // 4}, equation "
                f"{('CH4', 'H2O', 'hydrate', 'energy')[bad % 4]}")
        if want_extras:
            return R, f, rates
        return R

    # ------------------------------------------------------------------
    def _boundary_state(self, bc, f, cells, t):
        """Ghost state used for inflow upwinding and conduction."""
        p = self.params
        hyd = p.hydraulics
        T_b = f["T"][cells] if bc.T is None else np.full(len(cells), float(bc.T))
        S_w_b = f["S_w"][cells] if bc.S_w is None else np.full(len(cells), float(bc.S_w))
        S_h_b = np.full(len(cells), float(bc.S_h))
        P_raw = bc.P_g(t) if callable(bc.P_g) else float(bc.P_g)
        phi_b = f["phi"][cells]
        if bc.P_is_effective:
            pc_b = cst.capillary_pressure(S_w_b, S_h_b, phi_b, hyd)
            _, _, swf, _ = cst.derived_saturations(S_w_b, S_h_b, hyd.S_wr, hyd.S_gr, hyd.sat_eps)
            P_g_b = P_raw + swf * pc_b
        else:
            P_g_b = np.full(len(cells), P_raw)
        pc_b = cst.capillary_pressure(S_w_b, S_h_b, phi_b, hyd)
        P_w_b = P_g_b - pc_b
        _, S_we_b, _, _ = cst.derived_saturations(S_w_b, S_h_b, hyd.S_wr, hyd.S_gr, hyd.sat_eps)
        k_rw_b, k_rg_b = cst.relative_permeabilities(S_we_b, hyd)
        z_b = peng_robinson_z(P_g_b, T_b, p.eos) if self._uses_z else None
        vle_b = cst.vle(P_g_b, T_b, p.vle)
        dT = T_b - p.T_ref_energy
        return {
            "P_g": P_g_b, "P_w": P_w_b, "T": T_b,
            "S_g": 1.0 - S_w_b - S_h_b, "S_w": S_w_b,
            "rho_g": p.gas.density(P_g_b, T_b, z=z_b),
            "rho_w": p.water.density(P_w_b, T_b),
            "mu_g": p.gas.viscosity(T_b), "mu_w": p.water.viscosity(T_b),
            "k_rg": k_rg_b, "k_rw": k_rw_b, "vle": vle_b,
            "h_g": p.gas.Cp * dT, "h_w": p.water.Cp * dT,
        }

    def _boundary_flux(self, R, f, bf, ctx, collect=None):
        bc = bf["bc"]
        cells = bf["cells"]
        if len(cells) == 0:
            return
        A, hd = bf["area"], bf["half_dist"]
        b = self._boundary_state(bc, f, cells, ctx["t_new"])
        T_geo = A * f["K"][cells] / hd

        for ph in ("g", "w"):
            pot_c = f["P_" + ph][cells]
            pot_b = b["P_" + ph]
            dpot = pot_c - pot_b          # > 0: outflow
            out = dpot >= 0.0
            mob = np.where(out, f["k_r" + ph][cells] / f["mu_" + ph][cells],
                           b["k_r" + ph] / b["mu_" + ph])
            q = T_geo * mob * dpot
            rho = np.where(out, f["rho_" + ph][cells], b["rho_" + ph])
            chi_c = np.where(out, getattr(f["vle"], f"chi_{ph}_ch4")[cells],
                             getattr(b["vle"], f"chi_{ph}_ch4"))
            chi_w_ = np.where(out, getattr(f["vle"], f"chi_{ph}_h2o")[cells],
                              getattr(b["vle"], f"chi_{ph}_h2o"))
            h = np.where(out, f["h_" + ph][cells], b["h_" + ph])
            np.add.at(R, cells * 4 + EQ_CH4, q * rho * chi_c)
            np.add.at(R, cells * 4 + EQ_H2O, q * rho * chi_w_)
            np.add.at(R, cells * 4 + EQ_ENERGY, q * rho * h)
            if collect is not None:
                collect["ch4"] += float(np.sum(q * rho * chi_c))
                collect["h2o"] += float(np.sum(q * rho * chi_w_))
                collect["gas_phase_ch4"] += float(np.sum(q * rho * chi_c)) if ph == "g" else 0.0

        if self.options.energy_mode == "full" and bc.T is not None:
            q_cond = A / hd * f["k_eff"][cells] * (f["T"][cells] - b["T"])
            np.add.at(R, cells * 4 + EQ_ENERGY, q_cond)

        if (self.params.vle.mode != "immiscible") and self.params.diffusion.enabled:
            D_g = cst.diffusion_coefficient("g", f["P_g"][cells], f["T"][cells], self.params.diffusion)
            tau = cst.tortuosity(f["phi"][cells], self.params.hydraulics.n_tau)
            coef_g = f["phi"][cells] * f["S_g"][cells] * tau * D_g * f["rho_g"][cells]
            d_ch4 = A / hd * coef_g * (f["vle"].chi_g_ch4[cells] - b["vle"].chi_g_ch4)
            np.add.at(R, cells * 4 + EQ_CH4, d_ch4)
            np.add.at(R, cells * 4 + EQ_H2O, -d_ch4)
            if collect is not None:
                collect["ch4"] += float(np.sum(d_ch4))
                collect["h2o"] += float(np.sum(-d_ch4))

    def boundary_outflow(self, x1):
        """Total boundary mass outflow rates [kg/s] across Dirichlet faces."""
        f = self._eval_fields(x1)
        totals = {"ch4": 0.0, "h2o": 0.0, "gas_phase_ch4": 0.0}
        R_dummy = np.zeros(self.grid.n_cells * N_FLOW_VARS)
        for bf in self.bc_faces:
            self._boundary_flux(R_dummy, f, bf, self._ctx, collect=totals)
        return totals

    # ------------------------------------------------------------------
    def project(self, x1):
        x = x1.copy()
        x[0::4] = np.maximum(x[0::4], 1.0)
        x[1::4] = np.clip(x[1::4], 0.0, 1.0)
        x[2::4] = np.clip(x[2::4], 0.0, 1.0)
        over = x[1::4] + x[2::4] - 1.0
        mask = over > 0.0
        if np.any(mask):
            x[2::4][mask] = np.maximum(x[2::4][mask] - over[mask], 0.0)
            over = x[1::4] + x[2::4] - 1.0
            mask = over > 0.0
            x[1::4][mask] -= over[mask]
        x[3::4] = np.maximum(x[3::4], 150.0)
        return x

    def solve(self, x1_guess):
        """Newton-solve the implicit step prepared by prepare_step."""
        return newton_solve(
            self.residual, x1_guess, self.coloring,
            self._ctx["weights"], options=self.options.newton,
            project=self.project,
        )


def face_darcy_flux(area, dist_l, dist_r, K_l, K_r, mobility, dpot):
    """Single-face TPFA volumetric flux with harmonic transmissibility."""
    T_geo = area / (dist_l / (2.0 * K_l) + dist_r / (2.0 * K_r))
    return T_geo * mobility * dpot
