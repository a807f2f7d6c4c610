"""Block Gauss-Seidel coupling of flow, geomechanics and porosity.

Per time step the flow system is solved implicitly, the elastic problem is
re-solved with the updated pore pressure and hydrate stiffening, the porosity
equation is advanced with the updated sediment velocity, and the loop repeats
until the shared fields stop moving. Newton failures halve the step.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import constitutive as cst
from .errors import NewtonError, SolverError
from .geomech import sediment_velocity
from .state import SimulationState

log = logging.getLogger("hydresim")


@dataclass
class CouplingConfig:
    blocks: str = "flow"           # "flow" | "flow+poro" | "full"
    outer_tol: float = 1e-5
    max_outer: int = 10
    relaxation: float = 1.0
    aitken: bool = True            # dynamic relaxation of the displacement update
    max_step_cuts: int = 5
    dt_growth: float = 2.0         # recovery factor toward the target step

    def __post_init__(self):
        if self.blocks not in ("flow", "flow+poro", "full"):
            raise ValueError(f"unknown block selection '{self.blocks}'")
        if self.outer_tol <= 0 or self.max_outer < 1:
            raise ValueError("outer tolerance must be > 0 and max iterations >= 1")


@dataclass
class StepReport:
    t_start: float = 0.0
    dt_target: float = 0.0
    dt_used: float = 0.0
    outer_iterations: int = 0
    newton_iterations_flow: list = field(default_factory=list)
    newton_iterations_poro: list = field(default_factory=list)
    residual_histories: list = field(default_factory=list)
    shared_change: list = field(default_factory=list)
    step_cuts: int = 0
    converged: bool = False


def _rel_change(new, old, floor):
    num = float(np.max(np.abs(new - old))) if np.size(new) else 0.0
    den = float(np.max(np.abs(new))) + floor
    return num / den


class SimulationDriver:
    def __init__(self, grid, params, flow, geomech=None, porosity=None,
                 coupling=None):
        self.grid = grid
        self.params = params
        self.flow = flow
        self.geomech = geomech
        self.porosity = porosity
        self.coupling = coupling or CouplingConfig()
        if self.coupling.blocks == "full" and geomech is None:
            raise SolverError("full coupling requested without a geomechanics block")
        self.P_eff_ref = None
        self._aux_old = None

    # ------------------------------------------------------------------
    def initialize(self, state):
        """Set the pressure reference and the initial mechanical equilibrium."""
        f = self._flow_fields(state)
        self.P_eff_ref = f["P_eff"].copy()
        if self.geomech is not None and self.coupling.blocks == "full":
            E = cst.youngs_modulus_composite(0.0, state.S_h, self.params.mechanics)
            alphaP = self.params.mechanics.alpha_biot * f["P_eff"]
            rho_sh = self._composite_density(state, f)
            state.u = self.geomech.solve(E, self.params.mechanics.nu,
                                         alphaP, rho_sh, t=state.t)
        self._aux_old = self._aux_from(state, f, np.zeros(self.grid.n_cells))
        return state

    def _flow_fields(self, state, phi=None, eps_v=None):
        ctx_keep = self.flow._ctx
        self.flow._ctx = {
            "phi": state.phi if phi is None else phi,
            "eps_v": np.zeros(self.grid.n_cells) if eps_v is None else eps_v,
            "P_eff_ref": (np.full(self.grid.n_cells, np.nan)
                          if self.P_eff_ref is None else self.P_eff_ref),
            "dt": 1.0, "t_new": state.t,
            "T_fixed": state.T, "v_s": np.zeros((self.grid.n_cells, self.grid.dim)),
        }
        try:
            fields = self.flow._eval_fields(state.pack_x1())
        finally:
            self.flow._ctx = ctx_keep
        return fields

    def _composite_density(self, state, f):
        phi = state.phi
        return ((1.0 - phi) * f["rho_s"] + phi * state.S_h * f["rho_h"])

    def _aux_from(self, state, f, eps_v):
        return {"P_eff": f["P_eff"].copy(), "rho_s": f["rho_s"].copy(),
                "eps_v": np.asarray(eps_v, dtype=float).copy()}

    # ------------------------------------------------------------------
    def advance_time_step(self, state, dt, dt_target=None):
        """One accepted step of size <= dt; cuts halve dt on Newton failure."""
        if self.P_eff_ref is None:
            self.initialize(state)
        cfg = self.coupling
        report = StepReport(t_start=state.t, dt_target=dt_target or dt)
        dt_try = dt
        for cut in range(cfg.max_step_cuts + 1):
            try:
                new_state = self._attempt_step(state, dt_try, report)
                report.dt_used = dt_try
                report.step_cuts = cut
                report.converged = True
                return new_state, report
            except NewtonError as exc:
                log.warning("step at t=%.6g s failed (%s); halving dt", state.t, exc)
                report.residual_histories.append(str(exc))
                dt_try *= 0.5
        report.dt_used = dt_try
        raise SolverError(
            f"time step failed after {cfg.max_step_cuts} cuts at t={state.t:.6g} s",
            report=report)

    def _attempt_step(self, state, dt, report):
        cfg = self.coupling
        mech_on = cfg.blocks == "full" and self.geomech is not None
        poro_on = cfg.blocks in ("flow+poro", "full") and self.porosity is not None

        phi_k = state.phi.copy()
        u_k = state.u.copy()
        v_s_cells = np.zeros((self.grid.n_cells, self.grid.dim))
        eps_v_k = self._aux_old["eps_v"].copy()
        x1 = state.pack_x1()
        prev = None
        n_outer = 0
        omega = cfg.relaxation
        resid_prev = None

        for outer in range(cfg.max_outer):
            n_outer = outer + 1
            ctx = self.flow.prepare_step(
                state, dt, phi_new=phi_k, v_s=v_s_cells, eps_v=eps_v_k,
                P_eff_ref=self.P_eff_ref)
            x1, diag = self.flow.solve(x1)
            report.newton_iterations_flow.append(diag.iterations)
            f = self.flow._eval_fields(x1)

            elastic = None
            if mech_on:
                S_h_new = x1[2::4]
                E = cst.youngs_modulus_composite(0.0, S_h_new, self.params.mechanics)
                alphaP = self.params.mechanics.alpha_biot * f["P_eff"]
                rho_sh = (1.0 - phi_k) * f["rho_s"] + phi_k * S_h_new * f["rho_h"]
                u_raw = self.geomech.solve(E, self.params.mechanics.nu, alphaP,
                                           rho_sh, t=state.t + dt)
                # Aitken dynamic relaxation of the displacement fixed point;
                # the plain Gauss-Seidel sweep contracts too slowly for the
                # consolidation benchmarks
                resid = (u_raw - u_k).ravel()
                if cfg.aitken and resid_prev is not None:
                    dr = resid - resid_prev
                    denom = float(dr @ dr)
                    if denom > 0.0:
                        omega = -omega * float(resid_prev @ dr) / denom
                        omega = min(max(omega, 0.1), 4.0)
                u_new = u_k + omega * resid.reshape(u_k.shape)
                resid_prev = resid
                v_s_nodal = sediment_velocity(u_new, state.u, dt)
                v_s_cells = self.geomech.cell_average_nodal(v_s_nodal)
                elastic = self.geomech.recover(
                    u_new, E, self.params.mechanics.nu,
                    self.params.mechanics.alpha_biot, f["P_eff"])
                eps_v_k = elastic.eps_v
            else:
                u_new = u_k

            phi_new = phi_k
            if poro_on:
                mech = self.params.mechanics
                E_for_law = cst.youngs_modulus_composite(0.0, x1[2::4], mech)
                ctx_poro = {
                    "dP_eff": f["P_eff"] - self.P_eff_ref,
                    "S_h": x1[2::4], "eps_v": eps_v_k,
                    "alpha": mech.alpha_biot,
                    "B_m": cst.bulk_modulus(E_for_law, mech.nu),
                    "B_sh": mech.B_sh,
                }
                phi_new, pdiag = self.porosity.step(
                    state.phi, self._aux_old["rho_s"], dt, v_s_cells, ctx_poro)
                if pdiag is not None:
                    report.newton_iterations_poro.append(pdiag.iterations)
                if cfg.relaxation != 1.0:
                    phi_new = cfg.relaxation * phi_new + (1.0 - cfg.relaxation) * phi_k

            if not (mech_on or poro_on):
                n_outer = 1
                phi_k, u_k = phi_new, u_new
                break

            change = 0.0
            if prev is not None:
                change = max(
                    _rel_change(f["P_eff"], prev["P_eff"], 1.0),
                    _rel_change(u_new, prev["u"], 1e-12),
                    _rel_change(phi_new, prev["phi"], 1e-12),
                    _rel_change(x1[2::4], prev["S_h"], 1e-12),
                )
                report.shared_change.append(change)
            prev = {"P_eff": f["P_eff"].copy(), "u": u_new.copy(),
                    "phi": phi_new.copy(), "S_h": x1[2::4].copy()}
            phi_k, u_k = phi_new, u_new
            if outer > 0 and change < cfg.outer_tol:
                break

        report.outer_iterations = n_outer
        new_state = SimulationState(
            grid=self.grid, t=state.t + dt,
            P_g=x1[0::4].copy(), S_w=x1[1::4].copy(), S_h=x1[2::4].copy(),
            T=x1[3::4].copy(), phi=phi_k, u=u_k)
        f_new = self.flow._eval_fields(x1, phi=phi_k)
        self._aux_old = self._aux_from(new_state, f_new, eps_v_k)
        return new_state


def run_simulation(driver, state, t_end, dt, on_step=None, max_steps=10**7):
    """March from state.t to t_end; on_step(state, report, extras) per step.

    Steps shrink on failure and recover toward the target dt by the configured
    growth factor. Raises SolverError (with partial results already delivered
    through on_step) if a step exhausts its cuts.
    """
    if driver.P_eff_ref is None:
        driver.initialize(state)
    if on_step is not None:
        on_step(state, None, driver)
    dt_next = dt
    steps = 0
    while state.t < t_end - 1e-12 and steps < max_steps:
        dt_step = min(dt_next, t_end - state.t)
        state, report = driver.advance_time_step(state, dt_step, dt_target=dt)
        steps += 1
        if report.step_cuts > 0:
            dt_next = report.dt_used * driver.coupling.dt_growth
        else:
            dt_next = dt_next * driver.coupling.dt_growth
        dt_next = min(dt_next, dt)
        if on_step is not None:
            on_step(state, report, driver)
    return state
