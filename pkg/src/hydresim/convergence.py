"""Grid-convergence studies: refine a scenario, compute L2 errors against a
reference (analytic callable or the finest level) and fit the log-log slope."""

import copy
import logging

import numpy as np

from .errors import ConfigError
from .coupler import run_simulation
from .scenario import build_run

log = logging.getLogger("hydresim")


def refine_scenario(cfg, factor):
    """Scale 1D cell count by `factor` and the time step by 1/factor so the
    dx/dt ratio stays constant."""
    new = copy.deepcopy(cfg)
    cells = new.data["grid"]["cells"]
    new.data["grid"]["cells"] = [int(round(c * factor)) for c in cells]
    new.data["time"]["dt"] = new.data["time"]["dt"] / factor
    return new


def l2_error(grid, field, reference):
    """Cell-volume weighted L2 norm of (field - reference(cell centers))."""
    ref = reference(grid.cell_centers)
    diff = np.asarray(field, dtype=float) - np.asarray(ref, dtype=float)
    return float(np.sqrt(np.sum(diff**2) * grid.cell_volume))


def run_to_time(cfg, t_eval):
    setup = build_run(cfg)
    state = run_simulation(setup.driver, setup.state, t_eval, setup.dt)
    return setup, state


def convergence_study(cfg, levels, reference, field="P_g", t_eval=None):
    """Run the scenario at each refinement factor and fit the error slope.

    levels: list of refinement factors applied to the base grid (e.g. powers
    of two). reference: callable points -> exact field values. Returns a dict
    with cell counts, errors and the least-squares log-log slope.
    """
    if len(levels) < 2:
        raise ConfigError("a convergence study needs at least 2 levels")
    t_eval = cfg.require("time", "t_end") if t_eval is None else t_eval
    ns, errs = [], []
    for factor in levels:
        lcfg = refine_scenario(cfg, factor)
        setup, state = run_to_time(lcfg, t_eval)
        n = setup.grid.n_cells
        fields = {"P_g": state.P_g, "S_w": state.S_w, "S_h": state.S_h,
                  "T": state.T}
        err = l2_error(setup.grid, fields[field], reference)
        ns.append(n)
        errs.append(err)
        log.info("convergence level n=%d: L2 error %.6e", n, err)
    ns = np.asarray(ns, dtype=float)
    errs = np.asarray(errs, dtype=float)
    degenerate = bool(np.any(errs <= 0.0) or np.allclose(errs, errs[0]))
    if degenerate:
        slope = 0.0
    else:
        slope = float(np.polyfit(np.log(ns), np.log(errs), 1)[0])
    return {"n": ns, "errors": errs, "slope": slope, "degenerate": degenerate}
