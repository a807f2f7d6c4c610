"""Calibration of the intrinsic dissociation rate constant against an observed
cumulative-gas series by bounded golden-section search on log10(k_d0)."""

import copy
import logging
import math

import numpy as np

from .errors import ConfigError
from .coupler import run_simulation
from .scenario import build_run

log = logging.getLogger("hydresim")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def simulate_cumulative_gas(cfg, k_d0, t_end=None):
    """Run the scenario with the given rate constant; returns (times, volumes)."""
    run_cfg = copy.deepcopy(cfg)
    run_cfg.data.setdefault("kinetics", {})["k_d0"] = float(k_d0)
    setup = build_run(run_cfg)
    times, vols = [], []
    cum = [0.0]

    def on_step(state, report, driver):
        if report is not None:
            out = driver.flow.boundary_outflow(state.pack_x1())
            cum[0] += out["ch4"] / setup.params.rho_gas_std \
                * setup.cross_section * report.dt_used
        times.append(state.t)
        vols.append(cum[0])

    run_simulation(setup.driver, setup.state,
                   t_end or setup.t_end, setup.dt, on_step=on_step)
    return np.asarray(times), np.asarray(vols)


def misfit(cfg, k_d0, t_obs, v_obs):
    t_sim, v_sim = simulate_cumulative_gas(cfg, k_d0, t_end=float(t_obs[-1]))
    v_at_obs = np.interp(t_obs, t_sim, v_sim)
    return float(np.sqrt(np.mean((v_at_obs - v_obs) ** 2)))


def fit_rate_constant(cfg, t_obs, v_obs, k_lo=1e2, k_hi=1e7, tol_log=5e-3,
                      max_iter=40):
    """Golden-section minimization of the L2 misfit over log10(k_d0).

    Returns (k_best, info). A flat observed series drives the fit to the lower
    bound; that case is flagged with a warning in info.
    """
    if k_lo <= 0 or k_hi <= k_lo:
        raise ConfigError(f"bounds do not bracket: [{k_lo}, {k_hi}]")
    t_obs = np.asarray(t_obs, dtype=float)
    v_obs = np.asarray(v_obs, dtype=float)
    if t_obs.ndim != 1 or t_obs.shape != v_obs.shape or len(t_obs) < 2:
        raise ConfigError("observed series must be two equal-length vectors")

    a, b = math.log10(k_lo), math.log10(k_hi)
    cache = {}

    def f(x):
        if x not in cache:
            cache[x] = misfit(cfg, 10.0**x, t_obs, v_obs)
            log.info("fit: k_d0=%.5g misfit=%.6g", 10.0**x, cache[x])
        return cache[x]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    it = 0
    while (b - a) > tol_log and it < max_iter:
        if f(c) < f(d):
            b, d = d, c
            c = b - _GOLDEN * (b - a)
        else:
            a, c = c, d
            d = a + _GOLDEN * (b - a)
        it += 1
    x_best = min(cache, key=cache.get)
    k_best = 10.0**x_best
    info = {"misfit": cache[x_best], "iterations": it,
            "at_lower_bound": x_best <= math.log10(k_lo) + 2 * tol_log,
            "at_upper_bound": x_best >= math.log10(k_hi) - 2 * tol_log,
            "evaluations": len(cache)}
    if info["at_lower_bound"]:
        log.warning("rate-constant fit hit the lower bound "
                    "(flat observed series?)")
    return k_best, info
