"""Command-line front end.

Subcommands: run, presets, convergence, fit. Environment variables with the
HYDRESIM_ prefix override the corresponding flags (HYDRESIM_OUT_DIR,
HYDRESIM_T_END, HYDRESIM_DT, HYDRESIM_BLOCKS). Exit codes: 0 success,
2 configuration error, 3 solver failure.
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .convergence import convergence_study
from .coupler import run_simulation
from .errors import ConfigError, HydresimError, SolverError
from .fitting import fit_rate_constant
from .output import ProbeRecorder, setup_run_log, write_vtk_snapshot
from .scenario import build_run, dump_scenario, load_scenario, preset_names

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _env(name, default=None):
    return os.environ.get("HYDRESIM_" + name, default)


def _add_common(p):
    p.add_argument("--config", required=True, help="scenario file or preset name")
    p.add_argument("--out-dir", default=_env("OUT_DIR", "out"))
    p.add_argument("--t-end", type=float, default=None,
                   help="override end time [s]")
    p.add_argument("--dt", type=float, default=None, help="override step [s]")
    p.add_argument("--blocks", choices=("flow", "flow+poro", "full"),
                   default=_env("BLOCKS"))
    p.add_argument("--probe", action="append", default=None,
                   help="extra probe point 'x[,y[,z]]' (repeatable)")


def _apply_overrides(cfg, args):
    if args.t_end is not None or _env("T_END"):
        cfg.data.setdefault("time", {})["t_end"] = \
            float(args.t_end if args.t_end is not None else _env("T_END"))
    if args.dt is not None or _env("DT"):
        cfg.data.setdefault("time", {})["dt"] = \
            float(args.dt if args.dt is not None else _env("DT"))
    if args.blocks:
        cfg.data.setdefault("blocks", {})["enabled"] = args.blocks
    if args.probe:
        extra = "; ".join(args.probe)
        old = cfg.data.get("output", {}).get("probes", "")
        cfg.data.setdefault("output", {})["probes"] = \
            (old + "; " + extra) if old else extra


def cmd_run(args):
    cfg = load_scenario(args.config)
    _apply_overrides(cfg, args)
    setup = build_run(cfg)
    log = setup_run_log(args.out_dir, setup.name)
    log.info("hydresim %s: running '%s' (%dD, %d cells, dt=%.6g s, "
             "t_end=%.6g s, blocks=%s)", __version__, setup.name,
             setup.grid.dim, setup.grid.n_cells, setup.dt, setup.t_end,
             setup.driver.coupling.blocks)
    rec = ProbeRecorder(setup)
    snap_every = setup.cadence

    def on_step(state, report, driver):
        rec(state, report, driver)
        k = len(rec.times) - 1
        if report is not None:
            log.info("t=%.6g s dt=%.4g outer=%d cuts=%d",
                     state.t, report.dt_used, report.outer_iterations,
                     report.step_cuts)
        if snap_every and (k % snap_every == 0 or state.t >= setup.t_end - 1e-12):
            fields = rec.fields_from_state(state, driver)
            path = os.path.join(args.out_dir,
                                f"{setup.name}_{k:05d}.vtk")
            write_vtk_snapshot(path, setup.grid, fields,
                               point_fields={"displacement": state.u}
                               if setup.driver.geomech is not None else None)

    try:
        run_simulation(setup.driver, setup.state, setup.t_end, setup.dt,
                       on_step=on_step)
    except SolverError as exc:
        rec.write_csv(args.out_dir, setup.name)
        log.error("solver failure: %s (partial outputs kept)", exc)
        return EXIT_SOLVER
    paths = rec.write_csv(args.out_dir, setup.name)
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def cmd_presets(args):
    if args.show:
        cfg = load_scenario(args.show)
        dump_scenario(cfg, sys.stdout)
    else:
        for name in preset_names():
            print(name)
    return EXIT_OK


def cmd_convergence(args):
    from .analytic import kpe_pressure  # noqa: F401 (documented reference hook)
    cfg = load_scenario(args.config)
    _apply_overrides(cfg, args)
    levels = [float(x) for x in args.refine.split(",")]
    reference = _build_reference(cfg, args)
    result = convergence_study(cfg, levels, reference, field=args.field,
                               t_eval=args.t_eval)
    print("# cells   L2_error")
    for n, e in zip(result["n"], result["errors"]):
        print(f"{int(n):8d}  {e:.8e}")
    print(f"log-log slope: {result['slope']:+.4f}"
          + ("  (degenerate: identical errors)" if result["degenerate"] else ""))
    return EXIT_OK


def _build_reference(cfg, args):
    """Analytic reference for scenarios that have one (shifted-curve mode)."""
    from .analytic import kpe_coefficients, kpe_pressure
    from .kinetics import rate_constant
    kin = cfg.data.get("kinetics", {})
    mech = cfg.data.get("mechanics", {})
    if kin.get("mode") != "simplified" or "Pe_constant" not in kin:
        raise ConfigError("convergence reference is only built in for "
                          "simplified-kinetics constant-P_e scenarios; "
                          "use the API for custom references")
    t_eval = args.t_eval if args.t_eval is not None else cfg.require("time", "t_end")
    L = cfg.require("grid", "extent_x")
    coef = kpe_coefficients(
        K=cfg.require("soil", "permeability"),
        mu_g=cfg.get("fluid.gas", "viscosity_value", 1.0245e-5),
        mu_w=cfg.get("fluid.water", "viscosity_value", 8.9008e-3),
        B_m=_constrained_modulus(cfg),
        S_storativity=_storativity_from(cfg),
        alpha=mech.get("alpha_biot", 0.8),
        S_h=cfg.require("initial", "S_h"),
        q=_top_load(cfg), P_e=kin["Pe_constant"],
        k_0=rate_constant(cfg.require("initial", "T"),
                          kin.get("k_d0", 360.0), kin.get("activation_T", 9400.0)),
        A_s0=kin.get("specific_area", 1e5))

    def reference(points):
        return np.array([kpe_pressure(p[0], t_eval, coef, L) for p in points])
    return reference


def _constrained_modulus(cfg):
    from .constitutive import constrained_modulus, youngs_modulus_composite
    from .materials import MechParams
    mech = MechParams(
        E_s0=cfg.get("mechanics", "E_s0", 0.3e9),
        E_h=cfg.get("mechanics", "E_h", 1.35e9),
        nu=cfg.get("mechanics", "nu", 0.2),
        b=cfg.get("mechanics", "b", 0.0),
        c=cfg.get("mechanics", "c", 1.0),
        d=cfg.get("mechanics", "d", 1.0))
    E = youngs_modulus_composite(0.0, cfg.require("initial", "S_h"), mech)
    return float(constrained_modulus(E, mech.nu))


def _storativity_from(cfg):
    phi = cfg.require("initial", "porosity")
    S_h = cfg.require("initial", "S_h")
    S_w = cfg.require("initial", "S_w")
    phi_e = phi * (1.0 - S_h)
    B_w = cfg.get("fluid.water", "bulk_modulus", 2.933e9)
    B_g = cfg.get("fluid.gas", "bulk_modulus", 1.013e8)
    B_sh = cfg.get("mechanics", "B_sh", 1e10)
    alpha = cfg.get("mechanics", "alpha_biot", 0.8)
    S_we = S_w / (1.0 - S_h)
    S_ge = 1.0 - S_we
    from .analytic import storativity
    return storativity(phi_e, S_we, S_ge, B_w, B_g, B_sh, alpha)


def _top_load(cfg):
    for section in [s for s in cfg.data if s.startswith("bc.")]:
        if cfg.get(section, "field") == "mechanics" \
                and cfg.get(section, "type") == "traction":
            return cfg.get(section, "value", 0.0)
    return 0.0


def cmd_fit(args):
    import csv as csvmod
    cfg = load_scenario(args.config)
    _apply_overrides(cfg, args)
    t_obs, v_obs = [], []
    with open(args.observed, newline="") as fh:
        for row in csvmod.reader(fh):
            try:
                t_obs.append(float(row[0]))
                v_obs.append(float(row[1]))
            except (ValueError, IndexError):
                continue  # header or comment rows
    k, info = fit_rate_constant(cfg, np.asarray(t_obs), np.asarray(v_obs),
                                k_lo=args.k_lo, k_hi=args.k_hi)
    print(f"fitted k_d0 = {k:.6g} mol/(m2 Pa s)  "
          f"(misfit {info['misfit']:.6g}, {info['evaluations']} runs)")
    if info["at_lower_bound"]:
        print("warning: fit hit the lower bound")
    return EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="hydresim",
        description="coupled flow/geomechanics simulation of hydrate-bearing "
                    "porous media")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario")
    _add_common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("presets", help="list shipped presets or show one")
    p.add_argument("--show", default=None, help="dump a preset's normalized form")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("convergence", help="grid-convergence study")
    _add_common(p)
    p.add_argument("--refine", default="1,2,4",
                   help="comma-separated refinement factors")
    p.add_argument("--field", default="P_g")
    p.add_argument("--t-eval", type=float, default=None)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("fit", help="fit the dissociation rate constant")
    _add_common(p)
    p.add_argument("--observed", required=True,
                   help="CSV with columns time_s, cumulative_gas_m3")
    p.add_argument("--k-lo", type=float, default=1e2)
    p.add_argument("--k-hi", type=float, default=1e7)
    p.set_defaults(func=cmd_fit)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except HydresimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
