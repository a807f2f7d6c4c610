"""Scenario configuration: a sectioned key/value text format with unit
annotations, loaded into SI and buildable into a ready-to-run simulation.

Format:
    [section]            # sections group related keys; dotted names allowed
    key = 3.535 MPa      # trailing unit token converted on load
    list_key = 0.2 0.4   # whitespace-separated lists

Unknown sections/keys, missing required fields and unit mismatches raise
line-anchored ConfigError. Presets ship as files under hydresim/presets/.
"""

import importlib.resources as resources
import re
from dataclasses import dataclass, field

import numpy as np

from . import materials as mat
from .errors import ConfigError
from .flow import FlowBC, FlowModel, FlowOptions, TimeRamp, WellSource
from .geomech import GeomechSolver, MechBC
from .grid import build_grid
from .newton import NewtonOptions
from .porosity import PorosityModel
from .coupler import CouplingConfig, SimulationDriver
from .state import SimulationState
from .units import convert, known_unit

# ----------------------------------------------------------------------
# schema: section pattern -> {key: dimension or type tag}
_SCHEMA = {
    "meta": {"name": "str", "description": "str"},
    "grid": {"dimension": "int", "cells": "int_list",
             "extent_x": "length", "extent_y": "length", "extent_z": "length",
             "cross_section": "float"},
    "blocks": {"enabled": "str", "outer_tol": "float", "max_outer": "int",
               "relaxation": "float", "aitken": "bool", "max_step_cuts": "int"},
    "time": {"dt": "time", "t_end": "time"},
    "modes": {"energy": "str", "vle": "str", "gravity": "bool",
              "newton_rtol": "float", "newton_atol": "float",
              "newton_max_iter": "int"},
    "fluid.gas": {"molar_mass": "molar_mass", "density": "str",
                  "density_value": "density", "bulk_modulus": "pressure",
                  "reference_pressure": "pressure", "viscosity": "str",
                  "viscosity_value": "viscosity", "conductivity": "str",
                  "conductivity_value": "conductivity",
                  "cp": "heat_capacity", "cv": "heat_capacity"},
    "fluid.water": {"molar_mass": "molar_mass", "density": "str",
                    "density_value": "density", "bulk_modulus": "pressure",
                    "reference_pressure": "pressure", "viscosity": "str",
                    "viscosity_value": "viscosity", "conductivity": "str",
                    "conductivity_value": "conductivity",
                    "cp": "heat_capacity", "cv": "heat_capacity"},
    "phase.hydrate": {"density_value": "density", "molar_mass": "molar_mass",
                      "cv": "heat_capacity", "conductivity_value": "conductivity",
                      "density": "str", "consistent_molar_mass": "bool"},
    "phase.soil": {"density_value": "density", "cv": "heat_capacity",
                   "conductivity_value": "conductivity", "density": "str"},
    "soil": {"permeability": "permeability", "porosity": "fraction",
             "entry_pressure": "pressure", "lambda_bc": "float",
             "m_exponent": "float", "a_exponent": "float",
             "tortuosity_exponent": "float", "residual_water": "fraction",
             "residual_gas": "fraction", "pc_model": "str", "kr_model": "str",
             "kr_water": "float", "kr_gas": "float",
             "permeability_model": "str"},
    "kinetics": {"mode": "str", "k_d0": "rate_constant", "activation_T": "temperature_diff",
                 "hydration_number": "float", "A1": "pressure", "A2": "float",
                 "A3": "temperature_diff", "A2_cold": "float", "A3_cold": "temperature_diff",
                 "B1": "molar_energy", "B2": "float", "heat_form": "str",
                 "reaction_area": "str", "reaction_area_value": "float",
                 "specific_area": "specific_area", "fugacity": "str",
                 "Pe_constant": "pressure"},
    "mechanics": {"E_s0": "pressure", "E_h": "pressure", "nu": "float",
                  "b": "float", "c": "float", "d": "float",
                  "sigma_c0": "pressure", "alpha_biot": "float",
                  "B_sh": "pressure"},
    "vle": {"henry_ref": "float", "henry_C": "temperature_diff",
            "henry_T_ref": "temperature", "antoine_A": "float",
            "antoine_B": "float", "antoine_C": "float",
            "T_min": "temperature", "T_max": "temperature"},
    "diffusion": {"enabled": "bool", "D_gas_ref": "float",
                  "reference_pressure": "pressure", "reference_T": "temperature",
                  "exponent": "float", "wc_association": "float",
                  "wc_solvent_molar_mass": "float", "wc_molar_volume": "float"},
    "thermal": {"bath_coupling": "float", "bath_T": "temperature",
                "T_ref": "temperature"},
    "initial": {"P_g": "pressure", "P_eff": "pressure", "S_w": "fraction",
                "S_h": "fraction", "T": "temperature", "porosity": "fraction"},
    "output": {"cadence": "int", "probe_fields": "str_list",
               "probes": "str", "snapshots": "bool",
               "gas_density_std": "density"},
}
_REGION_KEYS = {"box_x": "length_pair", "box_y": "length_pair",
                "box_z": "length_pair", "S_w": "fraction", "S_h": "fraction",
                "P_g": "pressure", "P_eff": "pressure", "T": "temperature",
                "porosity": "fraction", "permeability": "permeability"}
_BC_KEYS = {"side": "str", "field": "str", "type": "str", "P_g": "pressure",
            "P_eff": "pressure", "S_w": "fraction", "S_h": "fraction",
            "T": "temperature", "component": "str", "value": "pressure",
            "displacement": "float", "ramp_rate": "pressure_rate",
            "final": "pressure", "box_x": "length_pair",
            "box_y": "length_pair", "box_z": "length_pair"}
_WELL_KEYS = {"cell": "int_list", "phase": "str", "rate": "mass_rate"}

_REQUIRED = {
    "grid": ("dimension", "cells"),
    "time": ("dt", "t_end"),
    "initial": ("S_w", "S_h", "T", "porosity"),
    "soil": ("permeability", "porosity"),
}

_NUM_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


@dataclass
class ScenarioConfig:
    """Normalized (SI) scenario description."""
    data: dict = field(default_factory=dict)   # section -> {key: value}
    path: str = "<memory>"

    # -- typed access ---------------------------------------------------
    def has(self, section, key):
        return section in self.data and key in self.data[section]

    def get(self, section, key, default=None):
        return self.data.get(section, {}).get(key, default)

    def require(self, section, key):
        if not self.has(section, key):
            raise ConfigError(f"missing required key '{key}' in [{section}]",
                              path=self.path)
        return self.data[section][key]

    def sections(self, prefix):
        return [s for s in self.data if s.startswith(prefix + ".")
                or s == prefix]


def _parse_value(raw, dim, path, line_no):
    tokens = raw.split()
    if dim == "str":
        return raw.strip()
    if dim == "str_list":
        return tokens
    if dim == "bool":
        v = raw.strip().lower()
        if v in ("true", "on", "yes", "1"):
            return True
        if v in ("false", "off", "no", "0"):
            return False
        raise ConfigError(f"expected boolean, got '{raw}'", path, line_no)
    if dim == "int":
        try:
            return int(tokens[0])
        except (ValueError, IndexError):
            raise ConfigError(f"expected integer, got '{raw}'", path, line_no)
    if dim == "int_list":
        try:
            return [int(t) for t in tokens]
        except ValueError:
            raise ConfigError(f"expected integers, got '{raw}'", path, line_no)
    if dim in ("float", "temperature_diff"):
        # temperature differences convert with pure factors (K)
        try:
            return float(tokens[0])
        except (ValueError, IndexError):
            raise ConfigError(f"expected number, got '{raw}'", path, line_no)
    if dim == "length_pair":
        nums = [t for t in tokens if _NUM_RE.match(t)]
        unit = tokens[-1] if tokens and not _NUM_RE.match(tokens[-1]) else None
        if len(nums) != 2:
            raise ConfigError(f"expected two numbers, got '{raw}'", path, line_no)
        try:
            return tuple(convert(float(v), unit, "length") for v in nums)
        except ConfigError as exc:
            raise ConfigError(str(exc), path, line_no)
    # scalar with optional unit
    if not tokens:
        raise ConfigError("empty value", path, line_no)
    num = tokens[0]
    unit = tokens[1] if len(tokens) > 1 else None
    if not _NUM_RE.match(num):
        raise ConfigError(f"expected '<number> [unit]', got '{raw}'", path, line_no)
    if unit is not None and not known_unit(unit):
        raise ConfigError(f"unknown unit '{unit}'", path, line_no)
    try:
        return convert(float(num), unit, dim)
    except ConfigError as exc:
        raise ConfigError(str(exc), path, line_no)


def _schema_for(section):
    if section in _SCHEMA:
        return _SCHEMA[section]
    if section.startswith("region."):
        return _REGION_KEYS
    if section.startswith("bc."):
        return _BC_KEYS
    if section.startswith("wells."):
        return _WELL_KEYS
    return None


def parse_scenario_text(text, path="<memory>"):
    cfg = ScenarioConfig(path=path)
    section = None
    for line_no, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if _schema_for(section) is None:
                raise ConfigError(f"unknown section [{section}]", path, line_no)
            cfg.data.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", path, line_no)
        if section is None:
            raise ConfigError("key outside any [section]", path, line_no)
        key, raw = (p.strip() for p in line.split("=", 1))
        schema = _schema_for(section)
        if key not in schema:
            raise ConfigError(
                f"unknown key '{key}' in [{section}] "
                f"(valid: {', '.join(sorted(schema))})", path, line_no)
        cfg.data[section][key] = _parse_value(raw, schema[key], path, line_no)
    _validate_required(cfg)
    return cfg


def _validate_required(cfg):
    missing = []
    for section, keys in _REQUIRED.items():
        for k in keys:
            if not cfg.has(section, k):
                missing.append(f"[{section}] {k}")
    if not (cfg.has("initial", "P_g") or cfg.has("initial", "P_eff")):
        missing.append("[initial] P_g or P_eff")
    if missing:
        raise ConfigError("missing required configuration: "
                          + "; ".join(missing), path=cfg.path)


def preset_names():
    pkg = resources.files("hydresim") / "presets"
    return sorted(p.name[:-4] for p in pkg.iterdir() if p.name.endswith(".cfg"))


def load_scenario(path_or_preset):
    """Load a scenario file, or a named preset shipped with the package."""
    import os
    if os.path.exists(path_or_preset):
        with open(path_or_preset, "r", encoding="utf-8") as fh:
            return parse_scenario_text(fh.read(), path=path_or_preset)
    pkg = resources.files("hydresim") / "presets" / (path_or_preset + ".cfg")
    try:
        text = pkg.read_text(encoding="utf-8")
    except (FileNotFoundError, OSError):
        raise ConfigError(
            f"'{path_or_preset}' is neither a readable file nor a preset "
            f"(presets: {', '.join(preset_names())})")
    return parse_scenario_text(text, path=f"preset:{path_or_preset}")


def dump_scenario(cfg, fh):
    """Write the normalized SI form; load(dump(load(x))) is a fixed point."""
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return f"{v:.12g}"
        if isinstance(v, (list, tuple)):
            return " ".join(fmt(x) for x in v)
        return str(v)
    for section in sorted(cfg.data):
        fh.write(f"[{section}]\n")
        for key in sorted(cfg.data[section]):
            fh.write(f"{key} = {fmt(cfg.data[section][key])}\n")
        fh.write("\n")


# ----------------------------------------------------------------------
# building runtime objects
_DENSITY_LAWS = ("constant", "compressible", "real_gas", "ideal_gas")


def _fluid_from(cfg, section, name, defaults):
    get = lambda k, d=None: cfg.get(section, k, d)
    M = get("molar_mass", defaults["M"])
    law = get("density", defaults["density"])
    if law == "constant":
        density = mat.ConstantDensity(get("density_value", defaults["rho0"]))
    elif law == "compressible":
        density = mat.CompressibleDensity(
            get("density_value", defaults["rho0"]),
            get("bulk_modulus", defaults["B"]),
            get("reference_pressure", 0.0))
    elif law in ("real_gas", "ideal_gas"):
        density = mat.GasDensity(M, use_z=(law == "real_gas"))
    else:
        raise ConfigError(f"unknown density law '{law}' in [{section}]",
                          path=cfg.path)
    visc = get("viscosity", defaults["viscosity"])
    if visc == "constant":
        viscosity = mat.ConstantViscosity(get("viscosity_value",
                                              defaults["mu0"]))
    elif visc == "methane_correlation":
        viscosity = mat.MethaneViscosity()
    elif visc == "water_correlation":
        viscosity = mat.WaterViscosity()
    else:
        raise ConfigError(f"unknown viscosity law '{visc}' in [{section}]",
                          path=cfg.path)
    cond = get("conductivity", defaults["conductivity"])
    if cond == "constant":
        conductivity = mat.ConstantConductivity(get("conductivity_value",
                                                    defaults["kc0"]))
    elif cond == "methane_polynomial":
        conductivity = mat.GasConductivity()
    elif cond == "water_log":
        conductivity = mat.WaterConductivity()
    else:
        raise ConfigError(f"unknown conductivity law '{cond}' in [{section}]",
                          path=cfg.path)
    return mat.FluidPhase(
        name=name, M=M, density=density, viscosity=viscosity,
        conductivity=conductivity, Cp=get("cp", defaults["Cp"]),
        Cv=get("cv", defaults["Cv"]),
        B=get("bulk_modulus", defaults["B"]))


def _solid_from(cfg, section, name, rho0_def, cv_def, kc_def, M_def=0.0):
    get = lambda k, d=None: cfg.get(section, k, d)
    rho0 = get("density_value", rho0_def)
    law = get("density", "constant")
    if law == "poroelastic":
        density = mat.PoroelasticSolidDensity(rho0)
    elif law == "constant":
        density = mat.ConstantSolidDensity(rho0)
    else:
        raise ConfigError(f"unknown solid density law '{law}' in [{section}]",
                          path=cfg.path)
    return mat.SolidPhase(
        name=name, density=density, Cv=get("cv", cv_def),
        conductivity=mat.ConstantConductivity(get("conductivity_value", kc_def)),
        M=get("molar_mass", M_def), rho0=rho0)


def build_materials(cfg):
    gas = _fluid_from(cfg, "fluid.gas", "gas", dict(
        M=0.016, density="real_gas", rho0=0.717, B=1.013e8, mu0=1.0245e-5,
        viscosity="methane_correlation", conductivity="methane_polynomial",
        Cp=2180.0, Cv=1660.0, kc0=0.03))
    water = _fluid_from(cfg, "fluid.water", "water", dict(
        M=0.018, density="constant", rho0=1000.0, B=2.933e9, mu0=1e-3,
        viscosity="water_correlation", conductivity="water_log",
        Cp=4186.0, Cv=4186.0, kc0=0.6))
    hydrate = _solid_from(cfg, "phase.hydrate", "hydrate", 900.0, 2700.0, 2.1,
                          M_def=0.119)
    soil = _solid_from(cfg, "phase.soil", "soil", 2100.0, 800.0, 1.9)

    g = lambda s, k, d=None: cfg.get(s, k, d)
    hyd = mat.SoilHydraulics(
        K_0=cfg.require("soil", "permeability"),
        phi_0=cfg.require("soil", "porosity"),
        P_entry=g("soil", "entry_pressure", 5e3),
        lambda_bc=g("soil", "lambda_bc", 1.5),
        S_wr=g("soil", "residual_water", 0.0),
        S_gr=g("soil", "residual_gas", 0.0),
        m_exp=g("soil", "m_exponent", 3.0),
        a_exp=g("soil", "a_exponent", 1.0),
        n_tau=g("soil", "tortuosity_exponent", 1.0),
        pc_mode=g("soil", "pc_model", "brooks_corey"),
        kr_mode=g("soil", "kr_model", "burdine"),
        kr_w_const=g("soil", "kr_water", 0.5),
        kr_g_const=g("soil", "kr_gas", 0.5),
        perm_mode=g("soil", "permeability_model", "scaled"))

    kin = mat.KineticParams(
        mode=g("kinetics", "mode", "off"),
        k_d0=g("kinetics", "k_d0", 3.6e4),
        Ea_over_R=g("kinetics", "activation_T", 9400.0),
        N_h=g("kinetics", "hydration_number", 5.75),
        A1=g("kinetics", "A1", 1e3),
        A2=g("kinetics", "A2", 38.980),
        A3=g("kinetics", "A3", 8533.80),
        A2_cold=g("kinetics", "A2_cold"),
        A3_cold=g("kinetics", "A3_cold"),
        B1=g("kinetics", "B1", 56599.0),
        B2=g("kinetics", "B2", 16.744),
        heat_form=g("kinetics", "heat_form", "per_mol"),
        gamma_rule=g("kinetics", "reaction_area", "one"),
        gamma_const=g("kinetics", "reaction_area_value", 1.0),
        A_s0=g("kinetics", "specific_area", 1e5),
        fugacity_mode=g("kinetics", "fugacity", "peng_robinson"),
        consistent_hydrate_mass=g("phase.hydrate", "consistent_molar_mass", False))
    if cfg.has("kinetics", "Pe_constant"):
        kin.Pe_mode = "constant"
        kin.Pe_const = cfg.get("kinetics", "Pe_constant")

    mech = mat.MechParams(
        E_s0=g("mechanics", "E_s0", 0.3e9),
        E_h=g("mechanics", "E_h", 1.35e9),
        nu=g("mechanics", "nu", 0.2),
        b=g("mechanics", "b", 0.0),
        c=g("mechanics", "c", 1.0),
        d=g("mechanics", "d", 1.0),
        sigma_c0=g("mechanics", "sigma_c0", 1e3),
        alpha_biot=g("mechanics", "alpha_biot", 0.8),
        B_sh=g("mechanics", "B_sh", 1e10))

    vle = mat.VleParams(
        mode=g("modes", "vle", "full"),
        H_ref=g("vle", "henry_ref", 2.5274e-10),
        C_H=g("vle", "henry_C", 1600.0),
        T_ref=g("vle", "henry_T_ref", 298.15),
        antoine_A=g("vle", "antoine_A", 8.07131),
        antoine_B=g("vle", "antoine_B", 1730.63),
        antoine_C=g("vle", "antoine_C", 233.426),
        T_min=g("vle", "T_min", 250.0),
        T_max=g("vle", "T_max", 450.0))

    diff = mat.DiffusionParams(
        enabled=g("diffusion", "enabled", True),
        D_g_ref=g("diffusion", "D_gas_ref", 2.6e-5),
        P_ref=g("diffusion", "reference_pressure", 101325.0),
        T_ref=g("diffusion", "reference_T", 298.15),
        exponent=g("diffusion", "exponent", 1.823),
        wc_psi=g("diffusion", "wc_association", 2.6),
        wc_M_solvent=g("diffusion", "wc_solvent_molar_mass", 18.015),
        wc_V_A=g("diffusion", "wc_molar_volume", 29.6))

    params = mat.MaterialParameters(
        gas=gas, water=water, hydrate=hydrate, soil=soil, hydraulics=hyd,
        kinetics=kin, mechanics=mech, vle=vle, diffusion=diff,
        T_ref_energy=g("thermal", "T_ref", 273.15),
        rho_gas_std=g("output", "gas_density_std", 0.717))
    params.validate()
    return params


@dataclass
class RunSetup:
    cfg: ScenarioConfig
    grid: object
    params: object
    driver: object
    state: SimulationState
    dt: float
    t_end: float
    probes: list
    probe_fields: list
    cadence: int
    cross_section: float
    name: str


def _region_mask(grid, cfg, section):
    mask = np.ones(grid.n_cells, dtype=bool)
    for ax, key in enumerate(("box_x", "box_y", "box_z")[:grid.dim]):
        if cfg.has(section, key):
            lo, hi = cfg.get(section, key)
            c = grid.cell_centers[:, ax]
            mask &= (c >= lo) & (c <= hi)
    return mask


def _flow_bcs(cfg, grid):
    bcs = []
    for section in [s for s in cfg.data if s.startswith("bc.")]:
        if cfg.get(section, "field", "flow") != "flow":
            continue
        side = cfg.require(section, "side")
        kind = cfg.get(section, "type", "dirichlet")
        if kind == "noflow":
            continue
        box = []
        for key in ("box_x", "box_y", "box_z")[:grid.dim]:
            box.append(cfg.get(section, key))
        box = tuple(box) if any(b is not None for b in box) else None
        P = cfg.get(section, "P_g")
        P_eff = cfg.get(section, "P_eff")
        P_is_eff = P is None and P_eff is not None
        Pv = P_eff if P_is_eff else P
        if Pv is None:
            raise ConfigError(f"[{section}] needs P_g or P_eff", path=cfg.path)
        if cfg.has(section, "ramp_rate"):
            Pv = TimeRamp(Pv, cfg.get(section, "ramp_rate"),
                          cfg.get(section, "final"))
        bcs.append(FlowBC(tag=side, kind="dirichlet", P_g=Pv,
                          P_is_effective=P_is_eff,
                          S_w=cfg.get(section, "S_w"),
                          S_h=cfg.get(section, "S_h", 0.0),
                          T=cfg.get(section, "T"), box=box))
    return bcs


def _mech_bcs(cfg, grid):
    comp_map = {"x": 0, "y": 1, "z": 2}
    bcs = []
    for section in [s for s in cfg.data if s.startswith("bc.")]:
        if cfg.get(section, "field", "flow") != "mechanics":
            continue
        side = cfg.require(section, "side")
        comp = comp_map[cfg.get(section, "component", side[0])]
        kind = cfg.require(section, "type")
        if kind == "fixed":
            bcs.append(MechBC(side, comp, "fixed",
                              cfg.get(section, "displacement", 0.0)))
        elif kind == "traction":
            value = cfg.get(section, "value", 0.0)
            if cfg.has(section, "ramp_rate"):
                value = TimeRamp(0.0, cfg.get(section, "ramp_rate"), value)
            bcs.append(MechBC(side, comp, "traction", value))
        else:
            raise ConfigError(f"[{section}] unknown mechanics BC '{kind}'",
                              path=cfg.path)
    return bcs


def _wells(cfg, grid):
    wells = []
    for section in [s for s in cfg.data if s.startswith("wells.")]:
        idx = cfg.require(section, "cell")
        if len(idx) != grid.dim:
            raise ConfigError(f"[{section}] cell index needs {grid.dim} entries",
                              path=cfg.path)
        wells.append(WellSource(
            cell=grid.cell_index(tuple(idx)),
            phase=cfg.get(section, "phase", "water"),
            mass_rate=cfg.require(section, "rate")))
    return wells


def build_run(cfg):
    """Materialize grid, materials, models, driver and initial state."""
    dim = cfg.require("grid", "dimension")
    cells = cfg.require("grid", "cells")
    extents = []
    for ax in ("extent_x", "extent_y", "extent_z")[:dim]:
        if not cfg.has("grid", ax):
            raise ConfigError(f"missing [grid] {ax} for a {dim}D run", path=cfg.path)
        extents.append(cfg.get("grid", ax))
    if len(cells) != dim:
        raise ConfigError(f"[grid] cells needs {dim} entries", path=cfg.path)
    grid = build_grid(dim, cells, extents)
    params = build_materials(cfg)

    # per-cell reference fields with region overrides
    n = grid.n_cells
    K0 = np.full(n, params.hydraulics.K_0)
    phi = np.full(n, cfg.require("initial", "porosity"))
    S_w = np.full(n, cfg.require("initial", "S_w"))
    S_h = np.full(n, cfg.require("initial", "S_h"))
    T = np.full(n, cfg.require("initial", "T"))
    if cfg.has("initial", "P_g"):
        P_g = np.full(n, cfg.get("initial", "P_g"))
        P_from_eff = False
    else:
        P_g = np.full(n, cfg.get("initial", "P_eff"))
        P_from_eff = True
    for section in [s for s in cfg.data if s.startswith("region.")]:
        m = _region_mask(grid, cfg, section)
        for key, arr in (("S_w", S_w), ("S_h", S_h), ("T", T),
                         ("porosity", phi), ("P_g", P_g), ("P_eff", P_g),
                         ("permeability", K0)):
            if cfg.has(section, key):
                arr[m] = cfg.get(section, key)
    if P_from_eff:
        # convert effective pore pressure to gas pressure via P_c at the IC
        from . import constitutive as cst
        pc = cst.capillary_pressure(S_w, S_h, phi, params.hydraulics)
        _, _, swf, _ = cst.derived_saturations(
            S_w, S_h, params.hydraulics.S_wr, params.hydraulics.S_gr,
            params.hydraulics.sat_eps)
        P_g = P_g + swf * pc

    state = SimulationState(grid=grid, t=0.0, P_g=P_g, S_w=S_w, S_h=S_h,
                            T=T, phi=phi)

    newton = NewtonOptions(
        rtol=cfg.get("modes", "newton_rtol", 1e-6),
        atol=cfg.get("modes", "newton_atol", 1e-8),
        max_iter=cfg.get("modes", "newton_max_iter", 25),
        scales=(1e5, 1.0, 1.0, 1.0))
    fopts = FlowOptions(
        energy_mode=cfg.get("modes", "energy", "full"),
        gravity=cfg.get("modes", "gravity", False),
        newton=newton,
        bath_U=cfg.get("thermal", "bath_coupling", 0.0),
        bath_T=cfg.get("thermal", "bath_T", 273.15))
    flow = FlowModel(grid, params, K0, params.hydraulics.phi_0,
                     _flow_bcs(cfg, grid), wells=_wells(cfg, grid),
                     options=fopts)

    blocks = cfg.get("blocks", "enabled", "flow")
    geo = None
    poro = None
    if blocks == "full":
        geo = GeomechSolver(grid, _mech_bcs(cfg, grid),
                            gravity=cfg.get("modes", "gravity", False))
    if blocks in ("flow+poro", "full"):
        poro = PorosityModel(grid, params.soil.density)
    coupling = CouplingConfig(
        blocks=blocks,
        outer_tol=cfg.get("blocks", "outer_tol", 1e-5),
        max_outer=cfg.get("blocks", "max_outer", 10),
        relaxation=cfg.get("blocks", "relaxation", 1.0),
        aitken=cfg.get("blocks", "aitken", True),
        max_step_cuts=cfg.get("blocks", "max_step_cuts", 5))
    driver = SimulationDriver(grid, params, flow, geo, poro, coupling)

    probes = []
    raw = cfg.get("output", "probes", "")
    if raw:
        for p in raw.split(";"):
            p = p.strip()
            if p:
                probes.append(tuple(float(v) for v in p.split(",")))
    fields = cfg.get("output", "probe_fields",
                     ["P_g", "P_eff", "S_g", "S_w", "S_h", "T"])
    return RunSetup(
        cfg=cfg, grid=grid, params=params, driver=driver, state=state,
        dt=cfg.require("time", "dt"), t_end=cfg.require("time", "t_end"),
        probes=probes, probe_fields=list(fields),
        cadence=cfg.get("output", "cadence", 0),
        cross_section=cfg.get("grid", "cross_section", 1.0),
        name=cfg.get("meta", "name", "scenario"))
