"""Kim-Bishnoi kinetic phase change: equilibrium curve, rate constant,
component generation rates and the reaction heat."""

from dataclasses import dataclass

import numpy as np

from . import constitutive as cst
from .eos import peng_robinson_fugacity
from .materials import R_UNIVERSAL


def equilibrium_pressure(T, kin):
    """Hydrate stability pressure P_e = A1 exp(A2 - A3/T) [Pa].

    An optional second (A2_cold, A3_cold) branch covers the subcooled side of
    the quadruple point; Pe_mode='constant' pins P_e (shifted-curve runs).
    """
    if kin.Pe_mode == "constant":
        return np.full_like(np.asarray(T, dtype=float), kin.Pe_const)
    T = np.asarray(T, dtype=float)
    pe = kin.A1 * np.exp(kin.A2 - kin.A3 / T)
    if kin.A2_cold is not None:
        cold = kin.A1 * np.exp(kin.A2_cold - kin.A3_cold / T)
        pe = np.where(T < kin.T_branch, cold, pe)
    return pe


def rate_constant(T, k_d0, Ea_over_R):
    """Arrhenius rate constant [mol/(m2 Pa s)]."""
    return k_d0 * np.exp(-Ea_over_R / np.asarray(T, dtype=float))


def _soft_min(value, cap, p=8.0):
    """Smooth min(value, cap) for positive arguments, Newton-friendly."""
    v = np.maximum(value, 0.0)
    c = np.maximum(cap, 0.0)
    return v * c / (v**p + c**p + 1e-300) ** (1.0 / p)


@dataclass
class KineticRates:
    g_ch4: np.ndarray      # kg/(m3 s)
    g_h2o: np.ndarray
    g_hyd: np.ndarray
    Q_h: np.ndarray        # W/m3
    P_e: np.ndarray        # Pa
    f_g: np.ndarray        # Pa
    k_reac: np.ndarray
    A_rs: np.ndarray       # 1/m


def kinetic_rates(P_g, T, S_h, S_w, phi, K, params, dt=None, f_g=None):
    """Volumetric generation rates for CH4, H2O and hydrate plus reaction heat.

    Dissociation (P_e > f_g) needs hydrate present; reformation needs both gas
    and water. When dt is given, rates are soft-limited so a backward-Euler
    step cannot consume more hydrate (or fluid) than the cell holds.
    """
    kin = params.kinetics
    P_g = np.asarray(P_g, dtype=float)
    T = np.asarray(T, dtype=float)
    S_h = np.asarray(S_h, dtype=float)
    S_w = np.asarray(S_w, dtype=float)
    phi = np.asarray(phi, dtype=float)
    S_g = 1.0 - S_w - S_h

    M_g = params.gas.M
    M_w = params.water.M
    M_h = params.M_hyd
    rho_h = params.hydrate.rho0

    P_e = equilibrium_pressure(T, kin)
    if kin.mode == "off":
        zero = np.zeros_like(P_g)
        return KineticRates(zero, zero.copy(), zero.copy(), zero.copy(),
                            P_e, P_g.copy(), zero.copy(), zero.copy())

    if kin.mode == "simplified":
        # reduced form: f_g := P, reaction area linear in S_h
        fg = P_g
        k_reac = rate_constant(T, kin.k_d0, kin.Ea_over_R)
        A_rs = kin.A_s0 * np.maximum(S_h, 0.0)
    else:
        if f_g is None:
            fg = peng_robinson_fugacity(P_g, T, params.eos) \
                if kin.fugacity_mode == "peng_robinson" else P_g
        else:
            fg = f_g
        k_reac = rate_constant(T, kin.k_d0, kin.Ea_over_R)
        A_s = cst.specific_surface_area(phi, S_h, K)
        A_rs = cst.reaction_area_fraction(phi, S_h, kin) * A_s

    driving = P_e - fg
    g_ch4 = k_reac * M_g * A_rs * driving

    # directional guards: no dissociation without hydrate, no reformation
    # without free gas and water
    dissociating = driving > 0.0
    g_ch4 = np.where(dissociating & (S_h <= 0.0), 0.0, g_ch4)
    g_ch4 = np.where(~dissociating & ((S_g <= 0.0) | (S_w <= 0.0)), 0.0, g_ch4)

    if dt is not None and dt > 0.0:
        # a step cannot consume more hydrate than the cell holds (dissociation)
        # nor more free gas (reformation); smooth cap keeps Newton happy
        hyd_cap = rho_h * phi * np.maximum(S_h, 0.0) / dt * (M_g / M_h)
        diss = np.where(dissociating, _soft_min(g_ch4, hyd_cap), 0.0)
        rho_g_here = params.gas.density(P_g, T)
        gas_cap = rho_g_here * phi * np.maximum(S_g, 0.0) / dt
        refo = np.where(~dissociating, -_soft_min(-g_ch4, gas_cap), 0.0)
        g_ch4 = diss + refo

    g_h2o = g_ch4 * kin.N_h * M_w / M_g
    g_hyd = -g_ch4 * M_h / M_g

    if kin.heat_form == "per_kg_gas":
        # heat per kg of CH4 released; dissociation (g_ch4 > 0) consumes heat
        Q_h = -(kin.heat_c1 * T + kin.heat_c0) * g_ch4
    else:
        Q_h = (g_hyd / M_h) * (kin.B1 - kin.B2 / T)

    return KineticRates(g_ch4, g_h2o, g_hyd, Q_h, P_e, fg, k_reac, A_rs)
