"""Equations of state, vapor-liquid equilibrium, hydraulic and poroelastic laws.

Everything here is a pure function of the local state; the flow/geomech
assemblers call these cell-wise on numpy arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateStateError
from .materials import MaterialParameters


# ----------------------------------------------------------------------
# saturations
def derived_saturations(S_w, S_h, S_wr=0.0, S_gr=0.0, eps=1e-6, clamp=True):
    """Gas saturation and effective (normalized) saturations.

    S_we normalizes the aqueous saturation over the hydrate-free, residual-free
    pore space; S_w_frac/S_g_frac split the mobile pore volume itself.
    Returns (S_g, S_we, S_w_frac, S_g_frac).
    """
    S_w = np.asarray(S_w, dtype=float)
    S_h = np.asarray(S_h, dtype=float)
    S_g = 1.0 - S_w - S_h
    mobile = 1.0 - S_h
    if not clamp and np.any(mobile <= 0.0):
        raise DegenerateStateError("no pore fluid: S_h = 1")
    mobile = np.maximum(mobile, eps)
    denom = np.maximum(1.0 - S_h - (S_wr + S_gr), eps)
    S_we = (S_w - (S_wr + S_gr)) / denom
    S_we = np.clip(S_we, eps, 1.0 - eps)
    S_w_frac = np.clip(S_w / mobile, 0.0, 1.0)
    S_g_frac = np.clip(S_g / mobile, 0.0, 1.0)
    return S_g, S_we, S_w_frac, S_g_frac


# ----------------------------------------------------------------------
# vapor-liquid equilibrium
@dataclass
class VleResult:
    chi_g_ch4: np.ndarray
    chi_g_h2o: np.ndarray
    chi_w_ch4: np.ndarray
    chi_w_h2o: np.ndarray
    henry: np.ndarray
    p_sat: np.ndarray


def henry_constant(T, vle):
    """van't Hoff form, mole fraction per Pa."""
    T = np.clip(np.asarray(T, dtype=float), vle.T_min, vle.T_max)
    return vle.H_ref * np.exp(vle.C_H * (1.0 / T - 1.0 / vle.T_ref))


def antoine_psat(T, vle):
    """Saturated water vapor pressure in Pa from the Antoine correlation."""
    T = np.clip(np.asarray(T, dtype=float), vle.T_min, vle.T_max)
    T_C = T - 273.15
    log10_mmhg = vle.antoine_A - vle.antoine_B / (vle.antoine_C + T_C)
    return 133.322 * 10.0**log10_mmhg


def vle(P_g, T, params):
    """Solve the two-law, two-closure system for the four mole fractions.

    chi_w_ch4 = H chi_g_ch4 P_g and chi_g_h2o = chi_w_h2o Psat/P_g together
    with the per-phase summation conditions form a 2x2 linear system with the
    closed form used here. Immiscible mode pins the pure-phase limit.
    """
    P_g = np.asarray(P_g, dtype=float)
    T = np.asarray(T, dtype=float)
    if params.mode == "immiscible":
        one = np.ones(np.broadcast(P_g, T).shape)
        zero = np.zeros_like(one)
        return VleResult(one.copy(), zero.copy(), zero.copy(), one.copy(),
                         zero.copy(), zero.copy())
    H = henry_constant(T, params)
    p_sat = antoine_psat(T, params)
    # unknowns x = chi_g_ch4, y = chi_w_h2o:
    #   x + y * (p_sat/P_g) = 1   (gas-phase sum)
    #   H P_g x + y = 1           (water-phase sum)
    det = 1.0 - H * p_sat
    if np.any(np.abs(det) < 1e-14):
        raise DegenerateStateError("VLE system singular: H * Psat = 1")
    x = (1.0 - p_sat / P_g) / det
    y = 1.0 - H * P_g * x
    x = np.clip(x, 0.0, 1.0)
    y = np.clip(y, 0.0, 1.0)
    return VleResult(
        chi_g_ch4=x,
        chi_g_h2o=1.0 - x,
        chi_w_ch4=1.0 - y,
        chi_w_h2o=y,
        henry=H,
        p_sat=p_sat,
    )


# ----------------------------------------------------------------------
# diffusion coefficients
def diffusion_coefficient(phase, P, T, params):
    """Binary CH4-H2O diffusion coefficient [m2/s] in the given phase."""
    P = np.asarray(P, dtype=float)
    T = np.asarray(T, dtype=float)
    if phase == "g":
        return params.D_g_ref * (params.P_ref / P) * (T / params.T_ref) ** params.exponent
    if phase == "w":
        # Wilke-Chang for dilute solutes in associated solvents; mu in cP
        mu_cp = 1000.0 * WaterViscosityForDiffusion()(T)
        d_cm2 = (7.4e-8 * np.sqrt(params.wc_psi * params.wc_M_solvent) * T
                 / (mu_cp * params.wc_V_A**0.6))
        return d_cm2 * 1e-4
    raise ConfigError(f"unknown phase '{phase}' for diffusion")


class WaterViscosityForDiffusion:
    """Solvent viscosity inside Wilke-Chang, kept independent of scenario laws."""

    def __call__(self, T):
        r = 273.15 / np.asarray(T, dtype=float)
        return 0.001792 * np.exp(-1.94 - 4.80 * r + 6.74 * r * r)


# ----------------------------------------------------------------------
# hydraulic properties
def pc_hydrate_scaling(S_h, m_exp, lambda_bc):
    """(1 - S_h)^(-(m lambda - 1)/(m lambda)) capillary scaling."""
    e = (m_exp * lambda_bc - 1.0) / (m_exp * lambda_bc)
    return (1.0 - np.asarray(S_h, dtype=float)) ** (-e)


def pc_porosity_scaling(phi, phi_0, a_exp):
    phi = np.asarray(phi, dtype=float)
    return (phi_0 / phi) * ((1.0 - phi) / (1.0 - phi_0)) ** a_exp


def capillary_pressure(S_w, S_h, phi, hyd):
    """Scaled Brooks-Corey gas entry law, capped at pc_cap_factor * P_entry."""
    if hyd.pc_mode == "zero":
        return np.zeros_like(np.asarray(S_w, dtype=float))
    _, S_we, _, _ = derived_saturations(S_w, S_h, hyd.S_wr, hyd.S_gr, hyd.sat_eps)
    pc0 = hyd.P_entry * S_we ** (-1.0 / hyd.lambda_bc)
    pc = pc0 * pc_hydrate_scaling(S_h, hyd.m_exp, hyd.lambda_bc)
    pc = pc * pc_porosity_scaling(phi, hyd.phi_0, hyd.a_exp)
    return np.minimum(pc, hyd.pc_cap_factor * hyd.P_entry)


def perm_hydrate_scaling(S_h, m_exp):
    """(1 - S_h)^((5m + 4)/(2m)) permeability scaling."""
    e = (5.0 * m_exp + 4.0) / (2.0 * m_exp)
    return np.maximum(1.0 - np.asarray(S_h, dtype=float), 0.0) ** e


def perm_porosity_scaling(phi, phi_0, a_exp):
    return (np.asarray(phi, dtype=float) / phi_0) * pc_porosity_scaling(phi, phi_0, a_exp) ** (-2.0)


def intrinsic_permeability(S_h, phi, K_0, hyd):
    """Reference permeability scaled for hydrate occupancy and porosity change."""
    if hyd.perm_mode == "constant":
        return np.broadcast_to(np.asarray(K_0, dtype=float),
                               np.shape(np.asarray(S_h))).copy() if np.shape(S_h) else np.asarray(K_0, dtype=float)
    K = K_0 * perm_hydrate_scaling(S_h, hyd.m_exp) * perm_porosity_scaling(phi, hyd.phi_0, hyd.a_exp)
    return np.maximum(K, hyd.K_floor)


def relative_permeabilities(S_we, hyd):
    """Brooks-Corey/Burdine pair; constant override mode for benchmark runs."""
    S_we = np.asarray(S_we, dtype=float)
    if hyd.kr_mode == "constant":
        shape = S_we.shape
        return (np.full(shape, hyd.kr_w_const), np.full(shape, hyd.kr_g_const))
    lam = hyd.lambda_bc
    k_rw = S_we ** ((2.0 + 3.0 * lam) / lam)
    k_rg = (1.0 - S_we) ** 2 * (1.0 - S_we ** ((2.0 + lam) / lam))
    return np.clip(k_rw, 0.0, 1.0), np.clip(k_rg, 0.0, 1.0)


def specific_surface_area(phi, S_h, K):
    """A_s = sqrt(phi_eff^3 / (2 K)) with phi_eff = phi (1 - S_h)."""
    phi_eff = np.asarray(phi, dtype=float) * (1.0 - np.asarray(S_h, dtype=float))
    return np.sqrt(np.maximum(phi_eff, 0.0) ** 3 / (2.0 * np.asarray(K, dtype=float)))


def reaction_area_fraction(phi, S_h, kin):
    """Fraction of the pore surface active in the phase change."""
    if kin.gamma_rule == "one":
        return np.ones_like(np.asarray(phi, dtype=float))
    if kin.gamma_rule == "phi_sh":
        return np.asarray(phi, dtype=float) * np.asarray(S_h, dtype=float)
    if kin.gamma_rule == "constant":
        return np.full_like(np.asarray(phi, dtype=float), kin.gamma_const)
    raise ConfigError(f"unknown reaction-area rule '{kin.gamma_rule}'")


def tortuosity(phi, n):
    if not (1.0 <= n <= 3.0):
        raise ConfigError(f"tortuosity exponent must lie in [1, 3], got {n}")
    return np.asarray(phi, dtype=float) ** n


# ----------------------------------------------------------------------
# poroelastic laws
def effective_pressure(S_w, S_g, P_w, P_g):
    """Saturation-weighted pore pressure of the mobile phases."""
    S_w = np.asarray(S_w, dtype=float)
    S_g = np.asarray(S_g, dtype=float)
    tot = S_w + S_g
    if np.any(tot <= 0.0):
        raise DegenerateStateError("S_w + S_g = 0: no mobile phase pressure")
    return (S_w * np.asarray(P_w, dtype=float) + S_g * np.asarray(P_g, dtype=float)) / tot


def biot_alpha(B_m, B_sh):
    alpha = 1.0 - B_m / B_sh
    return alpha


def youngs_modulus_composite(sigma_c, S_h, mech):
    """Composite stiffness: confining-stress power law plus hydrate cementation."""
    sigma_c = np.maximum(np.asarray(sigma_c, dtype=float), 0.0)
    base = mech.E_s0 if mech.b == 0.0 else mech.E_s0 * (sigma_c / mech.sigma_c0) ** mech.b
    return base + mech.c * mech.E_h * np.asarray(S_h, dtype=float) ** mech.d


def lame_parameters(E, nu):
    if np.any(np.asarray(nu) >= 0.5):
        raise ConfigError("Poisson ratio must be < 0.5")
    E = np.asarray(E, dtype=float)
    G = E / (2.0 * (1.0 + nu))
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return G, lam


def bulk_modulus(E, nu):
    return np.asarray(E, dtype=float) / (3.0 * (1.0 - 2.0 * nu))


def constrained_modulus(E, nu):
    G, lam = lame_parameters(E, nu)
    return lam + 2.0 * G


def solid_density_rate(rho_sh, G_sh, phi, phi_eff, dsigma_dt, dPeff_dt):
    """Rate form of the grain-rearrangement density law."""
    return rho_sh / (G_sh * (1.0 - phi_eff)) * (dsigma_dt - phi * dPeff_dt)


# ----------------------------------------------------------------------
# thermal/caloric properties
@dataclass
class ThermoProps:
    h_g: np.ndarray
    h_w: np.ndarray
    u_g: np.ndarray
    u_w: np.ndarray
    u_h: np.ndarray
    u_s: np.ndarray
    k_eff: np.ndarray
    rho_g: np.ndarray
    rho_w: np.ndarray
    mu_g: np.ndarray
    mu_w: np.ndarray


def effective_conductivity(phi, S_w, S_g, S_h, T, params):
    """Porosity/saturation weighted lumped conductivity of the medium."""
    kg = params.gas.conductivity(T)
    kw = params.water.conductivity(T)
    kh = params.hydrate.conductivity(T)
    ks = params.soil.conductivity(T)
    phi = np.asarray(phi, dtype=float)
    return (1.0 - phi) * ks + phi * (S_g * kg + S_w * kw + S_h * kh)


def thermo_props(P_g, T, S_w, S_h, phi, params, z=None, P_w=None):
    """Caloric state: enthalpies/internal energies from T_ref, densities,
    viscosities and the lumped conductivity."""
    if np.any(np.asarray(T) <= 0.0):
        raise ConfigError("nonpositive temperature in thermo_props")
    T = np.asarray(T, dtype=float)
    dT = T - params.T_ref_energy
    S_g = 1.0 - np.asarray(S_w) - np.asarray(S_h)
    if P_w is None:
        P_w = P_g
    return ThermoProps(
        h_g=params.gas.Cp * dT,
        h_w=params.water.Cp * dT,
        u_g=params.gas.Cv * dT,
        u_w=params.water.Cv * dT,
        u_h=params.hydrate.Cv * dT,
        u_s=params.soil.Cv * dT,
        k_eff=effective_conductivity(phi, S_w, S_g, S_h, T, params),
        rho_g=params.gas.density(P_g, T, z=z),
        rho_w=params.water.density(P_w, T),
        mu_g=params.gas.viscosity(T),
        mu_w=params.water.viscosity(T),
    )
