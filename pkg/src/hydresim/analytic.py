"""Closed-form references: hydrate-kinetics consolidation (pressure ODE with a
reaction term) and ramped-load 1D consolidation, plus their coefficient
algebra and a brute-force method-of-lines oracle."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError


# ----------------------------------------------------------------------
@dataclass
class KpeCoefficients:
    S: float          # storativity [1/Pa]
    C: float          # kinetic volume-generation coefficient [1/(Pa s)]
    C_m: float        # bulk compressibility 1/B_m [1/Pa]
    mu_f: float       # combined fluid mobility viscosity [Pa s]
    C_v: float        # consolidation parameter [m2/s]
    C_r: float        # reaction parameter [1/s]
    P0: float         # undrained initial pressure [Pa]
    P_e: float        # equilibrium pressure after the stability shift [Pa]
    theta: float      # sqrt(C_r / C_v) [1/m]
    alpha: float
    S_h: float
    q: float


def storativity(phi_e, S_we, S_ge, B_w, B_g, B_sh, alpha):
    """S = phi_e (S_we/B_w + S_ge/B_g) + (alpha - phi_e)/B_sh."""
    return phi_e * (S_we / B_w + S_ge / B_g) + (alpha - phi_e) / B_sh


def kinetic_volume_coefficient(N_h, M_w, rho_w, M_g, rho_g, M_h, rho_sh,
                               k_0, A_s0):
    """C = (N_h M_w/rho_w + M_g/rho_g - M_h/rho_sh) k_0 A_s0."""
    return (N_h * M_w / rho_w + M_g / rho_g - M_h / rho_sh) * k_0 * A_s0


def fluid_mobility_viscosity(mu_g, mu_w):
    """1/mu_f = (1/mu_g + 1/mu_w)/2."""
    return 2.0 / (1.0 / mu_g + 1.0 / mu_w)


def kpe_coefficients(*, K, mu_g, mu_w, B_m, S_storativity=None,
                     phi_e=None, S_we=1.0, S_ge=0.0, B_w=None, B_g=None,
                     B_sh=None, alpha=0.8, S_h=0.3, q=10e6, P_e=0.0,
                     N_h=5.75, M_w=0.018, rho_w=997.05, M_g=0.016,
                     rho_g=0.717, M_h=0.119, rho_sh=900.0, k_0=1.0, A_s0=1e5):
    """Coefficient algebra of the reaction-consolidation pressure equation.

    The storativity may be passed directly (S_storativity) or assembled from
    the compressibility decomposition; both routes are exposed because the
    published control-parameter table pins (C_v, C_r) more tightly than the
    material table pins the storativity split.
    """
    C_m = 1.0 / B_m
    mu_f = fluid_mobility_viscosity(mu_g, mu_w)
    if S_storativity is not None:
        S = float(S_storativity)
    else:
        if phi_e is None or B_w is None or B_g is None or B_sh is None:
            raise ConfigError("need either S_storativity or the full "
                              "(phi_e, B_w, B_g, B_sh) decomposition")
        S = storativity(phi_e, S_we, S_ge, B_w, B_g, B_sh, alpha)
    C = kinetic_volume_coefficient(N_h, M_w, rho_w, M_g, rho_g, M_h, rho_sh,
                                   k_0, A_s0)
    denom = alpha**2 * C_m + S
    if denom <= 0.0:
        raise ConfigError("nonpositive storage denominator")
    C_v = K / (mu_f * denom)
    C_r = C * S_h / denom
    P0 = (alpha * C_m * q + C * S_h * P_e) / (denom + C * S_h)
    theta = np.sqrt(C_r / C_v)
    return KpeCoefficients(S=S, C=C, C_m=C_m, mu_f=mu_f, C_v=C_v, C_r=C_r,
                           P0=P0, P_e=P_e, theta=theta, alpha=alpha,
                           S_h=S_h, q=q)


def kpe_pressure(z, t, coef, L, n_terms=None, term_tol=1e-12, min_terms=50):
    """Series solution of the reaction-consolidation pressure problem.

    (P_e - P)/(P_e - P0) = cosh(theta (L-z))/cosh(theta L)
      + (2/L) sum_n (1/lam_n)(1 - lam_n^2/(lam_n^2 + theta^2)) sin(lam_n z)
              exp(-C_v (lam_n^2 + theta^2) t),   lam_n = (n - 1/2) pi / L.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    theta = coef.theta
    steady = np.cosh(theta * (L - z)) / np.cosh(theta * L)
    total = steady.copy()
    n = 1
    while True:
        lam = (n - 0.5) * np.pi / L
        amp = (2.0 / L) / lam * (1.0 - lam**2 / (lam**2 + theta**2))
        term = amp * np.sin(lam * z) * np.exp(-coef.C_v * (lam**2 + theta**2) * t)
        total += term
        biggest = np.max(np.abs(amp)) * np.exp(-coef.C_v * (lam**2 + theta**2) * t)
        n += 1
        if n_terms is not None and n > n_terms:
            break
        if n_terms is None and n > min_terms and biggest < term_tol:
            break
        if n > 100000:
            break
    P = coef.P_e - (coef.P_e - coef.P0) * total
    return P if P.shape != (1,) else float(P[0])


def kpe_ode_reference(z_eval, t_eval, coef, L, n_grid=2000):
    """Brute-force method-of-lines integration of
    dP/dt = C_v P_zz + C_r (P_e - P), P(0) = P0 (Dirichlet), P_z(L) = 0.

    Independent oracle for both the series and the full simulator.
    """
    h = L / n_grid
    zc = (np.arange(n_grid) + 0.5) * h
    Pbar0 = coef.P_e - coef.P0   # work in Pbar = P_e - P (homogeneous form)

    def rhs(t, y):
        lap = np.empty_like(y)
        # Dirichlet Pbar = Pbar0 at z = 0 via ghost reflection
        lap[0] = (y[1] - 3.0 * y[0] + 2.0 * Pbar0) / h**2
        lap[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h**2
        lap[-1] = (y[-2] - y[-1]) / h**2   # zero-flux end
        return coef.C_v * lap - coef.C_r * y

    y0 = np.full(n_grid, Pbar0)
    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, float(t_eval.max())), y0, t_eval=t_eval,
                    method="BDF", rtol=1e-9, atol=1e-6)
    out = np.empty((len(t_eval), len(np.atleast_1d(z_eval))))
    for i in range(len(t_eval)):
        out[i] = np.interp(np.atleast_1d(z_eval), zc, sol.y[:, i])
    return coef.P_e - out


# ----------------------------------------------------------------------
@dataclass
class TerzaghiCoefficients:
    c: float          # 1D consolidation diffusivity [m2/s]
    H_v: float        # loading efficiency (pore pressure per unit stress)
    B_sv: float       # uniaxial drained bulk modulus [Pa]
    S_v: float        # 1D specific storage [1/Pa]
    P_bar0: float     # ramped-load pressure scale [Pa]
    mu_f: float
    sigma_rate: float


def terzaghi_coefficients(*, K, mu_w, mu_nw, B_drained, nu, phi,
                          S_w, S_nw, B_w, B_nw, alpha, L, sigma_rate):
    """Coefficients of the ramped-load consolidation response.

    The uniaxial drained modulus is B + 4G/3 with G from (B, nu); storativity
    combines fluid compressibilities with the composite-matrix term."""
    E = 3.0 * B_drained * (1.0 - 2.0 * nu)
    G = E / (2.0 * (1.0 + nu))
    B_sv = B_drained + 4.0 * G / 3.0
    C_mv = 1.0 / B_sv
    B_sh = B_drained / (1.0 - alpha)
    S = phi * (S_w / B_w + S_nw / B_nw) + (alpha - phi) / B_sh
    mu_f = fluid_mobility_viscosity(mu_w, mu_nw)
    S_v = alpha**2 * C_mv + S
    c = K / (mu_f * S_v)
    H_v = alpha * C_mv / S_v     # equals alpha / (B_sv S_v)
    P_bar0 = L**2 / (2.0 * c) * H_v * sigma_rate
    return TerzaghiCoefficients(c=c, H_v=H_v, B_sv=B_sv, S_v=S_v,
                                P_bar0=P_bar0, mu_f=mu_f, sigma_rate=sigma_rate)


def terzaghi_pressure(z, t, coef, L, n_terms=None, term_tol=1e-12, min_terms=50):
    """Ramped-load consolidation series; z measured from the drained, loaded
    face toward the impermeable base.

    Pbar/Pbar0 = 1 - ((L-z)/L)^2
      - (32/pi^3) sum_m ((-1)^m/(2m+1)^3) exp(-psi^2 c t) cos(psi (L-z)),
    psi = (2m+1) pi / (2L).
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    x = L - z
    total = 1.0 - (x / L) ** 2
    m = 0
    while True:
        psi = (2 * m + 1) * np.pi / (2.0 * L)
        amp = 32.0 / np.pi**3 * (-1.0) ** m / (2 * m + 1) ** 3
        total -= amp * np.exp(-psi**2 * coef.c * t) * np.cos(psi * x)
        m += 1
        if n_terms is not None and m >= n_terms:
            break
        if n_terms is None and m > min_terms and abs(amp) * np.exp(-psi**2 * coef.c * t) < term_tol:
            break
        if m > 100000:
            break
    P = coef.P_bar0 * total
    return P if P.shape != (1,) else float(P[0])


def terzaghi_ode_reference(z_eval, t_eval, coef, L, n_grid=2000):
    """Method-of-lines oracle: dP/dt = c P_zz + H_v sigma_rate, P(z=0) = 0,
    P_z(z=L) = 0, P(t=0) = 0 (z from the drained face)."""
    h = L / n_grid
    zc = (np.arange(n_grid) + 0.5) * h
    src = coef.H_v * coef.sigma_rate

    def rhs(t, y):
        lap = np.empty_like(y)
        lap[0] = (y[1] - 3.0 * y[0]) / h**2
        lap[1:-1] = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / h**2
        lap[-1] = (y[-2] - y[-1]) / h**2
        return coef.c * lap + src

    t_eval = np.atleast_1d(np.asarray(t_eval, dtype=float))
    sol = solve_ivp(rhs, (0.0, float(t_eval.max())), np.zeros(n_grid),
                    t_eval=t_eval, method="BDF", rtol=1e-9, atol=1.0)
    out = np.empty((len(t_eval), len(np.atleast_1d(z_eval))))
    for i in range(len(t_eval)):
        out[i] = np.interp(np.atleast_1d(z_eval), zc, sol.y[:, i])
    return out
