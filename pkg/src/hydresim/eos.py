"""Peng-Robinson equation of state for methane: compressibility and fugacity."""

import numpy as np

from .errors import EosError
from .materials import R_UNIVERSAL

SQRT2 = np.sqrt(2.0)


def _cubic_real_roots(c2, c1, c0):
    """Real roots of z^3 + c2 z^2 + c1 z + c0 = 0, vectorized (Cardano)."""
    c2 = np.asarray(c2, dtype=float)
    p = c1 - c2 * c2 / 3.0
    q = 2.0 * c2**3 / 27.0 - c2 * c1 / 3.0 + c0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    roots = np.full(c2.shape + (3,), np.nan)
    one = disc >= 0.0
    if np.any(one):
        sq = np.sqrt(disc[one])
        u = np.cbrt(-q[one] / 2.0 + sq)
        v = np.cbrt(-q[one] / 2.0 - sq)
        roots[one, 0] = u + v - c2[one] / 3.0
    three = ~one
    if np.any(three):
        r = np.sqrt(-(p[three] / 3.0) ** 3)
        phi = np.arccos(np.clip(-q[three] / (2.0 * r), -1.0, 1.0))
        m = 2.0 * np.sqrt(-p[three] / 3.0)
        for k in range(3):
            roots[three, k] = m * np.cos((phi + 2.0 * np.pi * k) / 3.0) - c2[three] / 3.0
    return roots


def compressibility_and_fugacity(P, T, eos):
    """Gas-like (largest real) PR root: returns (Z, f_g) with f_g in Pa."""
    P = np.atleast_1d(np.asarray(P, dtype=float))
    T = np.atleast_1d(np.asarray(T, dtype=float)) * np.ones_like(P)
    if np.any(P <= 0.0) or np.any(T <= 0.0):
        raise EosError("equation of state needs P > 0 and T > 0")

    kappa = 0.37464 + 1.54226 * eos.omega - 0.26992 * eos.omega**2
    Tr = T / eos.T_c
    alpha = (1.0 + kappa * (1.0 - np.sqrt(Tr))) ** 2
    a = 0.45724 * (R_UNIVERSAL * eos.T_c) ** 2 / eos.P_c * alpha
    b = 0.07780 * R_UNIVERSAL * eos.T_c / eos.P_c
    A = a * P / (R_UNIVERSAL * T) ** 2
    B = b * P / (R_UNIVERSAL * T)

    c2 = -(1.0 - B)
    c1 = A - 3.0 * B * B - 2.0 * B
    c0 = -(A * B - B * B - B**3)
    roots = _cubic_real_roots(c2, c1, c0)
    # gas root: largest real root above the covolume
    roots = np.where(np.isnan(roots) | (roots <= B[..., None]), -np.inf, roots)
    Z = roots.max(axis=-1)
    if np.any(~np.isfinite(Z)):
        i = int(np.argmax(~np.isfinite(Z)))
        raise EosError(f"no physical compressibility root at P={P[i]:.6g} Pa, T={T[i]:.6g} K")

    ln_phi = (Z - 1.0 - np.log(Z - B)
              - A / (2.0 * SQRT2 * B)
              * np.log((Z + (1.0 + SQRT2) * B) / (Z + (1.0 - SQRT2) * B)))
    f = np.exp(ln_phi) * P
    return Z, f


def peng_robinson_fugacity(P, T, eos):
    """Methane gas fugacity [Pa]; tends to P in the ideal-gas limit."""
    _, f = compressibility_and_fugacity(P, T, eos)
    return f


def peng_robinson_z(P, T, eos):
    Z, _ = compressibility_and_fugacity(P, T, eos)
    return Z
