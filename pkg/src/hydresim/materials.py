"""Material parameter containers and the property laws they select.

Phase density/viscosity/conductivity laws follow the reservoir-model forms
used throughout the presets (constant, exponential compressibility, ideal/real
gas, Sutherland-type gas viscosity, Arrhenius-type water viscosity). All SI.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

R_UNIVERSAL = 8.314462618  # J/(mol K)


# ----------------------------------------------------------------------
# fluid property laws
class ConstantDensity:
    kind = "constant"

    def __init__(self, rho0):
        self.rho0 = float(rho0)

    def __call__(self, P, T, z=None):
        return np.full_like(np.asarray(P, dtype=float), self.rho0)


class CompressibleDensity:
    """rho = rho0 * exp((P - P_ref)/B); linearizes to the bulk-modulus law."""

    kind = "compressible"

    def __init__(self, rho0, bulk_modulus, P_ref):
        self.rho0 = float(rho0)
        self.B = float(bulk_modulus)
        self.P_ref = float(P_ref)

    def __call__(self, P, T, z=None):
        return self.rho0 * np.exp((np.asarray(P, dtype=float) - self.P_ref) / self.B)


class GasDensity:
    """rho = P M / (z R T); z supplied by the cubic EOS or fixed to 1."""

    kind = "gas"

    def __init__(self, M, use_z=True):
        self.M = float(M)
        self.use_z = bool(use_z)

    def __call__(self, P, T, z=None):
        zf = z if (self.use_z and z is not None) else 1.0
        return np.asarray(P, dtype=float) * self.M / (zf * R_UNIVERSAL * np.asarray(T, dtype=float))


class ConstantViscosity:
    def __init__(self, mu):
        self.mu = float(mu)

    def __call__(self, T):
        return np.full_like(np.asarray(T, dtype=float), self.mu)


class MethaneViscosity:
    """Sutherland-type correlation, mu in Pa s, T in K."""

    def __call__(self, T):
        T = np.asarray(T, dtype=float)
        return 10.4e-6 * ((273.15 + 162.0) / (T + 162.0)) * (T / 273.15) ** 1.5


class WaterViscosity:
    """Exponential correlation anchored at 1.792 mPa s at 273.15 K."""

    def __call__(self, T):
        r = 273.15 / np.asarray(T, dtype=float)
        return 0.001792 * np.exp(-1.94 - 4.80 * r + 6.74 * r * r)


class ConstantConductivity:
    def __init__(self, k):
        self.k = float(k)

    def __call__(self, T):
        return np.full_like(np.asarray(T, dtype=float), self.k)


class GasConductivity:
    """Cubic polynomial in T for methane, W/(m K)."""

    def __call__(self, T):
        T = np.asarray(T, dtype=float)
        return -0.886e-2 + 0.242e-3 * T - 0.699e-6 * T**2 + 0.122e-8 * T**3


class WaterConductivity:
    """0.3834 ln T - 1.581, W/(m K)."""

    def __call__(self, T):
        return 0.3834 * np.log(np.asarray(T, dtype=float)) - 1.581


class ConstantSolidDensity:
    kind = "constant"

    def __init__(self, rho0):
        self.rho0 = float(rho0)

    def __call__(self, dP_eff=0.0, phi=0.0, phi_eff=0.0, eps_v=0.0,
                 alpha=0.0, B_m=0.0, B_sh=1.0):
        base = np.asarray(dP_eff, dtype=float)
        return np.full_like(base, self.rho0) if base.shape else self.rho0


class PoroelasticSolidDensity:
    """Grain-rearrangement density response to pore pressure and strain.

    rho = rho0 [1 + ((alpha-phi)/(1-phi)) dP_eff/B_sh
                  - (B_m/B_sh) eps_v/(1-phi_eff)]
    """

    kind = "poroelastic"

    def __init__(self, rho0):
        self.rho0 = float(rho0)

    def __call__(self, dP_eff=0.0, phi=0.0, phi_eff=0.0, eps_v=0.0,
                 alpha=0.0, B_m=0.0, B_sh=1.0):
        term_p = (alpha - phi) / (1.0 - phi) * dP_eff / B_sh
        term_e = (B_m / B_sh) * eps_v / (1.0 - phi_eff)
        return self.rho0 * (1.0 + term_p - term_e)


# ----------------------------------------------------------------------
@dataclass
class FluidPhase:
    name: str
    M: float                      # kg/mol
    density: object = None
    viscosity: object = None
    conductivity: object = None
    Cp: float = 0.0               # J/(kg K)
    Cv: float = 0.0
    B: float = 1e9                # Pa, bulk modulus for storage algebra

    @property
    def R_specific(self):
        return R_UNIVERSAL / self.M


@dataclass
class SolidPhase:
    name: str
    density: object = None
    Cv: float = 0.0
    conductivity: object = None
    M: float = 0.0                # hydrate only
    rho0: float = 0.0


@dataclass
class SoilHydraulics:
    K_0: float = 1e-13            # m2 reference intrinsic permeability
    phi_0: float = 0.3            # reference porosity
    P_entry: float = 5e3          # Pa
    lambda_bc: float = 1.5
    S_wr: float = 0.0
    S_gr: float = 0.0
    m_exp: float = 3.0            # pore-geometry exponent in the S_h scalings
    a_exp: float = 1.0            # porosity-scaling exponent
    n_tau: float = 1.0            # tortuosity exponent, 1 <= n <= 3
    pc_mode: str = "brooks_corey"     # or "zero"
    kr_mode: str = "burdine"          # or "constant"
    kr_w_const: float = 0.5
    kr_g_const: float = 0.5
    perm_mode: str = "scaled"         # or "constant"
    pc_cap_factor: float = 50.0       # P_c capped at factor * P_entry
    K_floor: float = 1e-22            # m2
    sat_eps: float = 1e-6             # clamp for effective saturations

    def validate(self):
        if not (1.0 <= self.n_tau <= 3.0):
            raise ConfigError(f"tortuosity exponent must lie in [1, 3], got {self.n_tau}")
        if self.K_0 <= 0 or self.phi_0 <= 0 or self.phi_0 >= 1:
            raise ConfigError("soil K_0 must be > 0 and phi_0 in (0, 1)")


@dataclass
class KineticParams:
    mode: str = "full"            # "full" | "simplified" | "off"
    k_d0: float = 3.6e4           # mol/(m2 Pa s), pre-exponential
    Ea_over_R: float = 9400.0     # K
    N_h: float = 5.75
    # stability curve P_e = A1 exp(A2 - A3/T); optional subcooled branch
    A1: float = 1e3               # Pa
    A2: float = 38.980
    A3: float = 8533.80           # K
    A2_cold: float = None
    A3_cold: float = None
    T_branch: float = 273.15
    Pe_mode: str = "curve"        # "curve" | "constant"
    Pe_const: float = 0.0
    # heat of phase change
    B1: float = 56599.0           # J/mol
    B2: float = 16.744            # J K/mol (divided by T)
    heat_form: str = "per_mol"    # "per_mol" | "per_kg_gas"
    heat_c0: float = 3527000.0    # J/kg of CH4 released (alternative form)
    heat_c1: float = -1050.0
    # reaction-area rule
    gamma_rule: str = "one"       # "one" | "phi_sh" | "constant"
    gamma_const: float = 1.0
    A_s0: float = 1e5             # 1/m, simplified-mode specific surface
    fugacity_mode: str = "peng_robinson"  # "peng_robinson" | "pressure"
    consistent_hydrate_mass: bool = False

    def M_hyd(self, M_g, M_w):
        if self.consistent_hydrate_mass:
            return M_g + self.N_h * M_w
        return None  # caller falls back to the hydrate phase molar mass


@dataclass
class MechParams:
    E_s0: float = 0.3e9           # Pa, hydrate-free sand stiffness
    E_h: float = 1.35e9           # Pa
    nu: float = 0.2
    b: float = 0.0                # confining-stress exponent
    c: float = 1.0                # hydrate pore-habit factor
    d: float = 1.0                # hydrate-saturation exponent
    sigma_c0: float = 1e3         # Pa, reference confining stress
    alpha_biot: float = 0.8
    B_sh: float = 1e10            # Pa, composite-matrix bulk modulus

    def validate(self):
        if not (0.0 < self.nu < 0.5):
            raise ConfigError(f"Poisson ratio must lie in (0, 0.5), got {self.nu}")
        if not (0.0 <= self.alpha_biot <= 1.0):
            raise ConfigError(f"Biot coefficient must lie in [0, 1], got {self.alpha_biot}")
        if self.E_s0 <= 0 or self.E_h < 0 or self.B_sh <= 0:
            raise ConfigError("elastic moduli must be positive")


@dataclass
class VleParams:
    mode: str = "full"            # "full" | "immiscible"
    # van't Hoff Henry's law in mole-fraction-per-Pa form
    H_ref: float = 2.5274e-10     # 1/Pa at T_ref (1.4e-5 mol/(m3 Pa) / 55392 mol/m3)
    C_H: float = 1600.0           # K
    T_ref: float = 298.15         # K
    # Antoine constants, log10(P[mmHg]) = A - B/(C + T[degC])
    antoine_A: float = 8.07131
    antoine_B: float = 1730.63
    antoine_C: float = 233.426
    T_min: float = 250.0          # declared validity range, clamped outside
    T_max: float = 450.0


@dataclass
class DiffusionParams:
    enabled: bool = True
    # gas phase: D = D_ref (P_ref/P) (T/T_ref)^exponent
    D_g_ref: float = 2.6e-5       # m2/s at (P_ref, T_ref)
    P_ref: float = 101325.0
    T_ref: float = 298.15
    exponent: float = 1.823
    # aqueous phase Wilke-Chang correlation
    wc_psi: float = 2.6
    wc_M_solvent: float = 18.015  # g/mol
    wc_V_A: float = 29.6          # cm3/mol, solute molar volume at boiling


@dataclass
class EosParams:
    T_c: float = 190.56           # K
    P_c: float = 4.599e6          # Pa
    omega: float = 0.011


@dataclass
class MaterialParameters:
    gas: FluidPhase = None
    water: FluidPhase = None
    hydrate: SolidPhase = None
    soil: SolidPhase = None
    hydraulics: SoilHydraulics = field(default_factory=SoilHydraulics)
    kinetics: KineticParams = field(default_factory=KineticParams)
    mechanics: MechParams = field(default_factory=MechParams)
    vle: VleParams = field(default_factory=VleParams)
    diffusion: DiffusionParams = field(default_factory=DiffusionParams)
    eos: EosParams = field(default_factory=EosParams)
    T_ref_energy: float = 273.15  # K, zero point of h and u integrals
    rho_gas_std: float = 0.717    # kg/m3 at standard conditions (production volumes)

    def __post_init__(self):
        if self.gas is None:
            self.gas = FluidPhase(
                name="gas", M=0.016, density=GasDensity(0.016),
                viscosity=MethaneViscosity(), conductivity=GasConductivity(),
                Cp=2180.0, Cv=1660.0, B=1.013e8,
            )
        if self.water is None:
            self.water = FluidPhase(
                name="water", M=0.018, density=ConstantDensity(1000.0),
                viscosity=WaterViscosity(), conductivity=WaterConductivity(),
                Cp=4186.0, Cv=4186.0, B=2.933e9,
            )
        if self.hydrate is None:
            self.hydrate = SolidPhase(
                name="hydrate", density=ConstantSolidDensity(900.0),
                Cv=2700.0, conductivity=ConstantConductivity(2.1),
                M=0.119, rho0=900.0,
            )
        if self.soil is None:
            self.soil = SolidPhase(
                name="soil", density=ConstantSolidDensity(2100.0),
                Cv=800.0, conductivity=ConstantConductivity(1.9),
                rho0=2100.0,
            )

    def validate(self):
        self.hydraulics.validate()
        self.mechanics.validate()
        for ph in (self.gas, self.water):
            if ph.M <= 0 or ph.B <= 0:
                raise ConfigError(f"{ph.name}: molar mass and bulk modulus must be > 0")

    @property
    def M_hyd(self):
        m = self.kinetics.M_hyd(self.gas.M, self.water.M)
        return m if m is not None else self.hydrate.M
