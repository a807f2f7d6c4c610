"""Unit registry: config files carry annotated values, everything is SI internally.

Fixed conversions: 1 mD = 9.869233e-16 m2, 1 darcy = 9.869233e-13 m2.
Temperatures convert through the kelvin offset, all other units are pure factors.
"""

from .errors import ConfigError

MILLIDARCY = 9.869233e-16  # m2

# factor-style units, grouped by dimension for validation
_FACTORS = {
    "pressure": {"Pa": 1.0, "kPa": 1e3, "MPa": 1e6, "GPa": 1e9, "bar": 1e5},
    "pressure_rate": {"Pa/s": 1.0, "kPa/s": 1e3, "MPa/s": 1e6},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "km": 1e3},
    "time": {"s": 1.0, "min": 60.0, "h": 3600.0, "hr": 3600.0, "day": 86400.0},
    "permeability": {"m2": 1.0, "mD": MILLIDARCY, "D": MILLIDARCY * 1e3, "um2": 1e-12},
    "fraction": {"-": 1.0, "frac": 1.0, "%": 0.01},
    "density": {"kg/m3": 1.0, "g/cm3": 1e3},
    "viscosity": {"Pa.s": 1.0, "mPa.s": 1e-3, "cP": 1e-3},
    "molar_mass": {"kg/mol": 1.0, "g/mol": 1e-3},
    "specific_area": {"1/m": 1.0, "m2/m3": 1.0},
    "rate_constant": {"mol/(m2.Pa.s)": 1.0},
    "conductivity": {"W/(m.K)": 1.0},
    "heat_capacity": {"J/(kg.K)": 1.0},
    "molar_energy": {"J/mol": 1.0, "kJ/mol": 1e3},
    "specific_energy": {"J/kg": 1.0, "kJ/kg": 1e3},
    "mass_rate": {"kg/s": 1.0, "kg/min": 1.0 / 60.0},
    "dimensionless": {"-": 1.0},
}

_TEMPERATURE_UNITS = ("K", "degC", "C")


def convert(value, unit, dimension):
    """Convert (value, unit) to SI for the given dimension name."""
    if dimension == "temperature":
        if unit in ("K", None, ""):
            return float(value)
        if unit in ("degC", "C"):
            return float(value) + 273.15
        raise ConfigError(f"unknown temperature unit '{unit}'")
    table = _FACTORS.get(dimension)
    if table is None:
        raise ConfigError(f"unknown dimension '{dimension}'")
    if unit in (None, ""):
        return float(value)  # bare numbers are taken as SI
    if unit not in table:
        raise ConfigError(
            f"unit '{unit}' not valid for {dimension} "
            f"(expected one of {sorted(table)})"
        )
    return float(value) * table[unit]


def known_unit(unit):
    if unit in _TEMPERATURE_UNITS:
        return True
    return any(unit in table for table in _FACTORS.values())
