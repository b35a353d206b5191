"""Physical constants (CODATA 2022 via :mod:`scipy.constants`, scipy >= 1.15).

All quantities are SI. The module-level :data:`CONSTANTS` instance is the
single source used throughout the package; it is frozen on purpose.
"""

from dataclasses import dataclass

import scipy.constants as _sc

__all__ = [
    "Constants",
    "CONSTANTS",
    "PROTON_GAMMA",
    "PB207_GAMMA",
    "EV",
    "GEV",
    "HBAR_C_GEV_CM",
]


@dataclass(frozen=True)
class Constants:
    mu0: float  # T m / A
    hbar: float  # J s
    kB: float  # J / K
    protonGamma: float  # rad / (s T)
    c: float  # m / s
    h: float  # J s
    e: float  # C

    def __post_init__(self):
        for name in ("mu0", "hbar", "kB", "protonGamma", "c", "h", "e"):
            if not getattr(self, name) > 0:
                raise ValueError(f"constant {name} must be strictly positive")

    def as_dict(self):
        return {
            "mu0": self.mu0,
            "hbar": self.hbar,
            "kB": self.kB,
            "protonGamma": self.protonGamma,
            "c": self.c,
            "h": self.h,
            "e": self.e,
        }


CONSTANTS = Constants(
    mu0=_sc.mu_0,
    hbar=_sc.hbar,
    kB=_sc.k,
    protonGamma=_sc.physical_constants["proton gyromag. ratio"][0],
    c=_sc.c,
    h=_sc.h,
    e=_sc.e,
)

PROTON_GAMMA = CONSTANTS.protonGamma
# 207Pb, IUPAC 2001 recommended value (gamma / 2pi = 8.8816 MHz/T)
PB207_GAMMA = 5.58046e7

EV = _sc.electron_volt  # J
GEV = 1e9 * EV  # J
# hbar c in GeV cm, used for natural-unit <-> SI conversion
HBAR_C_GEV_CM = CONSTANTS.hbar * CONSTANTS.c / GEV * 100.0
