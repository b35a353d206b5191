"""Spin-projection-noise-limited coupling sensitivity to axion-like dark matter.

For each axion mass the bias field is set so the Larmor frequency equals the
Compton frequency ``w_a = m_a c^2 / hbar``. The smallest detectable
transverse-magnetization voltage follows from comparing the on-resonance
signal ``V1 = |alpha0| mu0 M0 Omega1 T2*`` with the spin-noise PSD after
averaging, and Omega1 is converted to a coupling constant.

Unit conventions
----------------
* Axion field amplitude ``a0 = sqrt(2 rho_DM) / m_a`` in GeV (natural units,
  ``hbar = c = 1``); ``rho_DM`` is converted from kg/m^3 via ``(hbar c)^3``.
* Gradient amplitude ``|grad a| = m_a v a0`` in GeV^2 with ``v`` in units of c.
* EDM coupling ``g_d`` in GeV^-2: the induced dipole ``g_d a0`` (GeV^-1) is
  a length through ``hbar c``, i.e. ``d = g_d a0 (hbar c)`` in e cm, and the
  interaction energy is ``d E*``.
* Gradient coupling ``g_aNN`` in GeV^-1, interaction energy ``g_aNN |grad a|``.
* Rabi frequency ``Omega1 = rabi_factor * energy / hbar``; the default
  ``rabi_factor = 1/2`` accounts for the rotating-wave decomposition of a
  linearly oscillating drive.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .circuit import solenoid_inductance
from .constants import CONSTANTS, EV, GEV, HBAR_C_GEV_CM
from .spins import (
    SpinEnsemble,
    effective_relaxation_rate,
    loaded_state,
    magnetization,
    radiation_damping_rate,
    spin_noise_psd,
)

__all__ = [
    "Coupling",
    "AxionSearchConfig",
    "SensitivityCurve",
    "RHO_DM_DEFAULT",
    "gev_per_cm3_to_kg_per_m3",
    "compton_angular_frequency",
    "axion_field_amplitude",
    "axion_coherence_time",
    "minimum_rabi",
    "coupling_from_rabi",
    "sensitivity_curve",
    "edm_limit",
    "gradient_limit",
    "suppression_sweep",
]


class Coupling(str, enum.Enum):
    EDM = "edm"
    GRADIENT = "gradient"


def gev_per_cm3_to_kg_per_m3(rho):
    return rho * GEV / CONSTANTS.c**2 * 1e6


RHO_DM_DEFAULT = gev_per_cm3_to_kg_per_m3(0.4)
VIRIAL_VELOCITY = 1e-3  # in units of c


@dataclass(frozen=True)
class AxionSearchConfig:
    coupling: Coupling
    mass_grid: np.ndarray  # eV / c^2
    sample: SpinEnsemble
    radius: float  # m; cylinder of height 2 r fills the coil
    qc: float = 1e3
    suppression: float = 1.0
    tau_m: float = 1800.0  # s
    rho_dm: float = RHO_DM_DEFAULT  # kg / m^3
    axion_quality: float = 1e6
    e_star: float = math.nan  # V / m, EDM only
    velocity: float = VIRIAL_VELOCITY
    b0_max: float = 20.0  # T
    turns: int = 1
    rabi_factor: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        grid = np.asarray(self.mass_grid, dtype=float)
        object.__setattr__(self, "mass_grid", grid)
        if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0):
            raise ValueError("mass_grid must be a non-empty 1-D array of positive masses")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("mass_grid must be strictly increasing")
        if not self.tau_m > 0:
            raise ValueError("tau_m must be positive")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if not 0 <= self.suppression <= 1:
            raise ValueError("suppression must lie in [0, 1]")
        if not (self.qc > 0 and self.rho_dm > 0 and self.axion_quality > 0 and self.velocity > 0):
            raise ValueError("qc, rho_dm, axion_quality and velocity must be positive")
        if self.coupling is Coupling.EDM and not self.e_star > 0:
            raise ValueError("EDM coupling requires a positive effective electric field e_star")

    @property
    def coil_area(self):
        return math.pi * self.radius**2

    @property
    def coil_length(self):
        return 2.0 * self.radius

    @property
    def coil_inductance(self):
        return solenoid_inductance(self.turns, self.coil_area, self.coil_length)

    def metadata(self):
        d = asdict(self)
        d["coupling"] = self.coupling.value
        d["mass_grid"] = self.mass_grid.tolist()
        return d


@dataclass(frozen=True)
class SensitivityCurve:
    mass: np.ndarray  # eV
    frequency: np.ndarray  # Hz
    coupling_limit: np.ndarray  # GeV^-2 (EDM) or GeV^-1 (gradient); NaN where unreachable
    t2_star: np.ndarray  # s
    back_action_limited: np.ndarray  # bool
    reachable: np.ndarray  # bool, B0 <= b0_max
    required_suppression: np.ndarray  # suppression at which back-action equals the intrinsic rate
    coherent: np.ndarray  # bool, tau_m < tau_a branch used
    coupling: Coupling
    suppression: float
    metadata: dict = field(default_factory=dict)

    @property
    def units(self):
        return "GeV^-2" if self.coupling is Coupling.EDM else "GeV^-1"

    @property
    def required_suppression_min(self):
        """Most stringent suppression over the reachable grid.

        Below this value the circuit back-action does not limit the coherence
        time at any mass point.
        """
        return float(np.min(self.required_suppression[self.reachable]))


def compton_angular_frequency(mass_ev):
    return np.asarray(mass_ev, dtype=float) * EV / CONSTANTS.hbar


def _rho_natural(rho_dm):
    """kg/m^3 -> GeV^4."""
    energy_density_gev_cm3 = rho_dm * CONSTANTS.c**2 / GEV * 1e-6
    return energy_density_gev_cm3 * HBAR_C_GEV_CM**3


def axion_field_amplitude(mass_ev, rho_dm=RHO_DM_DEFAULT, velocity=VIRIAL_VELOCITY):
    """Field amplitude ``a0`` (GeV) and gradient amplitude ``m v a0`` (GeV^2)."""
    m_gev = np.asarray(mass_ev, dtype=float) * 1e-9
    if np.any(m_gev <= 0):
        raise ValueError("axion mass must be positive")
    a0 = np.sqrt(2.0 * _rho_natural(rho_dm)) / m_gev
    return a0, m_gev * velocity * a0


def axion_coherence_time(mass_ev, quality=1e6):
    """``tau_a = quality * 2 pi / w_a``."""
    return quality * 2 * math.pi / compton_angular_frequency(mass_ev)


def minimum_rabi(ens, state, coil_l, turns, area, tau_m, tau_a):
    """Smallest detectable Rabi frequency on resonance, rad/s.

    ``V1^2 = S(w0) / sqrt(tau_m tau_a)`` for ``tau_m >= tau_a`` and
    ``V1^2 = S(w0) / tau_m`` otherwise (coherent averaging), with ``S`` the
    spin-noise PSD at the coil and ``V1 = q w0 eta A mu0 M0 Omega1 T2*``.
    """
    if not state.m0 > 0:
        raise ValueError("zero magnetization: no signal transduction")
    noise = float(spin_noise_psd(state, ens, coil_l, state.omega0))
    t_avg = math.sqrt(tau_m * tau_a) if tau_m >= tau_a else tau_m
    v1 = math.sqrt(noise / t_avg)
    alpha0 = ens.filling_factor * state.omega0 * turns * area
    return v1 / (alpha0 * CONSTANTS.mu0 * state.m0 * state.t2_star)


def coupling_from_rabi(omega1, cfg, mass_ev):
    """Convert a Rabi frequency to the coupling constant of ``cfg.coupling``."""
    energy = CONSTANTS.hbar * np.asarray(omega1) / cfg.rabi_factor  # J
    a0, grad = axion_field_amplitude(mass_ev, cfg.rho_dm, cfg.velocity)
    if cfg.coupling is Coupling.EDM:
        e_star_v_per_cm = cfg.e_star / 100.0
        return energy / (CONSTANTS.e * e_star_v_per_cm * a0 * HBAR_C_GEV_CM)
    return energy / (grad * GEV)


def _point(cfg, mass, lc):
    omega_a = float(compton_angular_frequency(mass))
    ens = cfg.sample
    b0 = omega_a / ens.gamma
    rate_eff = effective_relaxation_rate(ens, b0)
    rate_r = radiation_damping_rate(ens, cfg.qc, magnetization(ens, b0))
    required = rate_eff / rate_r
    limited = cfg.suppression * rate_r > rate_eff
    if b0 > cfg.b0_max:
        return math.nan, math.nan, limited, False, required, False
    state = loaded_state(ens, b0, cfg.qc, cfg.suppression)
    tau_a = float(axion_coherence_time(mass, cfg.axion_quality))
    om1 = minimum_rabi(ens, state, lc, cfg.turns, cfg.coil_area, cfg.tau_m, tau_a)
    g = float(coupling_from_rabi(om1, cfg, mass))
    return g, state.t2_star, limited, True, required, cfg.tau_m < tau_a


def sensitivity_curve(cfg, threads=1):
    """Coupling limit at every mass of ``cfg.mass_grid``.

    ``threads > 1`` evaluates mass points in a thread pool; output order is
    always the grid order.
    """
    lc = cfg.coil_inductance
    masses = cfg.mass_grid
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda m: _point(cfg, m, lc), masses))
    else:
        rows = [_point(cfg, m, lc) for m in masses]
    g, t2, lim, reach, req, coh = (np.array(c) for c in zip(*rows))
    meta = {
        "config": cfg.metadata(),
        "coil_inductance_H": lc,
        "constants": CONSTANTS.as_dict(),
        "units": {"mass": "eV", "frequency": "Hz", "coupling_limit": "GeV^-2" if cfg.coupling is Coupling.EDM else "GeV^-1"},
    }
    return SensitivityCurve(
        mass=masses,
        frequency=masses * EV / CONSTANTS.h,
        coupling_limit=g.astype(float),
        t2_star=t2.astype(float),
        back_action_limited=lim.astype(bool),
        reachable=reach.astype(bool),
        required_suppression=req.astype(float),
        coherent=coh.astype(bool),
        coupling=cfg.coupling,
        suppression=cfg.suppression,
        metadata=meta,
    )


def edm_limit(cfg, threads=1):
    """EDM-coupling (``g_d``) limit curve."""
    if cfg.coupling is not Coupling.EDM:
        raise ValueError("edm_limit requires coupling = EDM")
    return sensitivity_curve(cfg, threads)


def gradient_limit(cfg, threads=1):
    """Gradient-coupling (``g_aNN``) limit curve."""
    if cfg.coupling is not Coupling.GRADIENT:
        raise ValueError("gradient_limit requires coupling = GRADIENT")
    return sensitivity_curve(cfg, threads)


def suppression_sweep(cfg, suppressions, threads=1):
    """One curve per suppression value, in the given order."""
    return [sensitivity_curve(replace(cfg, suppression=float(s)), threads) for s in suppressions]
