"""Nuclear spin ensemble: magnetization, susceptibility, back-action, spin noise.

Everything here is a pure function of frozen dataclasses. Frequencies are
angular (rad/s) and power spectral densities are one-sided per unit angular
frequency, so a resistor at temperature T contributes ``2 R kB T / pi``.

Linewidth convention: a fractional inhomogeneous broadening ``b`` (e.g. 1e-6
for 1 ppm) is the Lorentzian FWHM ``gamma B0 b`` in angular frequency, so it
adds ``gamma B0 b / 2`` to the transverse relaxation rate.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS

__all__ = [
    "PolarizationWarning",
    "SpinEnsemble",
    "EnsembleState",
    "SpinImpedance",
    "magnetization",
    "polarization",
    "mean_spin_projection",
    "radiation_damping_rate",
    "effective_relaxation_rate",
    "loaded_state",
    "susceptibility",
    "spin_impedance",
    "spin_noise_psd",
    "spin_noise_psd_classical",
    "sql_voltage_estimate",
    "sample_spin_count",
]

# small-polarization (Curie-law) validity guard
POLARIZATION_WARN_LEVEL = 0.1


class PolarizationWarning(UserWarning):
    """Curie-law magnetization used outside the small-polarization regime."""


def _is_half_integer_multiple(x):
    return x > 0 and abs(2 * x - round(2 * x)) < 1e-12


@dataclass(frozen=True)
class SpinEnsemble:
    """Nuclear spin sample.

    Parameters
    ----------
    gamma : float
        Gyromagnetic ratio, rad/(s T).
    spin_i : float
        Nuclear spin quantum number (1/2, 1, 3/2, ...).
    density : float
        Spin number density, 1/m^3.
    theta_s : float
        Spin temperature, K. Must be positive.
    t2_intrinsic : float
        Intrinsic coherence time T2', s. ``math.inf`` is allowed when the
        linewidth is entirely set by ``inhomogeneous_broadening``.
    inhomogeneous_broadening : float
        Fractional FWHM linewidth (1e-6 = 1 ppm).
    filling_factor : float
        Fraction of the coil volume occupied by the sample, in (0, 1].
    full_polarization : bool
        Use the saturated magnetization ``n gamma hbar I`` instead of the
        Curie law. The spin-noise PSD is then evaluated in the
        zero-temperature limit (coth -> 1).
    """

    gamma: float
    spin_i: float
    density: float
    theta_s: float
    t2_intrinsic: float
    inhomogeneous_broadening: float = 0.0
    filling_factor: float = 1.0
    full_polarization: bool = False

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not _is_half_integer_multiple(self.spin_i):
            raise ValueError(f"spin_i must be a positive half-integer, got {self.spin_i}")
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.theta_s > 0:
            # negative spin temperatures are deliberately unsupported
            raise ValueError(f"theta_s must be positive, got {self.theta_s}")
        if not self.t2_intrinsic > 0:
            raise ValueError("t2_intrinsic must be positive")
        if not self.inhomogeneous_broadening >= 0:
            raise ValueError("inhomogeneous_broadening must be non-negative")
        if not 0 < self.filling_factor <= 1:
            raise ValueError("filling_factor must lie in (0, 1]")


@dataclass(frozen=True)
class EnsembleState:
    """Spin ensemble evaluated in a bias field and coupled to a pickup circuit."""

    gamma: float
    m0: float  # A/m
    omega0: float  # rad/s
    t2_eff: float  # s, intrinsic + inhomogeneous
    t2_star: float  # s, including suppressed back-action
    t_radiation: float  # s, unsuppressed radiation-damping time
    chi0: float
    suppression: float
    theta_s: float
    full_polarization: bool = False

    @property
    def linewidth(self):
        """Lorentzian FWHM in rad/s."""
        return 2.0 / self.t2_star


@dataclass(frozen=True)
class SpinImpedance:
    ls: np.ndarray  # H
    rs: np.ndarray  # Ohm
    omega: np.ndarray  # rad/s

    @property
    def z(self):
        return self.rs + 1j * self.omega * self.ls


def polarization(ens, b0):
    """Small-polarization spin-1/2 estimate ``hbar gamma B0 / (2 kB theta_s)``."""
    return CONSTANTS.hbar * ens.gamma * b0 / (2 * CONSTANTS.kB * ens.theta_s)


def mean_spin_projection(ens, b0):
    """Mean longitudinal spin projection per spin, ``M0 / (n gamma hbar)``.

    Bounded by ``I``; for I = 1/2 this is half of :func:`polarization`.
    """
    return magnetization(ens, b0) / (ens.density * ens.gamma * CONSTANTS.hbar)


def magnetization(ens, b0):
    """Equilibrium magnetization M0 in A/m.

    Uses the Curie law ``n hbar^2 gamma^2 I(I+1) B0 / (3 kB theta_s)`` and
    warns with :class:`PolarizationWarning` when the polarization estimate
    exceeds 0.1. With ``ens.full_polarization`` the saturated value
    ``n gamma hbar I`` is returned instead.
    """
    if not b0 > 0:
        raise ValueError(f"B0 must be positive, got {b0}")
    hbar, kB = CONSTANTS.hbar, CONSTANTS.kB
    if ens.full_polarization:
        return ens.density * ens.gamma * hbar * ens.spin_i
    if polarization(ens, b0) > POLARIZATION_WARN_LEVEL:
        warnings.warn(
            "Curie-law magnetization used at polarization "
            f"{polarization(ens, b0):.3g} > {POLARIZATION_WARN_LEVEL}",
            PolarizationWarning,
            stacklevel=2,
        )
    i = ens.spin_i
    return ens.density * hbar**2 * ens.gamma**2 * i * (i + 1) * b0 / (3 * kB * ens.theta_s)


def radiation_damping_rate(ens, qc, m0):
    """Circuit back-action (radiation damping) rate ``q Qc gamma mu0 M0 / 2`` in 1/s."""
    if not qc > 0:
        raise ValueError("Qc must be positive")
    return 0.5 * ens.filling_factor * qc * ens.gamma * CONSTANTS.mu0 * m0


def effective_relaxation_rate(ens, b0):
    """Transverse rate without back-action: ``1/T2' + gamma B0 b / 2``."""
    return 1.0 / ens.t2_intrinsic + ens.gamma * b0 * ens.inhomogeneous_broadening / 2.0


def loaded_state(ens, b0, qc, suppression=1.0):
    """Evaluate the ensemble in field ``b0`` coupled to a circuit of quality ``qc``.

    ``suppression`` scales the back-action rate: 1 is the bare circuit,
    0 is perfect feedback cancellation of the induced current.
    """
    if not 0.0 <= suppression <= 1.0:
        raise ValueError(f"suppression must lie in [0, 1], got {suppression}")
    m0 = magnetization(ens, b0)
    rate_r = radiation_damping_rate(ens, qc, m0)
    rate_eff = effective_relaxation_rate(ens, b0)
    rate_star = rate_eff + suppression * rate_r
    return EnsembleState(
        gamma=ens.gamma,
        m0=m0,
        omega0=ens.gamma * b0,
        t2_eff=1.0 / rate_eff,
        t2_star=1.0 / rate_star,
        t_radiation=math.inf if rate_r == 0 else 1.0 / rate_r,
        chi0=CONSTANTS.mu0 * m0 / b0,
        suppression=suppression,
        theta_s=ens.theta_s,
        full_polarization=ens.full_polarization,
    )


def _lorentzian_parts(state, omega):
    x = (state.omega0 - np.asarray(omega, dtype=float)) * state.t2_star
    denom = 1.0 + x * x
    return x / denom, 1.0 / denom


def susceptibility(state, omega):
    """Complex susceptibility ``chi' - i chi''`` at angular frequency ``omega``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    disp, absn = _lorentzian_parts(state, omega)
    peak = 0.5 * state.gamma * CONSTANTS.mu0 * state.m0 * state.t2_star
    return peak * disp - 1j * peak * absn


def spin_impedance(state, coil_l, q, omega):
    """Spin inductance and resistance added to a coil of inductance ``coil_l``.

    The coil impedance becomes ``(Rc + Rs) + i omega (Lc + Ls)`` with
    ``Ls = q Lc chi'`` and ``Rs = q omega Lc chi''``.
    """
    if not coil_l > 0:
        raise ValueError("coil inductance must be positive")
    omega = np.asarray(omega, dtype=float)
    chi = susceptibility(state, omega)
    ls = q * coil_l * chi.real
    rs = -q * omega * coil_l * chi.imag
    return SpinImpedance(ls=ls, rs=rs, omega=omega)


def _thermal_energy(omega, theta, zero_temperature=False):
    """``(hbar w / 2) coth(hbar w / 2 kB theta)``, the mean energy per mode."""
    half = 0.5 * CONSTANTS.hbar * np.asarray(omega, dtype=float)
    if zero_temperature:
        return half
    x = half / (CONSTANTS.kB * theta)
    # x coth x -> 1 as x -> 0; tanh handles both limits without overflow
    return half / np.tanh(x)


def spin_noise_psd(state, ens, coil_l, omega):
    """Spin-projection noise voltage PSD at the coil, V^2 s/rad.

    Fluctuation-dissipation form ``(2 Rs / pi)(hbar w / 2) coth(hbar w / 2 kB theta_s)``.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("omega must be positive")
    rs = spin_impedance(state, coil_l, ens.filling_factor, omega).rs
    energy = _thermal_energy(omega, ens.theta_s, zero_temperature=state.full_polarization)
    return 2.0 * rs / math.pi * energy


def spin_noise_psd_classical(state, ens, coil_l, omega):
    """Closed-form classical limit of :func:`spin_noise_psd` (Curie-law M0).

    ``(q/pi) (I(I+1)/3) mu0 hbar^2 gamma^2 n omega omega0 Lc T2* L(omega)`` where
    ``L`` is the unit-height Lorentzian. For I = 1/2 the prefactor is ``q/(4 pi)``.
    Independent of ``theta_s`` at fixed T2*.
    """
    omega = np.asarray(omega, dtype=float)
    _, absn = _lorentzian_parts(state, omega)
    i = ens.spin_i
    pref = ens.filling_factor / math.pi * i * (i + 1) / 3.0
    return (
        pref
        * CONSTANTS.mu0
        * CONSTANTS.hbar**2
        * ens.gamma**2
        * ens.density
        * omega
        * state.omega0
        * coil_l
        * state.t2_star
        * absn
    )


def sample_spin_count(ens, area, length):
    """Number of spins ``N = n q A l`` in the sample volume."""
    return ens.density * ens.filling_factor * area * length


def sql_voltage_estimate(ens, state, turns, area, length, n_spins=None):
    """On-resonance spin-noise amplitude spectral density from the standard quantum limit.

    ``q w0 eta A mu0 (hbar gamma / V) sqrt(N) sqrt(T2*)`` with sample volume
    ``V = q A l``. Order-of-magnitude estimate, units V sqrt(s/rad).
    """
    volume = ens.filling_factor * area * length
    if n_spins is None:
        n_spins = ens.density * volume
    alpha0 = ens.filling_factor * state.omega0 * turns * area
    return (
        alpha0
        * CONSTANTS.mu0
        * (CONSTANTS.hbar * ens.gamma / volume)
        * math.sqrt(n_spins)
        * math.sqrt(state.t2_star)
    )
