"""Tuned-and-matched pickup probe.

Topology: the coil branch ``(Rc + Rs) + i w (Lc + Ls)`` sits in parallel with
the tuning capacitor C1 (node A to ground); the matching capacitor C2 runs
from node A to the amplifier node B, which is loaded by the amplifier input
resistance Ra. Noise sources in series with the coil (circuit Nyquist noise
and spin-projection noise) reach node B through ``h_coil``. The amplifier's
own voltage and current noise are uncorrelated white sources with
``Va^2 = 2 kB theta_a Ra / pi`` and ``Ia^2 = 2 kB theta_a / (pi Ra)``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import CONSTANTS

__all__ = [
    "MatchingError",
    "TuningError",
    "ProbeCircuit",
    "TransferSet",
    "solenoid_inductance",
    "tune",
    "l_match",
    "tuned_probe",
    "coil_impedance",
    "probe_impedance",
    "coil_transfer",
    "transfer_set",
    "amplifier_voltage_psd",
    "amplifier_current_psd",
    "amplifier_noise_psd",
    "circuit_noise_psd",
]


class MatchingError(ValueError):
    """The requested match is not realisable with this topology."""


class TuningError(RuntimeError):
    """The tuning root-finder did not converge."""

    def __init__(self, message, residuals):
        super().__init__(f"{message}; last residuals {residuals}")
        self.residuals = residuals


def solenoid_inductance(turns, area, length):
    """Empty solenoid inductance ``mu0 eta^2 A / l``."""
    return CONSTANTS.mu0 * turns**2 * area / length


@dataclass(frozen=True)
class ProbeCircuit:
    lc: float  # coil inductance, H
    rc: float  # coil resistance, Ohm
    c1: float  # tuning capacitance, F
    c2: float  # matching capacitance, F
    ra: float  # amplifier input resistance, Ohm
    theta_c: float = 300.0  # circuit temperature, K
    theta_a: float = 0.0  # amplifier noise temperature, K
    omega_c: float = math.nan  # tuning target, rad/s
    turns: int = 1
    area: float = math.nan  # coil cross-section, m^2
    length: float = math.nan  # m

    def __post_init__(self):
        for name in ("lc", "rc", "c1", "c2", "ra"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.theta_c < 0 or self.theta_a < 0:
            raise ValueError("noise temperatures must be non-negative")
        if int(self.turns) != self.turns or self.turns <= 0:
            raise ValueError("turns must be a positive integer")

    @property
    def qc(self):
        """Unloaded coil quality factor at the tuning frequency."""
        return self.omega_c * self.lc / self.rc

    def with_temperatures(self, theta_c=None, theta_a=None):
        return replace(
            self,
            theta_c=self.theta_c if theta_c is None else theta_c,
            theta_a=self.theta_a if theta_a is None else theta_a,
        )


@dataclass(frozen=True)
class TransferSet:
    omega: np.ndarray
    zp: np.ndarray  # probe impedance seen from the amplifier, Ohm
    h_coil: np.ndarray  # node-B voltage per unit series coil source
    h_amp_v: np.ndarray  # Ra / (Ra + Zp)
    h_amp_i: np.ndarray  # Ra Zp / (Ra + Zp), Ohm


def _zp(lc, rc, c1, c2, omega, zs=0.0):
    zc = rc + 1j * omega * lc + zs
    zt = 1.0 / (1.0 / zc + 1j * omega * c1)
    return 1.0 / (1j * omega * c2) + zt, zt


def tune(lc, rc, omega_c, ra, max_iter=100, tol=1e-9):
    """Find (C1, C2) so the empty probe presents exactly ``Ra`` at ``omega_c``.

    Damped Newton iteration on ``(Im Zp / Ra, Re Zp / Ra - 1)`` in log-capacitance
    coordinates, started from the high-Q estimates
    ``C1 + C2 = 1 / (w^2 Lc)`` and ``C2 / (C1 + C2) = sqrt(Ra / (Qc w Lc))``.

    If Newton fails from that start (low Qc), it is restarted from the exact
    L-network solution :func:`l_match`.

    Raises
    ------
    MatchingError
        If ``Qc * omega_c * Lc <= Ra`` or ``Ra <= Rc`` (C1 would be negative).
    TuningError
        If the residual does not fall below ``tol`` within ``max_iter`` steps.
    """
    for name, val in (("lc", lc), ("rc", rc), ("omega_c", omega_c), ("ra", ra)):
        if not val > 0:
            raise ValueError(f"{name} must be positive")
    w = omega_c
    qc = w * lc / rc
    r_parallel = qc * w * lc
    if not r_parallel > ra:
        raise MatchingError(
            f"unmatchable: requires Qc*omega_c*Lc > Ra, got {r_parallel:.6g} <= {ra:.6g} Ohm"
        )
    if not ra > rc:
        raise MatchingError(f"unmatchable: requires Ra > Rc, got Ra={ra:.6g} <= Rc={rc:.6g} Ohm")
    c_total = 1.0 / (w * w * lc)
    frac = math.sqrt(ra / r_parallel)
    start = np.log([c_total * (1.0 - frac), c_total * frac]) if frac < 1.0 else None
    if start is not None:
        try:
            return _newton(lc, rc, w, ra, start, max_iter, tol)
        except (TuningError, np.linalg.LinAlgError, OverflowError):
            if max_iter == 0:
                raise
    return _newton(lc, rc, w, ra, np.log(l_match(lc, rc, w, ra)), max_iter, tol)


def l_match(lc, rc, omega, ra):
    """Exact (C1, C2) of the parallel-tune / series-match network.

    With ``Yc = 1 / (Rc + i w Lc) = G - i B`` the conditions give
    ``w C1 = B - sqrt(G/Ra - G^2)`` and ``1 / (w C2) = Im(1 / (Yc + i w C1))``.
    """
    yc = 1.0 / complex(rc, omega * lc)
    g, b = yc.real, -yc.imag
    root = math.sqrt(g / ra - g * g)
    c1 = (b - root) / omega
    zt = 1.0 / (yc + 1j * omega * c1)
    return c1, 1.0 / (omega * zt.imag)


def _newton(lc, rc, w, ra, x, max_iter, tol):
    def residual(x):
        if np.any(np.abs(x) > 700):
            return np.full(2, np.inf)
        zp, _ = _zp(lc, rc, math.exp(x[0]), math.exp(x[1]), w)
        return np.array([zp.imag / ra, zp.real / ra - 1.0])

    r = residual(x)
    for _ in range(max_iter):
        if np.max(np.abs(r)) < tol:
            return float(math.exp(x[0])), float(math.exp(x[1]))
        c1, c2 = math.exp(x[0]), math.exp(x[1])
        zp, zt = _zp(lc, rc, c1, c2, w)
        d_u = -(zt**2) * 1j * w * c1
        d_v = -1.0 / (1j * w * c2)
        jac = np.array([[d_u.imag, d_v.imag], [d_u.real, d_v.real]]) / ra
        step = np.linalg.solve(jac, -r)
        lam = 1.0
        norm0 = np.linalg.norm(r)
        while lam > 1e-6:
            x_new = x + lam * step
            r_new = residual(x_new)
            if np.all(np.isfinite(r_new)) and np.linalg.norm(r_new) < norm0:
                break
            lam *= 0.5
        else:
            raise TuningError("line search failed", tuple(r))
        x, r = x_new, r_new
    if np.max(np.abs(r)) < tol:
        return float(math.exp(x[0])), float(math.exp(x[1]))
    raise TuningError(f"no convergence after {max_iter} iterations", tuple(r))


def tuned_probe(lc, qc, omega_c, ra, theta_c=300.0, theta_a=0.0, turns=1, area=math.nan, length=math.nan):
    """Build a :class:`ProbeCircuit` with ``Rc = omega_c Lc / Qc`` and tuned capacitors."""
    rc = omega_c * lc / qc
    c1, c2 = tune(lc, rc, omega_c, ra)
    return ProbeCircuit(
        lc=lc,
        rc=rc,
        c1=c1,
        c2=c2,
        ra=ra,
        theta_c=theta_c,
        theta_a=theta_a,
        omega_c=omega_c,
        turns=turns,
        area=area,
        length=length,
    )


def _spin_z(spin, omega):
    if spin is None:
        return 0.0
    if callable(spin):
        spin = spin(omega)
    return spin.z


def coil_impedance(pc, omega, spin=None):
    """Spin-loaded coil branch impedance ``(Rc + Rs) + i w (Lc + Ls)``."""
    omega = np.asarray(omega, dtype=float)
    return pc.rc + 1j * omega * pc.lc + _spin_z(spin, omega)


def probe_impedance(pc, omega, spin=None):
    """Impedance seen looking from the amplifier terminals into the probe.

    ``spin`` is a :class:`~spinnoise.spins.SpinImpedance` on the same grid, a
    callable returning one, or None for the empty coil.
    """
    omega = np.asarray(omega, dtype=float)
    zp, _ = _zp(pc.lc, pc.rc, pc.c1, pc.c2, omega, _spin_z(spin, omega))
    return zp


def coil_transfer(pc, omega, spin=None):
    """Voltage gain from a source in series with the coil to the amplifier node.

    Solves the two-node admittance system (node A across C1, node B at the
    amplifier) at every frequency.
    """
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    zc = coil_impedance(pc, omega, spin) * np.ones_like(omega)
    yc = 1.0 / zc
    y1 = 1j * omega * pc.c1
    y2 = 1j * omega * pc.c2
    ga = 1.0 / pc.ra
    ymat = np.empty(omega.shape + (2, 2), dtype=complex)
    ymat[..., 0, 0] = yc + y1 + y2
    ymat[..., 0, 1] = -y2
    ymat[..., 1, 0] = -y2
    ymat[..., 1, 1] = y2 + ga
    # unit source voltage in series with the coil injects Vs / Zc into node A
    rhs = np.zeros(omega.shape + (2, 1), dtype=complex)
    rhs[..., 0, 0] = yc
    v = np.linalg.solve(ymat, rhs)
    return v[..., 1, 0]


def transfer_set(pc, omega, spin=None):
    """All transfer functions needed to refer noise sources to the amplifier input."""
    omega = np.asarray(omega, dtype=float)
    if omega.ndim != 1 or np.any(np.diff(omega) <= 0):
        raise ValueError("frequency grid must be one-dimensional and strictly increasing")
    if callable(spin):
        spin = spin(omega)
    zp = probe_impedance(pc, omega, spin)
    h = coil_transfer(pc, omega, spin)
    denom = pc.ra + zp
    return TransferSet(
        omega=omega,
        zp=zp,
        h_coil=h,
        h_amp_v=pc.ra / denom,
        h_amp_i=pc.ra * zp / denom,
    )


def amplifier_voltage_psd(pc):
    return 2.0 * CONSTANTS.kB * pc.theta_a * pc.ra / math.pi


def amplifier_current_psd(pc):
    return 2.0 * CONSTANTS.kB * pc.theta_a / (math.pi * pc.ra)


def amplifier_noise_psd(pc, ts):
    """``Va^2 |Ra/(Ra+Zp)|^2 + Ia^2 |Ra Zp/(Ra+Zp)|^2`` on the grid of ``ts``."""
    return amplifier_voltage_psd(pc) * np.abs(ts.h_amp_v) ** 2 + amplifier_current_psd(pc) * np.abs(
        ts.h_amp_i
    ) ** 2


def circuit_noise_psd(pc, ts):
    """Coil Nyquist noise ``2 Rc kB theta_c / pi`` referred to the amplifier input."""
    return 2.0 * pc.rc * CONSTANTS.kB * pc.theta_c / math.pi * np.abs(ts.h_coil) ** 2
