"""Noise budget at the amplifier input: spin-projection, circuit Nyquist, amplifier.

The three sources are uncorrelated and add in power. Spin and circuit noise
are both series sources in the coil branch, so they share the spin-loaded
transfer ``h_coil``; the amplifier noise sees the spin-loaded probe
impedance. All PSDs are one-sided per rad/s.
"""

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import circuit as _circuit
from .constants import CONSTANTS
from .spins import (
    loaded_state,
    spin_impedance,
    spin_noise_psd,
)

__all__ = [
    "GridResolutionError",
    "SpinImpedanceWarning",
    "NoiseSpectrum",
    "composite_grid",
    "default_grid",
    "check_grid",
    "compose_spectrum",
    "noiseless_amp_condition",
    "back_action_ratio",
    "amplifier_noise_requirement",
    "peak_fwhm",
    "CSV_COLUMNS",
]

CSV_COLUMNS = ("omega_rad_s", "f_Hz", "psd_spin", "psd_circuit", "psd_amp", "psd_total")
POINTS_PER_LINEWIDTH = 20


class GridResolutionError(ValueError):
    pass


class SpinImpedanceWarning(UserWarning):
    """The small-spin-impedance approximation behind a closed form is violated."""


@dataclass(frozen=True)
class NoiseSpectrum:
    omega: np.ndarray
    psd_spin: np.ndarray
    psd_circuit: np.ndarray
    psd_amp: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def psd_total(self):
        return self.psd_spin + self.psd_circuit + self.psd_amp

    @property
    def f_hz(self):
        return self.omega / (2 * math.pi)

    def per_hz(self, column="psd_total"):
        """Convert one PSD column to per-Hz units (multiply by 2 pi)."""
        return 2 * math.pi * np.asarray(getattr(self, column))

    def table(self):
        return np.column_stack(
            [self.omega, self.f_hz, self.psd_spin, self.psd_circuit, self.psd_amp, self.psd_total]
        )

    def to_csv(self, path):
        from .io import write_csv

        write_csv(path, CSV_COLUMNS, self.table())


def composite_grid(
    centers,
    linewidth,
    span,
    n_background=4000,
    points_per_linewidth=POINTS_PER_LINEWIDTH,
    window=10,
    points_per_decade=80,
):
    """Uniform background plus dense windows and log-spaced tails around each center.

    Parameters
    ----------
    centers : sequence of float
        Angular frequencies to refine around (rad/s).
    linewidth : float
        Half-width that must be resolved, rad/s. Inside ``+-window*linewidth``
        the spacing is ``linewidth / points_per_linewidth``.
    span : tuple of float
        ``(omega_min, omega_max)``.
    """
    lo, hi = span
    if not 0 < lo < hi:
        raise ValueError("span must satisfy 0 < lo < hi")
    parts = [np.linspace(lo, hi, n_background)]
    step = linewidth / points_per_linewidth
    half = window * linewidth
    for c in centers:
        parts.append(c + np.arange(-half, half + 0.5 * step, step))
        reach = max(c - lo, hi - c)
        if reach > half:
            n_tail = max(int(math.ceil(points_per_decade * math.log10(reach / half))), 2)
            offs = np.geomspace(half, reach, n_tail)
            parts.extend([c + offs, c - offs])
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= lo) & (grid <= hi)]


def _resolved_linewidth(state, pc):
    return min(1.0 / state.t2_star, pc.omega_c / pc.qc)


def default_grid(ens, pc, b0, suppression=1.0, rel_span=0.05, **kwargs):
    """Composite grid covering circuit and spin resonances, +-``rel_span`` around them."""
    state = loaded_state(ens, b0, pc.qc, suppression)
    lw = _resolved_linewidth(state, pc)
    centers = (pc.omega_c, state.omega0)
    lo = min(centers) * (1.0 - rel_span)
    hi = max(centers) * (1.0 + rel_span)
    return composite_grid(centers, lw, (lo, hi), **kwargs)


def check_grid(grid, centers, linewidth, points_per_linewidth=POINTS_PER_LINEWIDTH):
    """Raise :class:`GridResolutionError` unless every center is covered and resolved."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise GridResolutionError("grid must be one-dimensional and strictly increasing")
    need = linewidth / points_per_linewidth
    for c in centers:
        if not grid[0] <= c <= grid[-1]:
            raise GridResolutionError(f"grid [{grid[0]:.6g}, {grid[-1]:.6g}] does not cover {c:.6g} rad/s")
        i0 = max(int(np.searchsorted(grid, c - linewidth)) - 1, 0)
        i1 = min(int(np.searchsorted(grid, c + linewidth, side="right")), grid.size - 1)
        spacing = np.diff(grid[i0 : i1 + 1]).max()
        if spacing > need * (1 + 1e-6):
            raise GridResolutionError(
                f"grid spacing {spacing:.4g} rad/s near {c:.6g} rad/s exceeds required "
                f"{need:.4g} rad/s ({points_per_linewidth} points per linewidth {linewidth:.4g} rad/s)"
            )


def compose_spectrum(ens, pc, b0, suppression=1.0, grid=None):
    """Per-source and total noise PSD referred to the amplifier input.

    Parameters
    ----------
    ens : SpinEnsemble or None
        None gives the empty probe (no spin impedance, no spin noise).
    pc : ProbeCircuit
        Must carry ``omega_c``; its ``theta_c``/``theta_a`` set the circuit and
        amplifier noise levels.
    b0 : float
        Bias field, T.
    suppression : float
        Back-action suppression factor in [0, 1].
    grid : array_like, optional
        Angular-frequency grid. Defaults to :func:`default_grid`.

    Returns
    -------
    NoiseSpectrum
    """
    if ens is None:
        return _empty_spectrum(pc, grid)
    state = loaded_state(ens, b0, pc.qc, suppression)
    if grid is None:
        grid = default_grid(ens, pc, b0, suppression)
    grid = np.asarray(grid, dtype=float)
    check_grid(grid, (pc.omega_c, state.omega0), _resolved_linewidth(state, pc))

    spin = spin_impedance(state, pc.lc, ens.filling_factor, grid)
    ts = _circuit.transfer_set(pc, grid, spin)
    gain = np.abs(ts.h_coil) ** 2
    psd_spin = spin_noise_psd(state, ens, pc.lc, grid) * gain
    psd_circuit = _circuit.circuit_noise_psd(pc, ts)
    psd_amp = _circuit.amplifier_noise_psd(pc, ts)
    meta = {
        "spin_ensemble": asdict(ens),
        "probe_circuit": asdict(pc),
        "b0_T": b0,
        "suppression": suppression,
        "state": asdict(state),
        "constants": CONSTANTS.as_dict(),
        "psd_convention": "one-sided, V^2 s/rad (multiply by 2*pi for V^2/Hz)",
    }
    return NoiseSpectrum(grid, psd_spin, psd_circuit, psd_amp, meta)


def _empty_spectrum(pc, grid):
    if grid is None:
        lw = pc.omega_c / pc.qc
        grid = composite_grid((pc.omega_c,), lw, (0.95 * pc.omega_c, 1.05 * pc.omega_c))
    grid = np.asarray(grid, dtype=float)
    check_grid(grid, (pc.omega_c,), pc.omega_c / pc.qc)
    ts = _circuit.transfer_set(pc, grid)
    meta = {
        "spin_ensemble": None,
        "probe_circuit": asdict(pc),
        "constants": CONSTANTS.as_dict(),
        "psd_convention": "one-sided, V^2 s/rad (multiply by 2*pi for V^2/Hz)",
    }
    return NoiseSpectrum(
        grid,
        np.zeros_like(grid),
        _circuit.circuit_noise_psd(pc, ts),
        _circuit.amplifier_noise_psd(pc, ts),
        meta,
    )


def noiseless_amp_condition(ens, pc, b0, suppression=1.0):
    """Circuit Nyquist noise below spin-projection noise on resonance.

    Returns ``(lhs, rhs, satisfied)`` with ``lhs = kB theta_c`` and
    ``rhs = (q/4) Qc mu0 hbar^2 gamma^2 n w0 T2*``, where ``Qc = w0 Lc / Rc``.
    """
    state = loaded_state(ens, b0, pc.qc, suppression)
    qc0 = state.omega0 * pc.lc / pc.rc
    lhs = CONSTANTS.kB * pc.theta_c
    rhs = (
        ens.filling_factor
        / 4.0
        * qc0
        * CONSTANTS.mu0
        * CONSTANTS.hbar**2
        * ens.gamma**2
        * ens.density
        * state.omega0
        * state.t2_star
    )
    return lhs, rhs, bool(lhs < rhs)


def back_action_ratio(ens, pc, b0, suppression=1.0):
    """``(theta_s / theta_c)(T2* / T_r)``; order-unity restatement of the noiseless-amplifier condition."""
    state = loaded_state(ens, b0, pc.qc, suppression)
    if pc.theta_c == 0:
        return math.inf
    return ens.theta_s / pc.theta_c * state.t2_star / state.t_radiation


def amplifier_noise_requirement(ens, pc, b0, suppression=1.0):
    """Amplifier input noise PSD below which spin-projection noise dominates.

    ``Qc Ra (q / 2 pi) mu0 hbar^2 gamma^2 n w0 T2*`` in V^2 s/rad. Valid for
    small spin impedance; a :class:`SpinImpedanceWarning` is emitted when
    ``Rs(w0) >= 0.1 Rc``.
    """
    state = loaded_state(ens, b0, pc.qc, suppression)
    rs0 = spin_impedance(state, pc.lc, ens.filling_factor, state.omega0).rs
    if rs0 >= 0.1 * pc.rc:
        warnings.warn(
            f"spin resistance Rs(w0)={float(rs0):.3g} Ohm is not small against Rc={pc.rc:.3g} Ohm",
            SpinImpedanceWarning,
            stacklevel=2,
        )
    return (
        pc.qc
        * pc.ra
        * ens.filling_factor
        / (2 * math.pi)
        * CONSTANTS.mu0
        * CONSTANTS.hbar**2
        * ens.gamma**2
        * ens.density
        * state.omega0
        * state.t2_star
    )


def peak_fwhm(omega, psd, near=None, baseline=0.0):
    """Full width at half maximum of the peak in ``psd - baseline``.

    The peak is the maximum of the whole array, or the local maximum closest
    to ``near`` when given. Half-max crossings are linearly interpolated.
    Returns ``(center, fwhm)`` in the units of ``omega``.
    """
    omega = np.asarray(omega, dtype=float)
    y = np.asarray(psd, dtype=float) - baseline
    if near is None:
        k = int(np.argmax(y))
    else:
        k = int(np.searchsorted(omega, near))
        k = min(max(k, 1), omega.size - 2)
        # climb to the local maximum
        while True:
            if k + 1 < y.size and y[k + 1] > y[k]:
                k += 1
            elif k > 0 and y[k - 1] > y[k]:
                k -= 1
            else:
                break
    half = 0.5 * y[k]
    left = k
    while left > 0 and y[left] > half:
        left -= 1
    right = k
    while right < y.size - 1 and y[right] > half:
        right += 1
    if y[left] > half or y[right] > half:
        raise ValueError("half-maximum not reached inside the grid")
    wl = np.interp(half, [y[left], y[left + 1]], [omega[left], omega[left + 1]])
    wr = np.interp(half, [y[right], y[right - 1]], [omega[right], omega[right - 1]])
    return omega[k], wr - wl
