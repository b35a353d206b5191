"""Noise spectra at the amplifier input for the four shipped spectrum presets.

The presets step from a noiseless amplifier with thermal protons (fig2a),
through a room-temperature amplifier (fig2b), to hyperpolarized spins at 3 K
and 30 mK (fig2c, fig2d) where radiation damping broadens the spin line.
Run with ``python3 demos/noise_spectra.py``.
"""

import math

import numpy as np

from spinnoise.cli import bias_field, build_ensemble, build_probe, build_spectrum
from spinnoise.config import load
from spinnoise.spectra import back_action_ratio, compose_spectrum, peak_fwhm
from spinnoise.spins import loaded_state

MHZ = 2e6 * math.pi  # rad/s per MHz


def main():
    print(f"{'preset':7s} {'theta_s':>8s} {'theta_a':>8s} {'spin FWHM':>12s} {'T2*':>10s} {'ts T2*/tc Tr':>12s} {'spin dip/peak':>14s}")
    for name in ("fig2a", "fig2b", "fig2c", "fig2d"):
        cfg = load(name)[0]
        ens, pc = build_ensemble(cfg), build_probe(cfg)
        b0 = bias_field(cfg, ens)
        spec = build_spectrum(cfg)
        state = loaded_state(ens, b0, pc.qc)
        _, fwhm = peak_fwhm(spec.omega, spec.psd_spin, near=state.omega0)
        # the spin feature relative to the same probe without a sample
        empty = compose_spectrum(None, pc, b0, grid=spec.omega)
        diff = spec.psd_total - empty.psd_total
        k = int(np.argmax(np.abs(diff)))
        kind = "peak" if diff[k] > 0 else "dip"
        print(
            f"{name:7s} {ens.theta_s:8.3g} {pc.theta_a:8.3g} {fwhm / (2 * math.pi):9.4g} Hz "
            f"{state.t2_star:10.3e} {back_action_ratio(ens, pc, b0):12.3g} {kind:>5s} @ {spec.omega[k] / MHZ:.4f} MHz"
        )
    print()
    print("Cooling the spins leaves the source-level line area unchanged but lets the circuit damp")
    print("the magnetization faster, so the feature widens and, once the amplifier")
    print("floor is present, turns from a bump into a dip below the circuit noise.")


if __name__ == "__main__":
    main()
