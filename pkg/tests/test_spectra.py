import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from spinnoise.circuit import amplifier_voltage_psd
from spinnoise.constants import CONSTANTS, PROTON_GAMMA
from spinnoise.spectra import (
    CSV_COLUMNS,
    GridResolutionError,
    NoiseSpectrum,
    SpinImpedanceWarning,
    amplifier_noise_requirement,
    back_action_ratio,
    check_grid,
    compose_spectrum,
    composite_grid,
    default_grid,
    noiseless_amp_condition,
    peak_fwhm,
)
from spinnoise.spins import loaded_state

from conftest import approx, B0, OMEGA_0, OMEGA_C, QC, RA, probe, proton_sample

# frozen from the independent 30-digit evaluation
NOISELESS_AMP_LHS_300K = 4.141947e-21  # J
NOISELESS_AMP_RHS_300K = 6.228663171311008e-21  # J
AMP_REQUIREMENT_FIG2A = 1.9806644007364393e-19  # V^2 s / rad


def spectrum(theta_s=300.0, theta_c=300.0, theta_a=0.0, density=1e29, grid=None, suppression=1.0):
    return compose_spectrum(
        proton_sample(theta_s=theta_s, density=density), probe(theta_c, theta_a), B0, suppression, grid
    )


@pytest.fixture(scope="module")
def shared_grid():
    # covers the narrow 300 K line and the broad 0.03 K line
    pc = probe()
    return np.union1d(default_grid(proton_sample(0.03), pc, B0), default_grid(proton_sample(300.0), pc, B0))


# grids


def test_composite_grid_resolution():
    g = composite_grid((OMEGA_C, OMEGA_0), 1e3, (0.9 * OMEGA_C, 1.1 * OMEGA_0))
    assert np.all(np.diff(g) > 0)
    check_grid(g, (OMEGA_C, OMEGA_0), 1e3)
    with pytest.raises(ValueError):
        composite_grid((OMEGA_C,), 1e3, (2.0, 1.0))


def test_under_resolved_grid_reports_requirement():
    g = np.linspace(0.95, 1.05, 1000) * OMEGA_C
    with pytest.raises(GridResolutionError, match="required"):
        spectrum(grid=g)
    with pytest.raises(GridResolutionError, match="does not cover"):
        spectrum(grid=np.linspace(0.5, 0.9, 100) * OMEGA_C)


# structure


def test_total_is_sum_and_nonnegative():
    s = spectrum(theta_a=300.0)
    np.testing.assert_array_equal(s.psd_total, s.psd_spin + s.psd_circuit + s.psd_amp)
    for col in (s.psd_spin, s.psd_circuit, s.psd_amp):
        assert np.all(col >= 0)
    assert s.metadata["b0_T"] == B0 and "spin_ensemble" in s.metadata and "probe_circuit" in s.metadata


def test_fig2a_noiseless_amplifier_features():
    s = spectrum()
    assert np.all(s.psd_amp == 0)
    empty = compose_spectrum(None, probe(), B0, grid=s.omega)
    # circuit-resonance peak at 100 MHz
    c, _ = peak_fwhm(s.omega, empty.psd_total)
    assert abs(c - OMEGA_C) < 0.1 * OMEGA_C / QC
    # the spin feature is centred at 100.1 MHz
    t2 = loaded_state(proton_sample(), B0, QC).t2_star
    k = np.argmax(np.abs(s.psd_total - empty.psd_total))
    assert abs(s.omega[k] - OMEGA_0) < 2 / t2
    cs, _ = peak_fwhm(s.omega, s.psd_spin, near=OMEGA_0)
    assert abs(cs - OMEGA_0) < 1 / t2


def test_fig2d_spin_width_exceeds_circuit_width():
    s = spectrum(theta_s=0.03)
    _, fwhm = peak_fwhm(s.omega, s.psd_spin, near=OMEGA_0)
    assert fwhm > OMEGA_C / QC


def test_source_independence():
    full = spectrum(theta_a=4.0)
    g = full.omega
    for zeroed, col in (("theta_c", "psd_circuit"), ("theta_a", "psd_amp")):
        kw = {"theta_c": 300.0, "theta_a": 4.0, zeroed: 0.0}
        part = compose_spectrum(proton_sample(), probe(**kw), B0, grid=g)
        np.testing.assert_allclose(part.psd_total, full.psd_total - getattr(full, col), rtol=1e-12, atol=0)


def _wide_grid():
    return default_grid(proton_sample(), probe(), B0, rel_span=0.5)


def _far(g):
    lw = OMEGA_C / QC
    return (np.abs(g - OMEGA_C) > 300 * lw) & (np.abs(g - OMEGA_0) > 300 * lw)


def test_off_resonant_floor():
    g = _wide_grid()
    s = spectrum(theta_a=300.0, grid=g)
    far = _far(g)
    assert far.sum() > 100
    np.testing.assert_allclose(s.psd_total[far], amplifier_voltage_psd(probe(theta_a=300.0)), rtol=0.02)


def test_fig2b_adds_floor_fig2a_does_not():
    g = _wide_grid()
    a, b = spectrum(theta_a=0.0, grid=g), spectrum(theta_a=300.0, grid=g)
    far = _far(g)
    assert np.all(b.psd_total[far] > 1e3 * a.psd_total[far])
    assert np.all(a.psd_amp == 0) and np.all(b.psd_amp[far] > 0)


def test_per_hz_and_csv(tmp_path):
    from spinnoise.io import read_csv

    s = spectrum()
    np.testing.assert_allclose(s.per_hz("psd_spin"), 2 * math.pi * s.psd_spin)
    path = tmp_path / "s.csv"
    s.to_csv(path)
    text = path.read_bytes()
    assert b"\r" not in text
    assert text.splitlines()[0].decode() == ",".join(CSV_COLUMNS)
    back = read_csv(path)
    np.testing.assert_allclose(back["psd_total"], s.psd_total, rtol=1e-8)


# design conditions


def test_noiseless_amp_condition_golden(sample, pc):
    lhs, rhs, ok = noiseless_amp_condition(sample, pc, B0)
    assert lhs == approx(NOISELESS_AMP_LHS_300K, rel=1e-12)
    assert rhs == approx(NOISELESS_AMP_RHS_300K, rel=1e-9)
    assert ok is True


def test_noiseless_amp_condition_zero_circuit_temperature():
    for theta_s, n in ((300.0, 1e20), (0.1, 1e29)):
        _, _, ok = noiseless_amp_condition(proton_sample(theta_s, density=n), probe(theta_c=0.0), B0)
        assert ok


def test_condition_equivalent_to_back_action_ratio():
    checked = 0
    for theta_s in (0.03, 0.3, 3.0, 30.0, 300.0):
        for theta_c in (0.01, 0.1, 1.0, 10.0, 300.0):
            for n in (1e25, 1e27, 1e29):
                ens, pc = proton_sample(theta_s, density=n), probe(theta_c=theta_c)
                ratio = back_action_ratio(ens, pc, B0)
                if 0.1 <= ratio <= 10:
                    continue
                assert noiseless_amp_condition(ens, pc, B0)[2] == (ratio > 1)
                checked += 1
    assert checked > 40


def test_amplifier_requirement_golden(sample, pc):
    # Rs(w0) is about 0.75 Rc for the fig2a sample, so the small-impedance warning fires
    with pytest.warns(SpinImpedanceWarning):
        thr = amplifier_noise_requirement(sample, pc, B0)
    assert thr == approx(AMP_REQUIREMENT_FIG2A, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["qc", "ra", "n", "t2"]), st.floats(1.5, 4.0))
def test_amplifier_requirement_linear(which, k):
    base = dict(qc=QC, ra=RA, n=1e20, t2=1e-3)

    def thr(p):
        ens = proton_sample(density=p["n"], t2=p["t2"], ppm=0.0)
        # zero suppression keeps T2* = T2' so T2* scales alone
        return amplifier_noise_requirement(ens, probe(qc=p["qc"], ra=p["ra"]), B0, suppression=0.0)

    scaled = dict(base, **{which: base[which] * k})
    assert thr(scaled) == approx(k * thr(base), rel=1e-9)


def _threshold_and_peak():
    w0 = OMEGA_C
    b0 = w0 / PROTON_GAMMA
    ens, pc = proton_sample(density=1e25), probe()
    s = compose_spectrum(ens, pc, b0)
    return amplifier_noise_requirement(ens, pc, b0), s.psd_spin.max()


def test_amplifier_requirement_vs_spin_peak_derived_factor():
    # with matched gain |H|^2 = Qc Ra / (4 w Lc) and the per-rad/s spin PSD, the
    # threshold is eight times the spin-noise peak referred to the amplifier
    thr, peak = _threshold_and_peak()
    assert thr / peak == approx(8.0, rel=0.01)


def test_amplifier_requirement_vs_spin_peak_within_factor_two():
    thr, peak = _threshold_and_peak()
    assert 0.5 <= thr / peak <= 2.0


# line area with the spin temperature


def test_spin_feature_area_conserved_across_spin_temperature(shared_grid):
    g = shared_grid
    empty = compose_spectrum(None, probe(), B0, grid=g)
    areas = [trapezoid(spectrum(theta_s=t, grid=g).psd_total - empty.psd_total, g) for t in (300.0, 3.0, 0.03)]
    assert areas[1] == approx(areas[0], rel=0.05)
    assert areas[2] == approx(areas[0], rel=0.05)


def test_spin_source_area_across_spin_temperature(shared_grid):
    g = shared_grid
    areas = [trapezoid(spectrum(theta_s=t, grid=g).psd_spin, g) for t in (300.0, 3.0, 0.03)]
    # through the circuit the spin noise of the hot and 3 K samples agrees closely
    assert areas[1] == approx(areas[0], rel=0.1)
    assert areas[2] < areas[0]


def test_peak_fwhm_on_lorentzian():
    w = np.linspace(-50, 50, 100001)
    y = 1 / (1 + (w / 2.0) ** 2)
    c, fw = peak_fwhm(w, y)
    assert c == approx(0.0, abs=1e-3) and fw == approx(4.0, rel=1e-6)
    with pytest.raises(ValueError):
        peak_fwhm(w[:100], y[:100] + 1.0, near=w[50])
