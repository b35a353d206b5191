import math
import struct

import numpy as np
import pytest
from scipy import stats

from spinnoise.spectra import compose_spectrum
from spinnoise.timeseries import (
    ANALYSIS_COLUMNS,
    MAGIC,
    AliasingError,
    Injection,
    Lorentzian,
    PulseBias,
    RecordFormatError,
    SynthesisConfig,
    amplitude_for_snr,
    analyze,
    averaged_periodogram,
    axion_lineshape,
    band_relative_error,
    bias_cross_term,
    detection_snr,
    per_hz_to_per_rad,
    per_rad_to_per_hz,
    psd_function,
    read_record,
    synthesize,
    write_record,
)

from conftest import B0, approx, probe, proton_sample

S0 = 1e-12  # V^2/Hz


def white(seed, n_samples=4096, fs=1e4, level=S0, **kw):
    return synthesize(SynthesisConfig(fs, n_samples / fs, seed, spectrum=level, **kw))


# synthesis


def test_zero_spectrum_gives_zero_record():
    run = synthesize(SynthesisConfig(1e3, 4.0, 1, spectrum=None))
    assert run.n_samples == 4000 and np.all(run.data == 0.0)
    run = synthesize(SynthesisConfig(1e3, 4.0, 1, spectrum=0.0))
    assert np.all(run.data == 0.0)


def test_white_parseval_over_100_seeds():
    n, fs = 4096, 1e4
    sigma2 = S0 * fs / 2  # S0 times the Nyquist bandwidth
    ms = np.array([np.mean(white(seed, n, fs).data ** 2) for seed in range(100)])
    # each mean square is sigma2 chi2_n / n; the pooled mean has std sigma2 sqrt(2 / (100 n))
    err = sigma2 * math.sqrt(2.0 / (100 * n))
    assert abs(ms.mean() - sigma2) < 3 * err
    # the per-seed spread matches the chi-squared expectation as well
    assert ms.std(ddof=1) == approx(sigma2 * math.sqrt(2.0 / n), rel=0.25)


def test_white_samples_are_gaussian():
    x = white(3, 2**16).data
    assert stats.normaltest(x).pvalue > 1e-3


def test_pure_tone_concentrates_power():
    fs, n_block = 1024.0, 1024
    carrier = 100.0  # on a bin centre
    inj = Injection(1.0, carrier, coherence_time=1e6, stochastic=False)
    run = synthesize(SynthesisConfig(fs, 32.0, 5, injection=inj))
    res = analyze(run, n_block / fs, background="none")
    k = int(round(carrier / (res.freq_hz[1] - res.freq_hz[0])))
    power = res.averaged_psd
    assert power[k - 2 : k + 3].sum() / power.sum() >= 0.99


@pytest.mark.parametrize("window", ["boxcar", "hann"])
def test_tone_off_bin_centre(window):
    fs, n_block = 1024.0, 1024
    inj = Injection(1.0, 100.37, coherence_time=1e6, stochastic=False)
    res = analyze(synthesize(SynthesisConfig(fs, 32.0, 5, injection=inj)), n_block / fs, window=window, background="none")
    k = 100
    frac = res.averaged_psd[k - 2 : k + 3].sum() / res.averaged_psd.sum()
    # rectangular leakage keeps ~95 % near the line, Hann keeps nearly all of it
    assert frac > (0.99 if window == "hann" else 0.9)


def test_averaging_reduces_scatter_by_sqrt2():
    def scatter(n_blocks):
        vals = []
        for seed in range(10):
            run = white(seed, 1024 * n_blocks)
            _, psd, k = averaged_periodogram(run.data, 1e4, 1024)
            assert k == n_blocks
            vals.append(psd[1:-1].std() / psd[1:-1].mean())
        return np.mean(vals)

    assert scatter(32) / scatter(64) == approx(math.sqrt(2), rel=0.1)


def test_seed_determinism_and_threads():
    a = white(99, 2**15, block_size=4096)
    b = white(99, 2**15, block_size=4096)
    np.testing.assert_array_equal(a.data, b.data)
    c = synthesize(SynthesisConfig(1e4, 2**15 / 1e4, 99, spectrum=S0, block_size=4096), threads=4)
    np.testing.assert_array_equal(a.data, c.data)
    assert not np.array_equal(a.data, white(100, 2**15, block_size=4096).data)


@pytest.mark.parametrize("seed", [None, -1, 2**64, 1.5])
def test_seed_validation(seed):
    with pytest.raises(ValueError):
        SynthesisConfig(1e3, 1.0, seed)


def test_unit_conversion_both_directions():
    w = np.array([1.0, 10.0, 100.0])
    s = np.array([1.0, 2.0, 3.0])
    f, sh = per_rad_to_per_hz(w, s)
    np.testing.assert_allclose(f, w / (2 * math.pi))
    np.testing.assert_allclose(sh, 2 * math.pi * s)
    w2, s2 = per_hz_to_per_rad(f, sh)
    np.testing.assert_allclose(w2, w, rtol=1e-15)
    np.testing.assert_allclose(s2, s, rtol=1e-15)


def test_noise_spectrum_input_is_converted_to_per_hz():
    spec = compose_spectrum(proton_sample(), probe(theta_a=300.0), B0)
    lo = spec.f_hz[0]
    fn = psd_function(spec, lo_hz=lo)
    np.testing.assert_allclose(fn(spec.f_hz - lo), 2 * math.pi * spec.psd_total, rtol=1e-12)


def test_heterodyned_spectrum_round_trip():
    spec = compose_spectrum(proton_sample(theta_s=0.03), probe(theta_a=4.0), B0)
    lo, fs = 99.5e6, 2e6
    run = synthesize(SynthesisConfig(fs, 4096 * 200 / fs, 8, spectrum=spec, lo_hz=lo))
    res = analyze(run, 4096 / fs, background="none")
    _, err = band_relative_error(res, psd_function(spec, lo), band_bins=16)
    assert np.max(np.abs(err)) < 3 / math.sqrt(res.n_blocks)
    assert run.metadata["spin_linewidth_hz"] > 0


def test_aliasing_rejected():
    with pytest.raises(AliasingError):
        synthesize(SynthesisConfig(1e3, 1.0, 1, injection=Injection(1.0, 600.0, 0.1)))
    with pytest.raises(AliasingError):
        synthesize(SynthesisConfig(1e3, 1.0, 1, bias=PulseBias(1.0, 500.0)))


def test_stochastic_amplitudes_rayleigh():
    inj = Injection(2.0, 100.0, coherence_time=0.01)
    run = synthesize(SynthesisConfig(1e3, 200.0, 4, injection=inj))
    amps = run.metadata["truth"]["injection"]["segment_amplitudes"]
    assert np.mean(amps**2) == approx(4.0, rel=0.05)
    assert stats.kstest(amps / 2.0, stats.rayleigh(scale=1 / math.sqrt(2)).cdf).pvalue > 1e-3


# records


def test_record_round_trip(tmp_path):
    run = white(2024, 5000)
    path = tmp_path / "r.snlb"
    write_record(path, run)
    raw = path.read_bytes()
    assert len(raw) == 64 + 8 * 5000
    magic, fs, n, seed = struct.unpack("<8sdQQ", raw[:32])
    assert magic == MAGIC == b"SNLB0001" and fs == 1e4 and n == 5000 and seed == 2024
    back = read_record(path)
    np.testing.assert_array_equal(back.data, run.data)
    assert back.sample_rate == run.sample_rate and back.seed == 2024


def test_record_errors(tmp_path):
    run = white(1, 100)
    path = tmp_path / "r.snlb"
    write_record(path, run)
    raw = path.read_bytes()
    (tmp_path / "bad").write_bytes(b"XXXXXXXX" + raw[8:])
    with pytest.raises(RecordFormatError):
        read_record(tmp_path / "bad")
    (tmp_path / "short").write_bytes(raw[:-8])
    with pytest.raises(RecordFormatError):
        read_record(tmp_path / "short")
    (tmp_path / "tiny").write_bytes(raw[:10])
    with pytest.raises(RecordFormatError):
        read_record(tmp_path / "tiny")


# analysis


def test_block_count_and_errors():
    run = white(1, 10000)
    res = analyze(run, 0.3)
    assert res.n_blocks == math.floor(run.duration / 0.3)
    assert np.all(res.averaged_psd >= 0)
    with pytest.raises(ValueError, match="exceeds"):
        analyze(run, 2 * run.duration)
    with pytest.raises(ValueError):
        analyze(run, 0.1, window="flattop")


def test_lorentzian_kernel():
    k = Lorentzian(2.0).kernel(0.1)
    assert k.sum() == approx(1.0, rel=1e-12)
    np.testing.assert_allclose(k, k[::-1], rtol=1e-12)
    assert k.argmax() == k.size // 2
    ls = axion_lineshape(1e6, quality=1e6)
    assert ls.fwhm_hz == approx(1.0, rel=1e-12)


def test_snr_helpers_invert():
    a = amplitude_for_snr(10.0, S0, 800.0, 1.0)
    assert detection_snr(a, S0, 800.0, 1.0) == approx(10.0, rel=1e-12)


def test_white_statistic_is_standardized():
    run = white(11, 8192 * 100)
    res = analyze(run, 8192 / 1e4, lineshape=Lorentzian(2.0))
    z = (res.statistic[100:-100] - res.statistic_mean) / res.statistic_std
    assert abs(z.mean()) < 0.1 and z.std() == approx(1.0, rel=0.1)


def test_false_candidates_few_seeds():
    total = 0
    for seed in range(5):
        res = analyze(white(seed, 4096 * 400), 4096 / 1e4)
        total += len(res.candidates)
    # 5e3 bins at 5 sigma: expectation 1.4e-3
    assert total == 0


def _search(seed, snr=10.0):
    fs, block, k = 1000.0, 16384, 50
    duration = block * k / fs
    amp = amplitude_for_snr(snr, S0, duration, 1.0)
    inj = Injection(amp, 200.0, coherence_time=1.0)
    run = synthesize(SynthesisConfig(fs, duration, seed, spectrum=S0, injection=inj))
    return analyze(run, block / fs, lineshape=axion_lineshape(200.0, quality=200.0))


def _detected(res, carrier=200.0, width=1.0):
    return any(abs(res.freq_hz[k] - carrier) <= width for k, _ in res.candidates)


def test_detection_at_snr_10():
    hits = sum(_detected(_search(seed)) for seed in range(100))
    assert hits >= 95


def test_candidate_clusters_and_table(tmp_path):
    from spinnoise.io import read_csv

    res = _search(3)
    clusters = res.candidate_clusters()
    assert len(clusters) >= 1
    peak, stat, first, last = clusters[0]
    assert first <= peak <= last and stat == res.statistic[peak]
    path = tmp_path / "a.csv"
    res.to_csv(path)
    back = read_csv(path)
    assert tuple(back) == ANALYSIS_COLUMNS
    assert back["is_candidate"].sum() == len(res.candidates)


def test_regime_flag_in_metadata():
    spec = compose_spectrum(proton_sample(), probe(theta_a=4.0), B0)
    run = synthesize(SynthesisConfig(1e6, 0.05, 1, spectrum=spec, lo_hz=99.6e6))
    res = analyze(run, 0.005, lineshape=Lorentzian(1.0))
    assert res.metadata["regime"] == "spin_line_wider"
    res = analyze(run, 0.005, lineshape=Lorentzian(5e3))
    assert res.metadata["regime"] == "spin_line_narrower"


def test_bias_cross_term_averages_away():
    zs = []
    for seed in range(20):
        cfg = SynthesisConfig(
            1000.0,
            200.0,
            seed,
            injection=Injection(1.0, 50.0, coherence_time=1.0),
            bias=PulseBias(10.0, 50.0),
            keep_components=True,
        )
        mean, err, nseg = bias_cross_term(synthesize(cfg))
        assert nseg >= 100
        zs.append(mean / err)
    zs = np.abs(zs)
    assert np.sum(zs > 3) <= 1
    with pytest.raises(ValueError):
        bias_cross_term(white(1, 100))
