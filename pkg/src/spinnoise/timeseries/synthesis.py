"""Frequency-domain synthesis of voltage records at the amplifier input.

Noise is generated block by block: each block gets independent complex
Gaussian bin amplitudes scaled by the square root of the target one-sided
PSD, followed by an inverse real FFT. The random stream of block ``k`` is
derived from ``(seed, k)``, so the record does not depend on how blocks are
scheduled.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..spectra import NoiseSpectrum

__all__ = [
    "AliasingError",
    "Injection",
    "PulseBias",
    "SynthesisConfig",
    "TimeSeriesRun",
    "per_rad_to_per_hz",
    "per_hz_to_per_rad",
    "psd_function",
    "block_rng",
    "synthesize",
]

_NOISE_STREAM = 0
_SIGNAL_STREAM = 1


class AliasingError(ValueError):
    pass


def per_rad_to_per_hz(omega, psd_per_rad):
    """Convert a one-sided PSD on an angular grid to per-Hz: ``(f, 2 pi S)``."""
    return np.asarray(omega) / (2 * math.pi), 2 * math.pi * np.asarray(psd_per_rad)


def per_hz_to_per_rad(f_hz, psd_per_hz):
    """Inverse of :func:`per_rad_to_per_hz`."""
    return 2 * math.pi * np.asarray(f_hz), np.asarray(psd_per_hz) / (2 * math.pi)


@dataclass(frozen=True)
class Injection:
    """Axion-like carrier: amplitude and phase re-drawn every ``coherence_time``.

    With ``stochastic`` the amplitude is Rayleigh distributed with mean square
    ``amplitude**2``; otherwise it is fixed at ``amplitude``. Phases are
    uniform in either case. Units are volts at the amplifier input.
    """

    amplitude: float
    carrier_hz: float
    coherence_time: float
    stochastic: bool = True


@dataclass(frozen=True)
class PulseBias:
    """Deterministic transverse-magnetization bias carrier (tipping pulse)."""

    amplitude: float
    carrier_hz: float
    phase: float = 0.0


@dataclass(frozen=True)
class SynthesisConfig:
    """
    Parameters
    ----------
    sample_rate : float
        Hz.
    duration : float
        Record length, s.
    seed : int
        Unsigned 64-bit seed; required.
    spectrum : NoiseSpectrum, callable, float or None
        Target noise PSD. A :class:`NoiseSpectrum` is converted to per-Hz and
        shifted down by ``lo_hz``; a callable maps frequency (Hz) to a one-sided
        PSD in V^2/Hz; a float is a white level in V^2/Hz.
    lo_hz : float
        Local-oscillator frequency subtracted from a NoiseSpectrum grid
        (heterodyne to baseband).
    block_size : int, optional
        Samples per synthesis block. Defaults to the whole record, capped at 2**20.
    keep_components : bool
        Also return the noise, signal and bias components separately.
    """

    sample_rate: float
    duration: float
    seed: int
    spectrum: object = None
    lo_hz: float = 0.0
    injection: Injection = None
    bias: PulseBias = None
    block_size: int = None
    keep_components: bool = False

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("a seed is required for synthesis")
        if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if not self.sample_rate > 0 or not self.duration > 0:
            raise ValueError("sample_rate and duration must be positive")
        if self.n_samples < 2:
            raise ValueError("record must contain at least two samples")
        if self.block_size is not None and not 2 <= self.block_size:
            raise ValueError("block_size must be at least 2")

    @property
    def n_samples(self):
        return int(round(self.duration * self.sample_rate))

    @property
    def nyquist(self):
        return 0.5 * self.sample_rate


@dataclass
class TimeSeriesRun:
    data: np.ndarray
    sample_rate: float
    seed: int
    metadata: dict = field(default_factory=dict)
    components: dict = None

    @property
    def n_samples(self):
        return self.data.size

    @property
    def duration(self):
        return self.data.size / self.sample_rate

    @property
    def time(self):
        return np.arange(self.data.size) / self.sample_rate


def psd_function(spectrum, lo_hz=0.0):
    """Normalize the ``spectrum`` argument of :class:`SynthesisConfig` to ``f -> S(f)`` per Hz.

    Outside a NoiseSpectrum's grid the edge values are held constant. Content
    above Nyquist is discarded, as behind an ideal anti-aliasing filter, and
    after a heterodyne shift the image band at negative frequency is dropped.
    """
    if spectrum is None:
        return lambda f: np.zeros_like(np.asarray(f, dtype=float))
    if isinstance(spectrum, NoiseSpectrum):
        f, s = per_rad_to_per_hz(spectrum.omega, spectrum.psd_total)
        f = f - lo_hz
        return lambda q: np.interp(q, f, s)
    if callable(spectrum):
        return spectrum
    level = float(spectrum)
    if level < 0:
        raise ValueError("PSD level must be non-negative")
    return lambda f: np.full_like(np.asarray(f, dtype=float), level)


def block_rng(seed, stream, index=0):
    """Counter-based generator for ``(seed, stream, index)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(ss))


def _noise_block(psd, n, fs, rng):
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    s = np.clip(np.asarray(psd(freqs), dtype=float), 0.0, None)
    # E|X_k|^2 = n fs S(f_k) / 2 reproduces a one-sided PSD S
    scale = np.sqrt(s * n * fs / 2.0)
    z = rng.standard_normal(freqs.size) + 1j * rng.standard_normal(freqs.size)
    x = scale * z / math.sqrt(2.0)
    x[0] = scale[0] * z[0].real
    if n % 2 == 0:
        x[-1] = scale[-1] * z[-1].real
    return np.fft.irfft(x, n=n)


def _check_carrier(carrier, nyquist, what):
    if not 0 < carrier < nyquist:
        raise AliasingError(f"{what} carrier {carrier:.6g} Hz outside (0, Nyquist={nyquist:.6g} Hz)")


def _injected_signal(inj, t, seed):
    rng = block_rng(seed, _SIGNAL_STREAM)
    n_seg = int(math.ceil(t[-1] / inj.coherence_time + 1e-12)) + 1
    if inj.stochastic:
        amps = inj.amplitude * rng.rayleigh(scale=1.0 / math.sqrt(2.0), size=n_seg)
    else:
        amps = np.full(n_seg, float(inj.amplitude))
    phases = rng.uniform(0.0, 2 * math.pi, size=n_seg)
    seg = np.floor(t / inj.coherence_time).astype(np.int64)
    sig = amps[seg] * np.cos(2 * math.pi * inj.carrier_hz * t + phases[seg])
    return sig, amps, phases


def _spin_linewidth_hz(spectrum):
    """Spin-line FWHM in Hz recorded in a NoiseSpectrum's metadata, or None."""
    if not isinstance(spectrum, NoiseSpectrum):
        return None
    state = spectrum.metadata.get("state")
    if not state:
        return None
    return 1.0 / (math.pi * state["t2_star"])


def synthesize(cfg, threads=1):
    """Generate a :class:`TimeSeriesRun` from ``cfg``; bit-identical for identical inputs.

    ``threads > 1`` synthesizes blocks concurrently. Each block draws from its
    own counter-based stream, so the output does not depend on ``threads``.
    """
    fs = cfg.sample_rate
    n = cfg.n_samples
    psd = psd_function(cfg.spectrum, cfg.lo_hz)
    block = min(n, cfg.block_size or 2**20)
    noise = np.empty(n)
    starts = list(range(0, n, block))

    def fill(k):
        start = starts[k]
        m = min(block, n - start)
        noise[start : start + m] = _noise_block(psd, m, fs, block_rng(cfg.seed, _NOISE_STREAM, k))

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(fill, range(len(starts))))
    else:
        for k in range(len(starts)):
            fill(k)
    t = np.arange(n) / fs
    truth = {"injection": None, "bias": None}
    signal = np.zeros(n)
    bias = np.zeros(n)
    if cfg.injection is not None:
        _check_carrier(cfg.injection.carrier_hz, cfg.nyquist, "injection")
        signal, amps, phases = _injected_signal(cfg.injection, t, cfg.seed)
        truth["injection"] = {
            "amplitude": cfg.injection.amplitude,
            "carrier_hz": cfg.injection.carrier_hz,
            "coherence_time": cfg.injection.coherence_time,
            "stochastic": cfg.injection.stochastic,
            "segment_amplitudes": amps,
            "segment_phases": phases,
        }
    if cfg.bias is not None:
        _check_carrier(cfg.bias.carrier_hz, cfg.nyquist, "bias")
        bias = cfg.bias.amplitude * np.cos(2 * math.pi * cfg.bias.carrier_hz * t + cfg.bias.phase)
        truth["bias"] = {
            "amplitude": cfg.bias.amplitude,
            "carrier_hz": cfg.bias.carrier_hz,
            "phase": cfg.bias.phase,
        }
    data = noise + signal + bias
    meta = {
        "sample_rate": fs,
        "duration": n / fs,
        "n_samples": n,
        "seed": int(cfg.seed),
        "lo_hz": cfg.lo_hz,
        "synthesis_block": block,
        "spin_linewidth_hz": _spin_linewidth_hz(cfg.spectrum),
        "truth": truth,
    }
    components = {"noise": noise, "signal": signal, "bias": bias} if cfg.keep_components else None
    return TimeSeriesRun(data=data, sample_rate=fs, seed=int(cfg.seed), metadata=meta, components=components)
