"""Monte Carlo check of signal-to-noise with and without a transverse bias.

Voltage samples without and with the dark-matter term share their random
numbers (common random numbers):

    V0 = a Mp cos(theta) + n
    V1 = V0 + a M1 cos(theta + phi)

``theta`` is the carrier phase from a time-average sampler, ``n`` is Gaussian
with variance ``Vn^2`` and ``phi`` is the dark-matter phase. The unbiased
measurement uses the same samples with ``Mp = 0``.

SNR definitions
---------------
unbiased : ``(<U1^2> - <U0^2>) / <U0^2>``, i.e. ``a^2 M1^2 / (2 Vn^2)``.
biased, random phase : the excess of ``var(V^2)`` caused by the signal over
    the noise part of ``var(V0^2)``, i.e. ``var(V0^2) - a^4 Mp^4 / 8``.
biased, fixed phase : the excess of ``<V^2>`` over ``Vn^2``; here the cross
    term ``a^2 Mp M1 cos(phi)`` survives and the ratio to the unbiased SNR is
    ``1 + 2 (Mp / M1) cos(phi)``.

In the random-phase regime samples come in antithetic pairs ``phi`` and
``phi + pi``. This leaves every marginal distribution unchanged and cancels
the odd-order cross terms that otherwise dominate the estimator variance.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PhaseRegime",
    "MonteCarloResult",
    "time_average_phases",
    "variance_v2_analytic",
    "driven_ensemble_monte_carlo",
]

MIN_TRIALS = 1000
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class PhaseRegime(str, enum.Enum):
    RANDOM_PER_SAMPLE = "random"
    FIXED = "fixed"


def time_average_phases(n, rng):
    """Carrier phases ``omega t_k`` on a uniform time grid with an irrational frequency ratio.

    A random offset is applied; the sequence is equidistributed, so moments
    such as ``<cos^4> = 3/8`` converge as ``1/n``.
    """
    k = np.arange(n, dtype=float)
    return 2 * math.pi * np.mod(k * _GOLDEN + rng.uniform(), 1.0)


def variance_v2_analytic(m1, mp, vn, alpha=1.0):
    """``a^4 Mp^4/8 + 2 Vn^2 (a^2 Mp^2 + Vn^2) + a^2 M1^2 (a^2 Mp^2 + 2 Vn^2)``; the ``M1^4`` term is dropped."""
    p2 = (alpha * mp) ** 2
    s2 = (alpha * m1) ** 2
    v2 = vn**2
    return p2**2 / 8 + 2 * v2 * (p2 + v2) + s2 * (p2 + 2 * v2)


@dataclass(frozen=True)
class MonteCarloResult:
    regime: PhaseRegime
    n_trials: int
    seed: int
    snr_biased: float
    snr_biased_err: float
    snr_unbiased: float
    snr_unbiased_err: float
    snr_ratio: float
    snr_ratio_err: float
    var_v2_empirical: float
    var_v2_err: float
    var_v2_analytic: float
    phi: float  # fixed-regime phase, NaN for random

    @property
    def var_ratio(self):
        return self.var_v2_empirical / self.var_v2_analytic

    @property
    def var_ratio_err(self):
        return self.var_v2_err / self.var_v2_analytic

    @property
    def var_z(self):
        """Deviation of the empirical variance from the analytic one in standard errors."""
        return (self.var_v2_empirical - self.var_v2_analytic) / self.var_v2_err

    def summary(self):
        return {
            "regime": self.regime.value,
            "n_trials": self.n_trials,
            "seed": self.seed,
            "snr_biased": self.snr_biased,
            "snr_biased_err": self.snr_biased_err,
            "snr_unbiased": self.snr_unbiased,
            "snr_unbiased_err": self.snr_unbiased_err,
            "snr_ratio": self.snr_ratio,
            "snr_ratio_err": self.snr_ratio_err,
            "var_v2_empirical": self.var_v2_empirical,
            "var_v2_err": self.var_v2_err,
            "var_v2_analytic": self.var_v2_analytic,
            "var_ratio": self.var_ratio,
            "var_ratio_err": self.var_ratio_err,
            "phi": self.phi,
        }


def _batch_stats(values, n_batches):
    """Per-batch means, shape ``(n_batches,)``, of each per-sample array in ``values``."""
    out = {}
    for name, v in values.items():
        out[name] = v[: v.size - v.size % n_batches].reshape(n_batches, -1).mean(axis=1)
    return out


def _mean_err(x):
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def driven_ensemble_monte_carlo(
    m1,
    mp,
    vn,
    regime=PhaseRegime.RANDOM_PER_SAMPLE,
    n_trials=1_000_000,
    seed=0,
    alpha=1.0,
    phi=None,
    n_batches=100,
):
    """Biased and unbiased SNR, and ``var(V^2)``, from ``n_trials`` voltage samples.

    Parameters
    ----------
    m1, mp : float
        Signal and bias transverse magnetizations (any common unit).
    vn : float
        RMS noise voltage.
    regime : PhaseRegime
        Dark-matter phase redrawn per sample, or fixed for the whole run.
    phi : float, optional
        Phase for the fixed regime; drawn from ``seed`` when omitted.
    n_batches : int
        Number of batches for the batch-means standard errors.

    Raises
    ------
    ValueError
        If ``n_trials < 1000`` or ``mp < 10 m1``.
    """
    regime = PhaseRegime(regime)
    n_trials = int(n_trials)
    if n_trials < MIN_TRIALS:
        raise ValueError(f"n_trials={n_trials} < {MIN_TRIALS}: insufficient statistics")
    if m1 < 0 or mp <= 0 or vn <= 0 or alpha <= 0:
        raise ValueError("m1 must be non-negative; mp, vn and alpha positive")
    if mp < 10 * m1:
        raise ValueError(f"bias must dominate the signal: need mp >= 10 m1, got mp={mp:g}, m1={m1:g}")
    ss = np.random.SeedSequence(int(seed))
    rng = np.random.Generator(np.random.Philox(ss))
    p = alpha * mp
    s = alpha * m1
    half = n_trials // 2 if regime is PhaseRegime.RANDOM_PER_SAMPLE else n_trials
    theta_h = time_average_phases(half, rng)
    noise_h = vn * rng.standard_normal(half)
    if regime is PhaseRegime.RANDOM_PER_SAMPLE:
        phi_h = rng.uniform(0.0, 2 * math.pi, size=half)
        theta = np.concatenate([theta_h, theta_h])
        noise = np.concatenate([noise_h, noise_h])
        phase = np.concatenate([phi_h, phi_h + math.pi])
        phi_out = math.nan
    else:
        phi_out = float(rng.uniform(0.0, 2 * math.pi)) if phi is None else float(phi)
        theta, noise, phase = theta_h, noise_h, np.full(half, phi_out)
    n_used = theta.size
    sig = s * np.cos(theta + phase)
    v0 = p * np.cos(theta) + noise
    v1 = v0 + sig
    u0 = noise
    u1 = noise + sig

    # batch pairs together so antithetic partners land in the same batch
    def interleave(x):
        if regime is PhaseRegime.RANDOM_PER_SAMPLE:
            return np.column_stack([x[:half], x[half:]]).ravel()
        return x

    v0sq, v1sq = interleave(v0 * v0), interleave(v1 * v1)
    b = _batch_stats(
        {
            "v0": v0sq,
            "v1": v1sq,
            "v0q": v0sq * v0sq,
            "v1q": v1sq * v1sq,
            "u0": interleave(u0 * u0),
            "u1": interleave(u1 * u1),
        },
        n_batches,
    )
    var0 = b["v0q"] - b["v0"] ** 2
    var1 = b["v1q"] - b["v1"] ** 2
    snr_u = (b["u1"] - b["u0"]) / b["u0"]
    if regime is PhaseRegime.RANDOM_PER_SAMPLE:
        snr_b = (var1 - var0) / (var0 - p**4 / 8)
    else:
        snr_b = (b["v1"] - b["v0"]) / (b["v0"] - p**2 / 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = snr_b / snr_u

    # global estimates use all samples; errors come from the batch spread
    def glob(x):
        return float(np.mean(x))

    g_var0 = glob(v0sq * v0sq) - glob(v0sq) ** 2
    g_var1 = glob(v1sq * v1sq) - glob(v1sq) ** 2
    g_u0, g_u1 = glob(u0 * u0), glob(u1 * u1)
    g_snr_u = (g_u1 - g_u0) / g_u0
    if regime is PhaseRegime.RANDOM_PER_SAMPLE:
        g_snr_b = (g_var1 - g_var0) / (g_var0 - p**4 / 8)
    else:
        g_snr_b = (glob(v1sq) - glob(v0sq)) / (glob(v0sq) - p**2 / 2)

    def err(x):
        return _mean_err(x)[1] if np.all(np.isfinite(x)) else math.nan

    return MonteCarloResult(
        regime=regime,
        n_trials=n_used,
        seed=int(seed),
        snr_biased=g_snr_b,
        snr_biased_err=err(snr_b),
        snr_unbiased=g_snr_u,
        snr_unbiased_err=err(snr_u),
        snr_ratio=g_snr_b / g_snr_u if g_snr_u != 0 else math.nan,
        snr_ratio_err=err(ratio),
        var_v2_empirical=g_var1,
        var_v2_err=err(var1),
        var_v2_analytic=variance_v2_analytic(m1, mp, vn, alpha),
        phi=phi_out,
    )
