import math

import numpy as np
import pytest

from spinnoise.timeseries import (
    PhaseRegime,
    driven_ensemble_monte_carlo,
    time_average_phases,
    variance_v2_analytic,
)

from conftest import approx


def test_cos4_time_average():
    th = time_average_phases(100_000, np.random.default_rng(0))
    assert np.mean(np.cos(th) ** 4) == approx(3 / 8, rel=0, abs=1e-3)
    assert np.mean(np.cos(th) ** 2) == approx(1 / 2, rel=0, abs=1e-3)


def test_analytic_variance_formula():
    # alpha^4 Mp^4 / 8 + 2 Vn^2 (alpha^2 Mp^2 + Vn^2) + alpha^2 M1^2 (alpha^2 Mp^2 + 2 Vn^2)
    assert variance_v2_analytic(1.0, 10.0, 1.0, 2.0) == approx(
        16e4 / 8 + 2 * (400 + 1) + 4 * (400 + 2), rel=1e-15
    )


def test_signal_free_variance():
    r = driven_ensemble_monte_carlo(0.0, 10.0, 1.0, n_trials=1_000_000, seed=3)
    assert r.var_v2_analytic == approx(1e4 / 8 + 2 * (100 + 1), rel=1e-15)
    assert abs(r.var_z) < 3
    assert math.isnan(r.snr_ratio)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_random_phase_ratio_and_variance(seed):
    r = driven_ensemble_monte_carlo(1.0, 10.0, 1.0, PhaseRegime.RANDOM_PER_SAMPLE, n_trials=1_000_000, seed=seed)
    assert r.n_trials == 1_000_000
    assert abs(r.var_z) < 3
    assert abs(r.snr_ratio - 1.0) < 0.05
    assert r.snr_unbiased == approx(0.5, rel=0.05)  # a^2 M1^2 / (2 Vn^2)


def test_fixed_phase_cross_term_survives():
    phi = 0.3
    r = driven_ensemble_monte_carlo(1.0, 10.0, 1.0, PhaseRegime.FIXED, n_trials=400_000, seed=5, phi=phi)
    assert r.phi == phi
    expect = 1 + 2 * 10.0 * math.cos(phi)
    assert r.snr_ratio == approx(expect, rel=0.05)
    assert r.snr_ratio > 10  # gain of order 2 Mp / M1


def test_deterministic_in_seed():
    a = driven_ensemble_monte_carlo(1.0, 10.0, 1.0, n_trials=10_000, seed=9)
    b = driven_ensemble_monte_carlo(1.0, 10.0, 1.0, n_trials=10_000, seed=9)
    assert a == b


def test_errors():
    with pytest.raises(ValueError, match="insufficient"):
        driven_ensemble_monte_carlo(1.0, 10.0, 1.0, n_trials=999)
    with pytest.raises(ValueError, match="10 m1"):
        driven_ensemble_monte_carlo(1.0, 9.0, 1.0)
    with pytest.raises(ValueError):
        driven_ensemble_monte_carlo(1.0, 10.0, 0.0)


def test_summary_keys():
    s = driven_ensemble_monte_carlo(1.0, 10.0, 1.0, n_trials=10_000, seed=1).summary()
    for key in ("snr_ratio", "snr_ratio_err", "var_ratio", "var_ratio_err", "var_v2_analytic"):
        assert key in s
