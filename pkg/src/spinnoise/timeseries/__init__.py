"""Time-domain synthesis, block-averaged spectral search and the driven-ensemble Monte Carlo."""

from .analysis import (
    ANALYSIS_COLUMNS,
    FILTER_GAIN,
    AnalysisResult,
    Lorentzian,
    amplitude_for_snr,
    analyze,
    averaged_periodogram,
    axion_lineshape,
    band_relative_error,
    bias_cross_term,
    detection_snr,
    radiometer_snr,
)
from .montecarlo import (
    MonteCarloResult,
    PhaseRegime,
    driven_ensemble_monte_carlo,
    time_average_phases,
    variance_v2_analytic,
)
from .records import MAGIC, RecordFormatError, read_record, write_record
from .synthesis import (
    AliasingError,
    Injection,
    PulseBias,
    SynthesisConfig,
    TimeSeriesRun,
    block_rng,
    per_hz_to_per_rad,
    per_rad_to_per_hz,
    psd_function,
    synthesize,
)

__all__ = [
    "ANALYSIS_COLUMNS",
    "FILTER_GAIN",
    "detection_snr",
    "AnalysisResult",
    "Lorentzian",
    "amplitude_for_snr",
    "analyze",
    "averaged_periodogram",
    "axion_lineshape",
    "band_relative_error",
    "bias_cross_term",
    "radiometer_snr",
    "MonteCarloResult",
    "PhaseRegime",
    "driven_ensemble_monte_carlo",
    "time_average_phases",
    "variance_v2_analytic",
    "MAGIC",
    "RecordFormatError",
    "read_record",
    "write_record",
    "AliasingError",
    "Injection",
    "PulseBias",
    "SynthesisConfig",
    "TimeSeriesRun",
    "block_rng",
    "per_hz_to_per_rad",
    "per_rad_to_per_hz",
    "psd_function",
    "synthesize",
]
