"""Spin-projection noise in magnetic-resonance searches for axion-like dark matter.

Modules
-------
spins        magnetization, back-action, susceptibility, spin-noise PSD
circuit      tuned-and-matched probe, transfer functions, amplifier noise
spectra      noise budget at the amplifier input
sensitivity  EDM and gradient coupling limits versus axion mass
timeseries   record synthesis, block-averaged search, driven-ensemble Monte Carlo
dimensions   symbolic dimensional audit of the coupling chains
config, cli  INI configuration and the ``spinnoise`` command
"""

__version__ = "0.1.0"

from .constants import CONSTANTS, PB207_GAMMA, PROTON_GAMMA
from .spins import SpinEnsemble, loaded_state, magnetization, spin_noise_psd
from .circuit import ProbeCircuit, tune, tuned_probe
from .spectra import NoiseSpectrum, compose_spectrum
from .sensitivity import AxionSearchConfig, Coupling, sensitivity_curve

__all__ = [
    "__version__",
    "CONSTANTS",
    "PB207_GAMMA",
    "PROTON_GAMMA",
    "SpinEnsemble",
    "loaded_state",
    "magnetization",
    "spin_noise_psd",
    "ProbeCircuit",
    "tune",
    "tuned_probe",
    "NoiseSpectrum",
    "compose_spectrum",
    "AxionSearchConfig",
    "Coupling",
    "sensitivity_curve",
]
