"""INI run configuration: schema, parsing, validation and presets.

Sections are ``[spins]``, ``[circuit]``, ``[spectrum]``, ``[sensitivity]`` and
``[timeseries]``. Key names carry their SI unit (``lc_henry``,
``theta_s_kelvin``). Unknown sections or keys are errors, and every value is
validated before any computation starts; :class:`ConfigError` names the
offending ``section.key``.
"""

import configparser
import math
import os
from dataclasses import dataclass
from importlib import resources

__all__ = ["ConfigError", "Key", "SCHEMA", "load", "loads", "require", "echo", "preset_names", "preset_text", "describe"]


class ConfigError(ValueError):
    def __init__(self, where, message):
        super().__init__(f"{where}: {message}")
        self.where = where


def _float(s):
    v = float(s)
    if math.isnan(v):
        raise ValueError("NaN is not allowed")
    return v


def _int(s):
    v = float(s)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _bool(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _floats(s):
    return [_float(x) for x in s.replace(";", ",").split(",") if x.strip()]


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _unit(v):
    return 0 <= v <= 1


def _fraction(v):
    return 0 < v <= 1


@dataclass(frozen=True)
class Key:
    parse: object
    unit: str
    help: str
    default: object = None
    check: object = None
    rule: str = ""
    choices: tuple = ()


_POS = dict(check=_positive, rule="must be > 0")
_NONNEG = dict(check=_nonneg, rule="must be >= 0")

SCHEMA = {
    "spins": {
        "species": Key(str, "-", "proton or pb207; sets gamma when gamma_rad_per_s_tesla is absent", "proton", choices=("proton", "pb207")),
        "gamma_rad_per_s_tesla": Key(_float, "rad/(s T)", "gyromagnetic ratio", None, **_POS),
        "spin_i": Key(_float, "-", "nuclear spin quantum number", 0.5, **_POS),
        "density_per_m3": Key(_float, "1/m^3", "spin number density", None, **_POS),
        "theta_s_kelvin": Key(_float, "K", "spin temperature", None, **_POS),
        "t2_intrinsic_s": Key(_float, "s", "intrinsic coherence time T2' (inf allowed)", math.inf, **_POS),
        "broadening_ppm": Key(_float, "ppm", "inhomogeneous FWHM linewidth", 0.0, **_NONNEG),
        "filling_factor": Key(_float, "-", "sample filling factor q in (0, 1]", 1.0, check=_fraction, rule="must lie in (0, 1]"),
        "full_polarization": Key(_bool, "bool", "use saturated magnetization n gamma hbar I", False),
    },
    "circuit": {
        "lc_henry": Key(_float, "H", "coil inductance", None, **_POS),
        "qc": Key(_float, "-", "coil quality factor at fc", None, **_POS),
        "fc_hz": Key(_float, "Hz", "circuit tuning frequency", None, **_POS),
        "ra_ohm": Key(_float, "Ohm", "amplifier input resistance", 50.0, **_POS),
        "theta_c_kelvin": Key(_float, "K", "circuit temperature", 300.0, **_NONNEG),
        "theta_a_kelvin": Key(_float, "K", "amplifier noise temperature", 0.0, **_NONNEG),
        "turns": Key(_int, "-", "coil turns", 1, **_POS),
        "coil_length_m": Key(_float, "m", "coil length", math.nan, **_POS),
        "coil_diameter_m": Key(_float, "m", "coil diameter", math.nan, **_POS),
    },
    "spectrum": {
        "f0_hz": Key(_float, "Hz", "Larmor frequency; sets B0 = 2 pi f0 / gamma", None, **_POS),
        "b0_tesla": Key(_float, "T", "bias field (alternative to f0_hz)", None, **_POS),
        "suppression": Key(_float, "-", "back-action suppression factor in [0, 1]", 1.0, check=_unit, rule="must lie in [0, 1]"),
        "rel_span": Key(_float, "-", "grid half-span relative to the resonances", 0.05, check=lambda v: 0 < v < 1, rule="must lie in (0, 1)"),
        "n_background": Key(_int, "-", "uniform background grid points", 4000, check=lambda v: v >= 2, rule="must be >= 2"),
        "points_per_linewidth": Key(_int, "-", "grid points per resolved linewidth", 20, check=lambda v: v >= 20, rule="must be >= 20"),
    },
    "sensitivity": {
        "coupling": Key(str, "-", "edm or gradient", None, choices=("edm", "gradient")),
        "mass_min_ev": Key(_float, "eV", "lowest axion mass", None, **_POS),
        "mass_max_ev": Key(_float, "eV", "highest axion mass", None, **_POS),
        "n_mass": Key(_int, "-", "log-spaced mass points", 200, check=lambda v: v >= 2, rule="must be >= 2"),
        "radius_m": Key(_float, "m", "sample radius (cylinder height 2 r)", None, **_POS),
        "qc": Key(_float, "-", "circuit quality factor", 1e3, **_POS),
        "suppression": Key(_floats, "-", "back-action suppression, comma-separated list for a sweep", [1.0],
                           check=lambda v: len(v) > 0 and all(0 <= x <= 1 for x in v), rule="values must lie in [0, 1]"),
        "tau_m_s": Key(_float, "s", "measurement time per mass point", 1800.0, **_POS),
        "rho_dm_gev_per_cm3": Key(_float, "GeV/cm^3", "local dark-matter density", 0.4, **_POS),
        "axion_quality": Key(_float, "-", "axion coherence quality factor", 1e6, **_POS),
        "e_star_v_per_m": Key(_float, "V/m", "effective electric field (EDM only)", None, **_POS),
        "velocity_c": Key(_float, "c", "dark-matter virial velocity", 1e-3, **_POS),
        "b0_max_tesla": Key(_float, "T", "largest reachable bias field", 20.0, **_POS),
        "turns": Key(_int, "-", "pickup turns", 1, **_POS),
        "rabi_factor": Key(_float, "-", "Rabi frequency per unit interaction energy / hbar", 0.5, **_POS),
    },
    "timeseries": {
        "seed": Key(_int, "-", "random seed (required for synthesis and Monte Carlo)", None,
                    check=lambda v: 0 <= v < 2**64, rule="must be an unsigned 64-bit integer"),
        "sample_rate_hz": Key(_float, "Hz", "sampling rate", None, **_POS),
        "duration_s": Key(_float, "s", "record duration", None, **_POS),
        "block_duration_s": Key(_float, "s", "analysis block duration tau_b", None, **_POS),
        "spectrum_source": Key(str, "-", "white or model ([spins]/[circuit]/[spectrum] noise budget)", "white", choices=("white", "model")),
        "white_psd_v2_per_hz": Key(_float, "V^2/Hz", "white noise level", 0.0, **_NONNEG),
        "lo_hz": Key(_float, "Hz", "local oscillator subtracted from a model spectrum", 0.0, **_NONNEG),
        "injection_amplitude_v": Key(_float, "V", "injected carrier amplitude", None, **_NONNEG),
        "injection_snr": Key(_float, "-", "set the amplitude for this expected filtered SNR (white noise only)", None, **_POS),
        "injection_carrier_hz": Key(_float, "Hz", "injected carrier frequency", None, **_POS),
        "injection_coherence_s": Key(_float, "s", "amplitude/phase redraw interval", None, **_POS),
        "injection_stochastic": Key(_bool, "bool", "Rayleigh amplitudes (else fixed)", True),
        "bias_amplitude_v": Key(_float, "V", "pulse-bias carrier amplitude", None, **_NONNEG),
        "bias_carrier_hz": Key(_float, "Hz", "pulse-bias carrier frequency", None, **_POS),
        "threshold_sigma": Key(_float, "sigma", "candidate threshold", 5.0, **_POS),
        "window": Key(str, "-", "boxcar or hann", "boxcar", choices=("boxcar", "hann")),
        "line_fwhm_hz": Key(_float, "Hz", "filter lineshape FWHM (default carrier / axion_quality)", None, **_POS),
        "axion_quality": Key(_float, "-", "lineshape quality when line_fwhm_hz is absent", 1e6, **_POS),
        "mc_m1": Key(_float, "-", "signal magnetization (Monte Carlo)", 1.0, **_NONNEG),
        "mc_mp": Key(_float, "-", "bias magnetization (Monte Carlo)", 10.0, **_POS),
        "mc_vn": Key(_float, "V", "rms noise voltage (Monte Carlo)", 1.0, **_POS),
        "mc_alpha": Key(_float, "V per unit M", "transfer coefficient (Monte Carlo)", 1.0, **_POS),
        "mc_regime": Key(str, "-", "random or fixed dark-matter phase", "random", choices=("random", "fixed")),
        "mc_trials": Key(_int, "-", "Monte Carlo samples", 1_000_000, check=lambda v: v >= 1000, rule="must be >= 1000"),
        "mc_phi_rad": Key(_float, "rad", "fixed-regime phase (drawn from seed if absent)", None),
    },
}


def describe(sections=None):
    """Human-readable key list with units, for ``--help``."""
    lines = []
    for sec, keys in SCHEMA.items():
        if sections and sec not in sections:
            continue
        lines.append(f"[{sec}]")
        for name, k in keys.items():
            default = "no default" if k.default is None else f"default {k.default}"
            lines.append(f"  {name:<24} [{k.unit}] {k.help} ({default})")
    return "\n".join(lines)


def preset_names():
    files = resources.files("spinnoise").joinpath("presets").iterdir()
    return sorted(f.name[:-4] for f in files if f.name.endswith(".ini"))


def preset_text(name):
    path = resources.files("spinnoise").joinpath("presets", f"{name}.ini")
    if not path.is_file():
        raise ConfigError(name, f"unknown preset; available: {', '.join(preset_names())}")
    return path.read_text()


def _parse_value(sec, name, raw):
    key = SCHEMA[sec][name]
    where = f"{sec}.{name}"
    try:
        val = key.parse(raw)
    except ValueError as exc:
        raise ConfigError(where, f"cannot parse {raw!r}: {exc}") from None
    if key.choices and val not in key.choices:
        raise ConfigError(where, f"must be one of {', '.join(key.choices)}, got {val!r}")
    if key.check is not None and not key.check(val):
        raise ConfigError(where, f"{key.rule}, got {raw.strip()}")
    return val


def loads(text, overrides=(), source="<string>"):
    """Parse INI text; ``overrides`` are ``section.key=value`` strings applied on top.

    Returns ``{section: {key: value}}`` containing only sections present in
    the input, with defaults filled in for missing keys. Each section dict also
    records which keys were set explicitly under ``"__set__"``.
    """
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(source, f"malformed configuration: {exc}") from None
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(ov, "override must look like section.key=value")
        lhs, val = ov.split("=", 1)
        sec, name = lhs.strip().split(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec, name.strip(), val.strip())
    out = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(sec, f"unknown section; allowed: {', '.join(SCHEMA)}")
        values = {}
        for name, raw in cp.items(sec):
            if name not in SCHEMA[sec]:
                raise ConfigError(f"{sec}.{name}", "unknown key")
            values[name] = _parse_value(sec, name, raw)
        explicit = set(values)
        for name, key in SCHEMA[sec].items():
            values.setdefault(name, key.default)
        values["__set__"] = explicit
        out[sec] = values
    return out


def load(spec, overrides=()):
    """Load a config from a file path or a preset name."""
    if os.path.exists(spec):
        with open(spec) as fh:
            text = fh.read()
        return loads(text, overrides, source=spec), text
    if spec.endswith(".ini") or os.sep in spec:
        raise FileNotFoundError(spec)
    text = preset_text(spec)
    return loads(text, overrides, source=spec), text


def require(cfg, sec, *names):
    """Return the values of ``names`` in ``sec``, raising ConfigError for missing ones."""
    if sec not in cfg:
        raise ConfigError(sec, "section is required for this command")
    vals = []
    for name in names:
        v = cfg[sec][name]
        if v is None:
            raise ConfigError(f"{sec}.{name}", "required key is missing")
        vals.append(v)
    return vals


def echo(cfg):
    """JSON-friendly copy of the parsed configuration (explicit and default values)."""
    return {s: {k: v for k, v in vals.items() if k != "__set__"} for s, vals in cfg.items()}
