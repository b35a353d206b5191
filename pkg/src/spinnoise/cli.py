"""Command-line front end: ``spinnoise spectrum|sensitivity|timeseries CONFIG``.

CONFIG is an INI file or the name of a bundled preset (``fig2a`` ... ``fig2d``,
``fig4a``, ``fig4b``, ``search``, ``driven``). Every output file gets a
``<name>.meta.json`` sidecar holding the configuration echo, constants and
column units.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure, 4 I/O error.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .circuit import MatchingError, TuningError, tuned_probe
from .config import ConfigError, describe, echo, load, preset_names, require
from .constants import CONSTANTS, PB207_GAMMA, PROTON_GAMMA
from .io import write_csv, write_metadata
from .sensitivity import AxionSearchConfig, Coupling, gev_per_cm3_to_kg_per_m3, suppression_sweep
from .spectra import CSV_COLUMNS, GridResolutionError, compose_spectrum, default_grid
from .spins import SpinEnsemble
from .timeseries import (
    AliasingError,
    Injection,
    PulseBias,
    RecordFormatError,
    SynthesisConfig,
    amplitude_for_snr,
    analyze,
    driven_ensemble_monte_carlo,
    read_record,
    synthesize,
    write_record,
)
from .timeseries.analysis import Lorentzian

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

SENSITIVITY_COLUMNS = (
    "mass_eV",
    "freq_Hz",
    "coupling_limit",
    "t2star_s",
    "back_action_limited",
    "suppression",
    "reachable",
    "required_suppression",
)

_GAMMA = {"proton": PROTON_GAMMA, "pb207": PB207_GAMMA}


# ---------------------------------------------------------------- builders


def _guard(where, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (MatchingError, TuningError):
        raise
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def build_ensemble(cfg):
    require(cfg, "spins", "density_per_m3", "theta_s_kelvin")
    s = cfg["spins"]
    gamma = s["gamma_rad_per_s_tesla"] or _GAMMA[s["species"]]
    return _guard(
        "spins",
        SpinEnsemble,
        gamma=gamma,
        spin_i=s["spin_i"],
        density=s["density_per_m3"],
        theta_s=s["theta_s_kelvin"],
        t2_intrinsic=s["t2_intrinsic_s"],
        inhomogeneous_broadening=s["broadening_ppm"] * 1e-6,
        filling_factor=s["filling_factor"],
        full_polarization=s["full_polarization"],
    )


def build_probe(cfg):
    lc, qc, fc = require(cfg, "circuit", "lc_henry", "qc", "fc_hz")
    c = cfg["circuit"]
    d = c["coil_diameter_m"]
    area = math.pi * d * d / 4 if math.isfinite(d) else math.nan
    return tuned_probe(
        lc,
        qc,
        2 * math.pi * fc,
        c["ra_ohm"],
        theta_c=c["theta_c_kelvin"],
        theta_a=c["theta_a_kelvin"],
        turns=c["turns"],
        area=area,
        length=c["coil_length_m"],
    )


def bias_field(cfg, ens):
    if "spectrum" not in cfg:
        raise ConfigError("spectrum", "section is required for this command")
    sp = cfg["spectrum"]
    if sp["b0_tesla"] is not None and sp["f0_hz"] is not None:
        raise ConfigError("spectrum.b0_tesla", "give either f0_hz or b0_tesla, not both")
    if sp["b0_tesla"] is not None:
        return sp["b0_tesla"]
    (f0,) = require(cfg, "spectrum", "f0_hz")
    return 2 * math.pi * f0 / ens.gamma


def build_spectrum(cfg):
    ens = build_ensemble(cfg)
    pc = build_probe(cfg)
    b0 = bias_field(cfg, ens)
    sp = cfg["spectrum"]
    grid = default_grid(
        ens,
        pc,
        b0,
        sp["suppression"],
        rel_span=sp["rel_span"],
        n_background=sp["n_background"],
        points_per_linewidth=sp["points_per_linewidth"],
    )
    return compose_spectrum(ens, pc, b0, sp["suppression"], grid)


def build_search(cfg, coupling=None):
    ens = build_ensemble(cfg)
    require(cfg, "sensitivity", "mass_min_ev", "mass_max_ev", "radius_m")
    s = cfg["sensitivity"]
    kind = coupling or s["coupling"]
    if kind is None:
        raise ConfigError("sensitivity.coupling", "required key is missing (or pass --coupling)")
    if kind == "edm" and s["e_star_v_per_m"] is None:
        raise ConfigError("sensitivity.e_star_v_per_m", "required for the EDM coupling")
    if not s["mass_max_ev"] > s["mass_min_ev"]:
        raise ConfigError("sensitivity.mass_max_ev", "must exceed mass_min_ev")
    grid = np.geomspace(s["mass_min_ev"], s["mass_max_ev"], s["n_mass"])
    base = _guard(
        "sensitivity",
        AxionSearchConfig,
        coupling=Coupling(kind),
        mass_grid=grid,
        sample=ens,
        radius=s["radius_m"],
        qc=s["qc"],
        suppression=s["suppression"][0],
        tau_m=s["tau_m_s"],
        rho_dm=gev_per_cm3_to_kg_per_m3(s["rho_dm_gev_per_cm3"]),
        axion_quality=s["axion_quality"],
        e_star=s["e_star_v_per_m"] if s["e_star_v_per_m"] is not None else math.nan,
        velocity=s["velocity_c"],
        b0_max=s["b0_max_tesla"],
        turns=s["turns"],
        rabi_factor=s["rabi_factor"],
    )
    return base


def build_synthesis(cfg):
    (seed,) = require(cfg, "timeseries", "seed")
    fs, dur = require(cfg, "timeseries", "sample_rate_hz", "duration_s")
    t = cfg["timeseries"]
    if t["spectrum_source"] == "model":
        spectrum = build_spectrum(cfg)
    else:
        spectrum = t["white_psd_v2_per_hz"]
    injection = None
    if t["injection_amplitude_v"] is not None or t["injection_snr"] is not None:
        carrier, tc = require(cfg, "timeseries", "injection_carrier_hz", "injection_coherence_s")
        if t["injection_amplitude_v"] is not None and t["injection_snr"] is not None:
            raise ConfigError("timeseries.injection_snr", "give either injection_amplitude_v or injection_snr")
        amp = t["injection_amplitude_v"]
        if amp is None:
            if t["spectrum_source"] != "white" or not t["white_psd_v2_per_hz"] > 0:
                raise ConfigError("timeseries.injection_snr", "needs spectrum_source = white with a positive level")
            amp = amplitude_for_snr(t["injection_snr"], t["white_psd_v2_per_hz"], dur, tc)
        injection = Injection(amp, carrier, tc, t["injection_stochastic"])
    bias = None
    if t["bias_amplitude_v"] is not None:
        (bc,) = require(cfg, "timeseries", "bias_carrier_hz")
        bias = PulseBias(t["bias_amplitude_v"], bc)
    block = t["block_duration_s"]
    return _guard(
        "timeseries",
        SynthesisConfig,
        sample_rate=fs,
        duration=dur,
        seed=seed,
        spectrum=spectrum,
        lo_hz=t["lo_hz"],
        injection=injection,
        bias=bias,
        block_size=int(round(block * fs)) if block else None,
    )


def lineshape(cfg):
    t = cfg["timeseries"]
    if t["line_fwhm_hz"] is not None:
        return Lorentzian(t["line_fwhm_hz"])
    if t["injection_carrier_hz"] is not None:
        return Lorentzian(t["injection_carrier_hz"] / t["axion_quality"])
    return None


# ---------------------------------------------------------------- commands


def _meta(args, cfg, text, extra):
    meta = {
        "tool": "spinnoise",
        "version": __version__,
        "command": args.command,
        "config_source": args.config,
        "config": echo(cfg),
        "config_text": text,
        "overrides": list(args.set or []),
        "constants": CONSTANTS.as_dict(),
    }
    meta.update(extra)
    return meta


def cmd_spectrum(args, cfg, text):
    spec = build_spectrum(cfg)
    cols = CSV_COLUMNS
    table = spec.table()
    if args.per_hz:
        table = table.copy()
        table[:, 2:] *= 2 * math.pi
        cols = cols[:2] + tuple(c + "_per_Hz" for c in cols[2:])
    write_csv(args.out, cols, table)
    units = "V^2/Hz" if args.per_hz else "V^2 s/rad (one-sided, per rad/s)"
    write_metadata(
        args.out,
        _meta(
            args,
            cfg,
            text,
            {
                "columns": list(cols),
                "units": {"omega_rad_s": "rad/s", "f_Hz": "Hz", "psd": units},
                "spectrum": spec.metadata,
            },
        ),
    )
    print(f"wrote {args.out} ({spec.omega.size} points)")
    return EXIT_OK


def cmd_sensitivity(args, cfg, text):
    base = build_search(cfg, args.coupling)
    sups = cfg["sensitivity"]["suppression"]
    if args.suppression:
        try:
            sups = [float(x) for x in args.suppression.split(",") if x.strip()]
        except ValueError:
            raise ConfigError("--suppression", f"cannot parse {args.suppression!r}") from None
        if not sups or any(not 0 <= s <= 1 for s in sups):
            raise ConfigError("--suppression", "values must lie in [0, 1]")
    curves = suppression_sweep(base, sups, threads=args.threads)
    rows = []
    for c in curves:
        for i in range(c.mass.size):
            rows.append(
                (
                    c.mass[i],
                    c.frequency[i],
                    c.coupling_limit[i],
                    c.t2_star[i],
                    bool(c.back_action_limited[i]),
                    c.suppression,
                    bool(c.reachable[i]),
                    c.required_suppression[i],
                )
            )
    write_csv(args.out, SENSITIVITY_COLUMNS, rows)
    summary = [
        {
            "suppression": c.suppression,
            "required_suppression_min": c.required_suppression_min,
            "best_coupling_limit": float(np.nanmin(c.coupling_limit)),
            "n_back_action_limited": int(c.back_action_limited.sum()),
        }
        for c in curves
    ]
    write_metadata(
        args.out,
        _meta(
            args,
            cfg,
            text,
            {
                "columns": list(SENSITIVITY_COLUMNS),
                "units": {
                    "mass_eV": "eV",
                    "freq_Hz": "Hz",
                    "coupling_limit": curves[0].units,
                    "t2star_s": "s",
                    "required_suppression": "-",
                },
                "curves": summary,
                "search": base.metadata(),
            },
        ),
    )
    for s in summary:
        print(
            f"suppression={s['suppression']:.3g}  required_suppression={s['required_suppression_min']:.3e}  "
            f"best_limit={s['best_coupling_limit']:.3e} {curves[0].units}"
        )
    print(f"wrote {args.out} ({len(rows)} rows)")
    return EXIT_OK


def _analysis_meta(res):
    meta = dict(res.metadata)
    meta.pop("truth", None)
    return meta


def cmd_timeseries(args, cfg, text):
    if not (args.synthesize or args.analyze or args.montecarlo):
        raise ConfigError("timeseries", "choose --synthesize, --analyze and/or --montecarlo")
    if "timeseries" not in cfg:
        raise ConfigError("timeseries", "section is required for this command")
    t = cfg["timeseries"]
    status = EXIT_OK
    run = None
    if args.synthesize:
        if not args.record:
            raise ConfigError("--record", "an output record path is required with --synthesize")
        scfg = build_synthesis(cfg)
        run = synthesize(scfg, threads=args.threads)
        write_record(args.record, run)
        meta = _meta(args, cfg, text, {"record": run.metadata, "format": "SNLB0001 little-endian float64"})
        write_metadata(args.record, meta)
        print(f"wrote {args.record} ({run.n_samples} samples)")
    if args.analyze:
        (tb,) = require(cfg, "timeseries", "block_duration_s")
        if run is None:
            if not args.record:
                raise ConfigError("--record", "an input record path is required with --analyze")
            run = read_record(args.record)
        if not args.out:
            raise ConfigError("--out", "an output CSV path is required with --analyze")
        res = _guard(
            "timeseries.block_duration_s",
            analyze,
            run,
            tb,
            lineshape=lineshape(cfg),
            threshold=t["threshold_sigma"],
            window=t["window"],
            threads=args.threads,
        )
        res.to_csv(args.out)
        clusters = res.candidate_clusters()
        meta = _meta(
            args,
            cfg,
            text,
            {
                "columns": ["freq_Hz", "psd_avg", "statistic", "is_candidate"],
                "units": {"freq_Hz": "Hz", "psd_avg": "V^2/Hz", "statistic": "-"},
                "analysis": _analysis_meta(res),
                "threshold_sigma": res.threshold,
                "threshold_level": res.threshold_level,
                "candidates": res.candidates,
                "candidate_clusters": clusters,
            },
        )
        write_metadata(args.out, meta)
        print(f"wrote {args.out}: n_blocks={res.n_blocks} candidate_bins={len(res.candidates)} clusters={len(clusters)}")
        for k, s, lo, hi in clusters[:20]:
            z = (s - res.statistic_mean) / res.statistic_std
            print(f"  candidate f={res.freq_hz[k]:.6f} Hz bins {lo}-{hi} significance={z:.2f} sigma")
    if args.montecarlo:
        (seed,) = require(cfg, "timeseries", "seed")
        r = _guard(
            "timeseries",
            driven_ensemble_monte_carlo,
            t["mc_m1"],
            t["mc_mp"],
            t["mc_vn"],
            regime=t["mc_regime"],
            n_trials=t["mc_trials"],
            seed=seed,
            alpha=t["mc_alpha"],
            phi=t["mc_phi_rad"],
        )
        summ = r.summary()
        print(f"snr_ratio = {r.snr_ratio:.4f} +- {r.snr_ratio_err:.4f}")
        print(f"var_ratio = {r.var_ratio:.5f} +- {r.var_ratio_err:.5f}")
        print(f"snr_biased = {r.snr_biased:.5g} +- {r.snr_biased_err:.2g}  snr_unbiased = {r.snr_unbiased:.5g} +- {r.snr_unbiased_err:.2g}")
        if args.out and not args.analyze:
            with open(args.out, "w", newline="\n") as fh:
                json.dump(_meta(args, cfg, text, {"montecarlo": summ}), fh, indent=2, sort_keys=True, default=str)
                fh.write("\n")
            print(f"wrote {args.out}")
    return status


# ---------------------------------------------------------------- parser


def _threads(value):
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return n


def build_parser():
    presets = ", ".join(preset_names())
    p = argparse.ArgumentParser(
        prog="spinnoise",
        description="Spin-projection noise spectra, axion-like dark-matter sensitivity and time-series searches.",
        epilog=f"CONFIG is an INI path or a bundled preset: {presets}.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    fmt = argparse.RawDescriptionHelpFormatter

    def common(sp):
        sp.add_argument("config", help="INI file or preset name")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config value")
        sp.add_argument(
            "--threads",
            type=_threads,
            default=None,
            help="worker threads (default: $SNL_THREADS or 1)",
        )

    s = sub.add_parser(
        "spectrum",
        help="noise spectrum at the amplifier input",
        formatter_class=fmt,
        epilog="configuration keys:\n" + describe(("spins", "circuit", "spectrum")),
    )
    common(s)
    s.add_argument("--out", required=True, help="output CSV")
    s.add_argument("--per-hz", action="store_true", help="write PSD columns in V^2/Hz (x 2 pi), suffixed _per_Hz")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser(
        "sensitivity",
        help="coupling limit versus axion mass",
        formatter_class=fmt,
        epilog="configuration keys:\n" + describe(("spins", "sensitivity")),
    )
    common(s)
    s.add_argument("--coupling", choices=("edm", "gradient"), help="override sensitivity.coupling")
    s.add_argument("--suppression", help="comma-separated suppression factors, one curve each")
    s.add_argument("--out", required=True, help="output CSV")
    s.set_defaults(func=cmd_sensitivity)

    s = sub.add_parser(
        "timeseries",
        help="synthesize / analyze voltage records, driven-ensemble Monte Carlo",
        formatter_class=fmt,
        epilog="configuration keys:\n" + describe(("timeseries", "spins", "circuit", "spectrum")),
    )
    common(s)
    s.add_argument("--synthesize", action="store_true", help="write a binary record to --record")
    s.add_argument("--analyze", action="store_true", help="analyze --record (or the fresh synthesis) into --out")
    s.add_argument("--montecarlo", action="store_true", help="run the driven-ensemble Monte Carlo")
    s.add_argument("--record", help="binary record path")
    s.add_argument("--out", help="analysis CSV (or Monte Carlo JSON)")
    s.set_defaults(func=cmd_timeseries)
    return p


def _resolve_threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("SNL_THREADS")
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise ConfigError("SNL_THREADS", f"expected a positive integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("SNL_THREADS", "must be >= 1")
    return n


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.threads = _resolve_threads(args)
        cfg, text = load(args.config, args.set or ())
        return args.func(args, cfg, text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MatchingError as exc:
        print(f"error: circuit: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RecordFormatError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    except AliasingError as exc:
        print(f"error: timeseries: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TuningError, GridResolutionError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: I/O: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
