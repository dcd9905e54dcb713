"""Command-line front end.

Precedence for every setting: command-line flag, then config file, then the
built-in default. Exit codes: 0 success, 1 invalid input or configuration,
2 numerical failure. Error lines on stderr start with ``error:``.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as mio
from . import tables
from .config import ConfigError, RunConfig, load_config
from .coupled_modes import transmission_map
from .fitting import FitError, fit_map_crossings, fit_trace_peaks, linewidth_stats
from .model_core import (
    PhotonMode,
    chi_eff,
    cooperativity,
    cooperativity_uncertainty,
    coupling_ratio,
    derived_report,
)
from .sphere_modes import BracketError, QuadratureError, RootCountError, extract_permittivity, solve_modes

NUMERICAL_ERRORS = (FitError, BracketError, RootCountError, QuadratureError,
                    np.linalg.LinAlgError, FloatingPointError, ArithmeticError)


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # report through main() so the message gets the ``error:`` prefix
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _config(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _threads(args, cfg: RunConfig) -> int:
    return args.threads if args.threads is not None else cfg.threads


def _out(args, cfg: RunConfig, required: bool = True) -> Optional[Path]:
    path = args.out or cfg.io.out_path
    if path is None and required:
        raise UsageError("no output path (use --out or io.out_path)")
    return Path(path) if path else None


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    cfg = _config(args)
    if cfg.system is None or cfg.sweep is None:
        raise UsageError("simulate needs the system and sweep sections")
    out = _out(args, cfg)
    system = cfg.system.build()
    b_axis, f_axis = cfg.sweep.axes()
    seed = args.seed if args.seed is not None else cfg.sweep.seed
    t0 = time.perf_counter()
    tmap = transmission_map(system, b_axis, f_axis, noise=cfg.sweep.noise_amplitude,
                            seed=seed, threads=_threads(args, cfg))
    mio.write_map(out, tmap)
    wall = time.perf_counter() - t0
    _emit(f"grid {b_axis.size} x {f_axis.size} (field x frequency) written to {out}")
    _emit(f"wall time {wall:.3f} s")
    return 0


def _magnon_width_for(cfg: RunConfig, system, k: int) -> Optional[float]:
    if cfg.fit.gamma_mag_half_hz is not None:
        return cfg.fit.gamma_mag_half_hz
    if system is None:
        return None
    # the branch this photon couples to most strongly
    j = int(np.argmax(system.g[k])) if system.g[k].any() else 0
    return system.magnons[j].gamma_half


def fit_report(cfg: RunConfig, tmap) -> dict:
    system = cfg.system.build() if cfg.system is not None else None
    expected = [(p.label, p.omega) for p in system.photons] if system is not None else None
    res = fit_map_crossings(
        tmap,
        min_prominence=cfg.fit.min_prominence_db,
        side=cfg.fit.side,
        slope_seed=cfg.fit.slope_seed_hz_per_tesla,
        offset_seed=cfg.fit.offset_seed_hz,
        fixed=cfg.fit.fixed(),
        refine=cfg.fit.refine,
        min_other_points=cfg.fit.min_magnon_points,
        expected=expected,
    )
    modes = []
    for fit, label in zip(res.fits, res.labels):
        entry = {"label": label, "crossing": fit.to_dict()}
        derived = {"g_half_split": fit.g, "coupling_ratio": coupling_ratio(fit.g, fit.omega_c),
                   "cooperativity": None, "chi_eff": None, "filling_factor": None}
        if label is not None and system is not None:
            k = [p.label for p in system.photons].index(label)
            photon = system.photons[k]
            xi = cfg.system.filling_factors.get(label)
            gm = _magnon_width_for(cfg, system, k)
            # ratios use the fitted photon frequency, widths come from the config
            rep = derived_report(PhotonMode(label, fit.omega_c, photon.gamma_half), fit.g, gm, xi)
            derived = {"g_half_split": rep.g_half_split, "coupling_ratio": rep.coupling_ratio,
                       "cooperativity": rep.cooperativity, "chi_eff": rep.chi_eff,
                       "filling_factor": rep.filling_factor}
        entry["derived"] = derived
        modes.append(entry)
    return {"modes": modes, "failures": res.failures, "rejected": res.rejected,
            "n_ridges": res.n_ridges, "side": cfg.fit.side}


def cmd_fit(args) -> int:
    cfg = _config(args)
    path = args.map or cfg.io.map_path
    if path is None:
        raise UsageError("no map file (positional argument or io.map_path)")
    tmap = mio.read_map(path)
    report = fit_report(cfg, tmap)
    out = _out(args, cfg, required=False)
    if out is None:
        _emit(mio.dumps_report(report))
    else:
        mio.write_report(out, report)
    for m in report["modes"]:
        c = m["crossing"]["params"]
        _emit(f"mode {m['label'] or '?'}: omega_c={c['omega_c']['value']:.6e} Hz "
              f"g={c['g']['value']:.6e} Hz")
    for f in report["failures"]:
        print(f"error: fit near {f['omega_c_seed']:.6e} Hz failed: {f['error']}", file=sys.stderr)
    return 0


def cmd_modes(args) -> int:
    cfg = _config(args)
    sp = cfg.sphere
    modes = solve_modes(sp.eps_r, sp.radius_m, (sp.f_min_hz, sp.f_max_hz), sp.ell_max,
                        families=tuple(sp.families), q_min=sp.q_min)
    out = _out(args, cfg, required=False)
    if out is not None:
        mio.write_modes_csv(out, modes)
    for m in modes:
        _emit(f"{m.id.family}{m.id.ell} q={m.id.q}: {m.freq:.6e} Hz  Q={m.q_rad:.4g}")
    return 0


def cmd_epsilon(args) -> int:
    cfg = _config(args)
    sp = cfg.sphere
    f_meas = args.f_meas if args.f_meas is not None else sp.f_meas_hz
    if f_meas is None:
        raise UsageError("no measured frequency (positional argument or sphere.f_meas_hz)")
    if not f_meas > 0:
        raise UsageError("measured frequency must be positive")
    mode = (sp.mode.family, sp.mode.ell, sp.mode.q)
    fit = extract_permittivity(f_meas, mode, sp.radius_m, (sp.eps_min, sp.eps_max),
                               radius_tol=sp.radius_tol_m)
    report = {"epsilon": fit.epsilon, "uncertainty": fit.uncertainty,
              "mode": {"family": fit.family, "ell": fit.ell, "q": fit.q},
              "f_meas_hz": fit.f_meas, "radius_m": fit.radius,
              "delta_f_curve": [{"epsilon": e, "delta_f_hz": d} for e, d in fit.delta_f_curve]}
    out = _out(args, cfg, required=False)
    if out is None:
        _emit(mio.dumps_report(report))
    else:
        mio.write_report(out, report)
        mio.write_delta_f_csv(out.with_name(out.stem + "_delta_f.csv"), fit.delta_f_curve)
    _emit(f"epsilon {fit.epsilon:.6f} +/- {fit.uncertainty:.2e}")
    return 0


def cmd_fano(args) -> int:
    cfg = _config(args)
    path = args.trace or cfg.io.trace_path
    if path is None:
        raise UsageError("no trace file (positional argument or io.trace_path)")
    freq, db = mio.read_trace_csv(path)
    fs = cfg.fit.fano
    fits, failures = fit_trace_peaks(freq, db, fs.min_prominence_db, fs.window_widths, fs.power)
    report = {"fits": [f.to_dict() | {"peak_freq_hz": f.extra.get("peak_freq")} for f in fits],
              "failures": failures, "linewidth_mean_hz": None, "linewidth_sd_hz": None}
    if len(fits) >= 2:
        report["linewidth_mean_hz"], report["linewidth_sd_hz"] = linewidth_stats(fits)
    out = _out(args, cfg, required=False)
    if out is None:
        _emit(mio.dumps_report(report))
    else:
        mio.write_report(out, report)
    _emit(f"{len(fits)} peaks fitted, {len(failures)} failed")
    if report["linewidth_mean_hz"] is not None:
        _emit(f"linewidth {report['linewidth_mean_hz']:.6e} +/- {report['linewidth_sd_hz']:.6e} Hz")
    for f in failures:
        print(f"error: peak at {f['peak_freq']:.6e} Hz: {f['error']}", file=sys.stderr)
    return 0


REPORT_COLUMNS = ("label", "freq_hz", "g_hz", "cooperativity", "cooperativity_err",
                  "coupling_ratio", "chi_eff", "filling_factor")


def measured_rows() -> list[dict]:
    """Derived quantities recomputed from the measured table (half-width convention)."""
    gm = tables.MAGNON_WIDTH_OVER_PI_HZ / 2
    gm_sd = tables.MAGNON_WIDTH_SD_OVER_PI_HZ / 2
    rows = []
    for r in tables.TABLE:
        g = r.g_over_pi_hz / 2
        gc = r.width_over_pi_hz / 2
        rows.append({
            "label": r.label,
            "freq_hz": r.freq_hz,
            "g_hz": g,
            "cooperativity": cooperativity(g, gm, gc),
            "cooperativity_err": cooperativity_uncertainty(g, gm, gc, gm_sd),
            "coupling_ratio": coupling_ratio(g, r.freq_hz),
            "chi_eff": chi_eff(g, r.freq_hz, r.filling_factor),
            "filling_factor": r.filling_factor,
        })
    return rows


def report_rows(report: dict) -> list[dict]:
    rows = []
    for m in report.get("modes", []):
        p, d = m["crossing"]["params"], m["derived"]
        rows.append({"label": m["label"], "freq_hz": p["omega_c"]["value"], "g_hz": p["g"]["value"],
                     "cooperativity": d.get("cooperativity"), "cooperativity_err": None,
                     "coupling_ratio": d.get("coupling_ratio"), "chi_eff": d.get("chi_eff"),
                     "filling_factor": d.get("filling_factor")})
    return rows


def cmd_report(args) -> int:
    cfg = _config(args)
    src = args.report or cfg.io.report_path
    rows = report_rows(mio.read_report(src)) if src else measured_rows()
    out = _out(args, cfg, required=False)
    table = [[row[c] for c in REPORT_COLUMNS] for row in rows]
    if out is not None:
        mio.write_table_csv(out, REPORT_COLUMNS, ([("" if v is None else v) for v in r] for r in table))
    _emit(" ".join(f"{c:>16}" for c in REPORT_COLUMNS))
    for r in table:
        _emit(" ".join(f"{'-':>16}" if v is None else (f"{v:>16.6g}" if isinstance(v, float) else f"{str(v):>16}")
                       for v in r))
    return 0


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--out", help="output file (overrides io.out_path)")
    common.add_argument("--seed", type=_u64, help="noise seed (overrides sweep.seed)")
    common.add_argument("--threads", type=_positive_int, help="worker threads (overrides threads)")

    parser = _Parser(prog="magpol", description="Photon-magnon sphere toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("simulate", parents=[common], help="write a transmission map")
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("fit", parents=[common], help="fit avoided crossings in a map")
    p.add_argument("map", nargs="?", help="map file (CSV or binary)")
    p.set_defaults(func=cmd_fit)
    p = sub.add_parser("modes", parents=[common], help="solve dielectric-sphere modes")
    p.set_defaults(func=cmd_modes)
    p = sub.add_parser("epsilon", parents=[common], help="permittivity from a mode frequency")
    p.add_argument("f_meas", nargs="?", type=float, help="measured frequency in Hz")
    p.set_defaults(func=cmd_epsilon)
    p = sub.add_parser("fano", parents=[common], help="Fano fits of every peak in a trace")
    p.add_argument("trace", nargs="?", help="trace CSV with header f_hz,s21_db")
    p.set_defaults(func=cmd_fano)
    p = sub.add_parser("report", parents=[common], help="derived-quantity table")
    p.add_argument("report", nargs="?", help="fit report; omit for the measured table")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # --help
            return 0 if exc.code in (0, None) else 1
        return args.func(args)
    except ConfigError as exc:
        for loc, msg in exc.issues:
            print(f"error: {loc}: {msg}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 2
    except (UsageError, mio.FormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
