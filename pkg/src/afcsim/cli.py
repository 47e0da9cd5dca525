"""Experiment runner: TOML configs in, tables and manifests out.

Configs are TOML with dotted sections; every physical quantity is SI with
the unit spelled in the key name (…_s, …_hz, …_w, …_m2), which keeps the
rad/s-vs-Hz trap out of the config layer entirely.  Each run writes CSV data
files (UTF-8, LF, # headers), a summary.txt with the headline numbers and a
manifest.json echoing the fully resolved config plus sha256 checksums of
every data file.  Timestamps appear only in the manifest, so a repeated
run with the same config and seed is byte-identical file for file.

Exit codes: 0 success, 2 bad config, 3 numerical invariant violated,
4 analysis came up empty (no echo / not a comb).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python 3.10
    import tomli as tomllib

from . import analysis, bloch, device, memory
from .device import DeviceModel, rabi_cyclic_hz
from .errors import ConfigError, NoEchoError, NotACombError, NumericsError
from .sequences import (BurnConfig, afc_burn_sequence, aom_filter,
                        burn_spectrum, envelope, probe_pulse, save_sequence,
                        save_spectrum, save_trace)
from .spectral import IonParameters, flat_profile, make_grid, save_profile

OUTPUT_ROOT_ENV = "AFCSIM_OUTPUT_ROOT"
EXPERIMENTS = ("burn_and_probe", "store_recall", "echo_decay", "rabi_scan",
               "spectrum", "efficiency_sweep")
_FMT = "%.17g"

# Zero means "choose automatically" for the keys annotated below.
_DEFAULTS: dict[str, object] = {
    "seed": 0,
    "output_dir": "",
    "grid.center_hz": 0.0,
    "ions.t2_s": 700e-9,
    "ions.t1_s": 1e-4,
    "medium.od": 1.0,
    "device.mode_area_m2": device.MODE_AREA_M2,
    "device.length_m": device.WAVEGUIDE_LENGTH_M,
    "device.coupling_in": device.COUPLING,
    "device.coupling_out": device.COUPLING,
    "device.rabi_anchor_power_w": device.RABI_ANCHOR_POWER_W,
    "device.rabi_anchor_rad_s": device.RABI_ANCHOR_RAD_S,
    "burn.pair_separation_s": 130e-9,
    "burn.pulse_duration_s": 10e-9,
    "burn.n_pairs": 150,
    "burn.pair_wait_s": 3e-6,
    "burn.peak_power_w": 1e-6,
    "burn.target_contrast": 0.23,
    "burn.hole_depth_cap": 1.0,
    "burn.aom_bandwidth_hz": 50e6,
    "probe.duration_s": 10e-9,
    "probe.carrier_offset_hz": 0.0,
    "storage.times_s": [90e-9, 130e-9, 250e-9],
    "echo.t1_s": 2e-9,
    "echo.t2_s": 4e-9,
    "echo.tau_s": 300e-9,
    "echo.tau_start_s": 150e-9,
    "echo.tau_stop_s": 600e-9,
    "echo.tau_points": 10,
    "echo.omega_rad_s": 0.0,  # 0: pi/2 area on the first pulse (rabi_scan: from drive power)
    "rabi.power_w": 1e-6,     # drive power in the waveguide for rabi_scan
    "rabi.t2_start_s": 10e-9,
    "rabi.t2_stop_s": 200e-9,
    "rabi.t2_step_s": 5e-9,
    "bloch.bandwidth_hz": 220e6,
    "bloch.n_classes": 401,
    "bloch.dt_s": 0.0,        # 0: automatic step selection
}
_REQUIRED = ("experiment", "grid.span_hz", "grid.n_points")
_INT_KEYS = {"grid.n_points", "burn.n_pairs", "seed", "bloch.n_classes",
             "echo.tau_points"}
_STR_KEYS = {"experiment", "output_dir"}
_LIST_KEYS = {"storage.times_s"}


# --- config handling ---------------------------------------------------------

def _flatten(tree: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in tree.items():
        key = prefix + str(k)
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def resolve_config(flat: dict) -> tuple[dict, frozenset]:
    """Validate user keys, apply defaults, coerce types.

    Returns the resolved config and the set of keys the user actually set
    (experiments pick context-dependent defaults only for unset keys).
    """
    known = set(_DEFAULTS) | set(_REQUIRED)
    for k in flat:
        if k not in known:
            raise ConfigError(f"unknown config key: {k}")
    for k in _REQUIRED:
        if k not in flat:
            raise ConfigError(f"missing required config key: {k}")
    cfg = dict(_DEFAULTS)
    cfg.update(flat)
    for k, v in cfg.items():
        if k in _STR_KEYS:
            if not isinstance(v, str):
                raise ConfigError(f"{k} must be a string")
        elif k in _LIST_KEYS:
            ok = (isinstance(v, (list, tuple)) and len(v) > 0 and
                  all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v))
            if not ok:
                raise ConfigError(f"{k} must be a non-empty list of numbers")
            cfg[k] = [float(x) for x in v]
        elif k in _INT_KEYS:
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"{k} must be an integer")
        else:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{k} must be a number")
            cfg[k] = float(v)
    if cfg["experiment"] not in EXPERIMENTS:
        raise ConfigError("experiment must be one of " + ", ".join(EXPERIMENTS)
                          + f"; got {cfg['experiment']!r}")
    return cfg, frozenset(flat)


def load_config(path) -> tuple[dict, frozenset]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        with open(p, "rb") as fh:
            tree = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config does not parse: {exc}") from None
    return resolve_config(_flatten(tree))


def _grid(cfg):
    return make_grid(cfg["grid.span_hz"], cfg["grid.n_points"], cfg["grid.center_hz"])


def _ions(cfg):
    return IonParameters(t2_s=cfg["ions.t2_s"], t1_s=cfg["ions.t1_s"])


def _device(cfg):
    return DeviceModel(mode_area_m2=cfg["device.mode_area_m2"],
                       length_m=cfg["device.length_m"],
                       coupling_in=cfg["device.coupling_in"],
                       coupling_out=cfg["device.coupling_out"],
                       rabi_anchor_power_w=cfg["device.rabi_anchor_power_w"],
                       rabi_anchor_rad_s=cfg["device.rabi_anchor_rad_s"])


def _burn_config(cfg) -> BurnConfig:
    return BurnConfig(pair_separation_s=cfg["burn.pair_separation_s"],
                      pulse_duration_s=cfg["burn.pulse_duration_s"],
                      n_pairs=cfg["burn.n_pairs"],
                      pair_wait_s=cfg["burn.pair_wait_s"],
                      peak_power_w=cfg["burn.peak_power_w"])


def _write_table(path: Path, comments: list[str], names: list[str], columns) -> None:
    cols = [np.asarray(c, dtype=np.float64) for c in columns]
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(names))
    for row in zip(*cols):
        lines.append(",".join(_FMT % x for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


# --- experiments --------------------------------------------------------------

def _drive_spectrum(cfg, grid, ions):
    """Comb-writing drive as the ions see it: pair spectrum, AOM passband,
    homogeneous-linewidth smoothing."""
    spec = burn_spectrum(_burn_config(cfg), grid)
    if cfg["burn.aom_bandwidth_hz"] > 0:
        spec = aom_filter(spec, cfg["burn.aom_bandwidth_hz"])
    return memory.ion_response_spectrum(spec, ions)


def _run_burn_and_probe(cfg, user_keys, out: Path):
    grid, ions, dev = _grid(cfg), _ions(cfg), _device(cfg)
    profile = flat_profile(grid, cfg["medium.od"], dev.length_m)
    drive = _drive_spectrum(cfg, grid, ions)
    model = memory.calibrate_burn(profile, drive, cfg["burn.target_contrast"],
                                  cfg["burn.hole_depth_cap"])
    burned = memory.burn(profile, drive, model)
    det = grid.detunings
    measured = memory.probe_scan(burned, ions, det)
    spacing_nom = 1.0 / cfg["burn.pair_separation_s"]
    comb = analysis.analyze_comb(det, measured,
                                 (-2.6 * spacing_nom, 2.6 * spacing_nom))
    save_profile(burned, out / "profile.csv")
    _write_table(out / "probe_od.csv",
                 ["probe-measured optical depth of the burned profile"],
                 ["detuning_hz", "od"], [det, measured])
    metrics = {"kappa": model.kappa, "spacing_hz": comb.spacing_hz,
               "expected_spacing_hz": spacing_nom, "finesse": comb.finesse,
               "od_contrast": comb.od_contrast,
               "background_od": comb.background_od, "n_teeth": comb.n_teeth}
    lines = [f"comb spacing: {comb.spacing_hz:.6g} Hz (programmed 1/T = {spacing_nom:.6g} Hz)",
             f"finesse: {comb.finesse:.4g}",
             f"OD contrast: {comb.od_contrast:.4g} (target {cfg['burn.target_contrast']:.4g})",
             f"background OD: {comb.background_od:.4g}",
             f"calibrated burn kappa: {model.kappa:.6g}"]
    return metrics, lines


def _run_store_recall(cfg, user_keys, out: Path):
    grid, ions, dev = _grid(cfg), _ions(cfg), _device(cfg)
    profile = flat_profile(grid, cfg["medium.od"], dev.length_m)
    times = cfg["storage.times_s"]

    def drive_for(t_storage):
        sub = dict(cfg)
        sub["burn.pair_separation_s"] = float(t_storage)
        return _drive_spectrum(sub, grid, ions)

    # one kappa for the whole sweep, calibrated at the first storage time;
    # mirrors running the experiment at fixed burn power
    model = memory.calibrate_burn(profile, drive_for(times[0]),
                                  cfg["burn.target_contrast"],
                                  cfg["burn.hole_depth_cap"])
    probe = envelope(probe_pulse(cfg["probe.duration_s"],
                                 cfg["probe.carrier_offset_hz"]),
                     cfg["probe.duration_s"] / 10)
    save_trace(probe, out / "input.csv")
    rows = []
    lines = []
    for i, t_storage in enumerate(times):
        burned = memory.burn(profile, drive_for(t_storage), model)
        res = memory.store_recall(burned, ions, probe,
                                  expected_delay_hint_s=t_storage)
        save_trace(res.output, out / f"output_{i:02d}.csv")
        rows.append((t_storage, res.echo_time_s, res.efficiency,
                     res.transmitted_fraction))
        lines.append(f"T = {t_storage * 1e9:.4g} ns: echo at "
                     f"{res.echo_time_s * 1e9:.4g} ns, efficiency "
                     f"{res.efficiency:.4e}, transmitted {res.transmitted_fraction:.4g}")
    if not any(np.isfinite(r[1]) and r[2] > 0 for r in rows):
        raise NoEchoError("no echo detected at any configured storage time")
    _write_table(out / "echoes.csv",
                 ["one row per programmed storage time"],
                 ["storage_time_s", "echo_time_s", "efficiency", "transmitted_fraction"],
                 list(zip(*rows)))
    metrics = {"kappa": model.kappa, "echo_time_first_s": rows[0][1],
               "efficiency_first": rows[0][2], "efficiency_last": rows[-1][2],
               "transmitted_first": rows[0][3]}
    return metrics, lines


def _run_echo_decay(cfg, user_keys, out: Path):
    ions = _ions(cfg)
    t1 = cfg["echo.t1_s"]
    t2 = cfg["echo.t2_s"]
    omega = cfg["echo.omega_rad_s"] or 0.5 * math.pi / t1
    cfg["echo.omega_rad_s"] = omega
    taus = np.linspace(cfg["echo.tau_start_s"], cfg["echo.tau_stop_s"],
                       cfg["echo.tau_points"])
    scan = bloch.tau_scan(t1, t2, taus, omega, ions, cfg["bloch.bandwidth_hz"],
                          cfg["bloch.n_classes"], cfg["bloch.dt_s"] or None)
    fit = analysis.fit_exponential(scan.scan_values_s, scan.echo_amplitude)
    _write_table(out / "decay.csv",
                 ["two-pulse echo vs pulse delay tau"],
                 ["tau_s", "echo_intensity", "echo_amplitude"],
                 [taus, scan.echo_intensity, scan.echo_amplitude])
    metrics = {"decay_constant_s": fit.decay_constant,
               "t2_fit_s": 2.0 * fit.decay_constant,
               "decay_std_error_s": fit.std_error,
               "omega_rad_s": omega, "omega_cyclic_hz": rabi_cyclic_hz(omega)}
    lines = [f"drive Rabi frequency: {omega:.6g} rad/s ({rabi_cyclic_hz(omega):.6g} Hz cyclic)",
             f"echo amplitude decay constant: {fit.decay_constant * 1e9:.4g} ns "
             f"(+/- {fit.std_error * 1e9:.2g} ns)",
             f"inferred T2 = 2 x decay constant: {2 * fit.decay_constant * 1e9:.4g} ns "
             f"(configured {ions.t2_s * 1e9:.4g} ns)"]
    return metrics, lines


def _run_rabi_scan(cfg, user_keys, out: Path):
    ions, dev = _ions(cfg), _device(cfg)
    omega = cfg["echo.omega_rad_s"] or dev.rabi_from_power(cfg["rabi.power_w"])
    cfg["echo.omega_rad_s"] = omega
    if "echo.t1_s" in user_keys:
        t1 = cfg["echo.t1_s"]
    else:
        t1 = 0.5 * math.pi / omega  # pi/2 area preparation pulse
        cfg["echo.t1_s"] = t1
    if "echo.t2_s" in user_keys:
        t2_values = np.array([cfg["echo.t2_s"]])  # single point, sweep-friendly
    else:
        t2_values = np.arange(cfg["rabi.t2_start_s"],
                              cfg["rabi.t2_stop_s"] + 0.5 * cfg["rabi.t2_step_s"],
                              cfg["rabi.t2_step_s"])
    scan = bloch.rabi_scan(t1, t2_values, cfg["echo.tau_s"], omega, ions,
                           cfg["bloch.bandwidth_hz"], cfg["bloch.n_classes"],
                           cfg["bloch.dt_s"] or None)
    k = int(np.argmax(scan.echo_intensity))
    _write_table(out / "rabi.csv",
                 ["echo intensity vs second-pulse duration"],
                 ["t2_s", "echo_intensity"],
                 [scan.scan_values_s, scan.echo_intensity])
    metrics = {"omega_rad_s": omega, "omega_cyclic_hz": rabi_cyclic_hz(omega),
               "peak_t2_s": float(scan.scan_values_s[k]),
               "peak_intensity": float(scan.echo_intensity[k]),
               "pi_duration_s": math.pi / omega}
    lines = [f"drive Rabi frequency: {omega:.6g} rad/s ({rabi_cyclic_hz(omega):.6g} Hz cyclic)",
             f"echo intensity peaks at t2 = {metrics['peak_t2_s'] * 1e9:.4g} ns "
             f"(pi area at {metrics['pi_duration_s'] * 1e9:.4g} ns)"]
    return metrics, lines


def _run_spectrum(cfg, user_keys, out: Path):
    grid, dev = _grid(cfg), _device(cfg)
    cfgb = _burn_config(cfg)
    omega = dev.rabi_from_power(dev.in_waveguide_power(cfgb.peak_power_w))
    seq = afc_burn_sequence(cfgb, omega, phase_seed=cfg["seed"])
    spec = burn_spectrum(cfgb, grid, peak_rabi_rad_s=omega)
    if cfg["burn.aom_bandwidth_hz"] > 0:
        spec = aom_filter(spec, cfg["burn.aom_bandwidth_hz"])
    fringe = analysis.fringe_spacing(grid.detunings, spec.power)
    save_sequence(seq, out / "sequence.csv")
    save_spectrum(spec, out / "spectrum.csv")
    expected = 1.0 / cfgb.pair_separation_s
    metrics = {"fringe_spacing_hz": fringe, "expected_spacing_hz": expected,
               "omega_rad_s": omega, "omega_cyclic_hz": rabi_cyclic_hz(omega),
               "n_pulses": 2 * cfgb.n_pairs}
    lines = [f"burn drive Rabi frequency: {omega:.6g} rad/s ({rabi_cyclic_hz(omega):.6g} Hz cyclic)",
             f"fringe spacing: {fringe:.6g} Hz (programmed 1/T = {expected:.6g} Hz)"]
    return metrics, lines


def _run_efficiency_sweep(cfg, user_keys, out: Path):
    grid, ions, dev = _grid(cfg), _ions(cfg), _device(cfg)
    profile = flat_profile(grid, cfg["medium.od"], dev.length_m)
    points = analysis.efficiency_vs_storage(
        cfg["storage.times_s"], _burn_config(cfg), profile, ions,
        cfg["burn.target_contrast"], cfg["burn.hole_depth_cap"],
        cfg["probe.duration_s"], cfg["burn.aom_bandwidth_hz"])
    _write_table(out / "efficiency.csv",
                 ["recall efficiency and comb metrics vs storage time"],
                 ["storage_time_s", "efficiency", "finesse", "od_contrast"],
                 [[p.storage_time_s for p in points],
                  [p.efficiency for p in points],
                  [p.finesse for p in points],
                  [p.od_contrast for p in points]])
    lines = [f"T = {p.storage_time_s * 1e9:.4g} ns: efficiency {p.efficiency:.4e}, "
             f"finesse {p.finesse:.4g}, contrast {p.od_contrast:.4g}"
             for p in points]
    metrics = {"efficiency_first": points[0].efficiency,
               "efficiency_last": points[-1].efficiency,
               "finesse_first": points[0].finesse,
               "finesse_last": points[-1].finesse}
    return metrics, lines


_RUNNERS = {"burn_and_probe": _run_burn_and_probe,
            "store_recall": _run_store_recall,
            "echo_decay": _run_echo_decay,
            "rabi_scan": _run_rabi_scan,
            "spectrum": _run_spectrum,
            "efficiency_sweep": _run_efficiency_sweep}


# --- runner ------------------------------------------------------------------

def _output_dir(cfg, override: str | None) -> Path:
    chosen = override or cfg["output_dir"] or os.path.join("runs", cfg["experiment"])
    path = Path(chosen)
    if not path.is_absolute():
        root = os.environ.get(OUTPUT_ROOT_ENV)
        if root:
            path = Path(root) / path
    return path


def run_experiment(cfg: dict, user_keys: frozenset, outdir: Path) -> dict:
    """Execute one experiment, write data files, summary and manifest."""
    outdir.mkdir(parents=True, exist_ok=True)
    metrics, lines = _RUNNERS[cfg["experiment"]](cfg, user_keys, outdir)
    summary = [f"experiment: {cfg['experiment']}", *lines]
    (outdir / "summary.txt").write_text("\n".join(summary) + "\n",
                                        encoding="utf-8", newline="\n")
    checksums = {}
    for item in sorted(outdir.iterdir()):
        if item.is_file() and item.name != "manifest.json":
            checksums[item.name] = hashlib.sha256(item.read_bytes()).hexdigest()
    manifest = {"experiment": cfg["experiment"],
                "config": {k: cfg[k] for k in sorted(cfg)},
                "files": checksums,
                "created_utc": datetime.now(timezone.utc).isoformat()}
    (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True,
                                                     indent=2) + "\n",
                                          encoding="utf-8", newline="\n")
    return metrics


def run_sweep(cfg: dict, user_keys: frozenset, param: str, values, outdir: Path) -> None:
    """Re-run the experiment once per value of one numeric config key.

    Each point lands in its own subdirectory; the aggregate table collects
    every scalar metric, rows in the order the values were given.
    """
    if param not in set(_DEFAULTS) | set(_REQUIRED) or param in _STR_KEYS \
            or param in _LIST_KEYS:
        raise ConfigError(f"--param must name a numeric config key; got {param!r}")
    outdir.mkdir(parents=True, exist_ok=True)
    names: list[str] | None = None
    rows = []
    for i, value in enumerate(values):
        point = dict(cfg)
        if param in _INT_KEYS:
            if not float(value).is_integer():
                raise ConfigError(f"{param} must be an integer; got {value!r}")
            point[param] = int(value)
        else:
            point[param] = float(value)
        metrics = run_experiment(point, user_keys | {param},
                                 outdir / f"point_{i:03d}")
        scalars = {k: float(v) for k, v in metrics.items()
                   if isinstance(v, (int, float))}
        if names is None:
            names = list(scalars)
        rows.append([float(point[param])] + [scalars.get(k, math.nan) for k in names])
    _write_table(outdir / "sweep.csv",
                 [f"experiment = {cfg['experiment']}", f"swept key = {param}"],
                 [param] + list(names), list(zip(*rows)))
    digest = hashlib.sha256((outdir / "sweep.csv").read_bytes()).hexdigest()
    manifest = {"experiment": cfg["experiment"], "swept_key": param,
                "values": [float(v) for v in values],
                "config": {k: cfg[k] for k in sorted(cfg)},
                "files": {"sweep.csv": digest},
                "created_utc": datetime.now(timezone.utc).isoformat()}
    (outdir / "manifest.json").write_text(json.dumps(manifest, sort_keys=True,
                                                     indent=2) + "\n",
                                          encoding="utf-8", newline="\n")


def _parse_values(raw: list[str]) -> list[float]:
    vals = []
    for chunk in raw:
        for piece in chunk.split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                vals.append(float(piece))
            except ValueError:
                raise ConfigError(f"--values entries must be numbers; got {piece!r}") from None
    if not vals:
        raise ConfigError("--values is empty")
    return vals


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="afcsim",
        description="Frequency-comb optical memory simulator: run configured "
                    "experiments, sweep parameters, validate configs.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a TOML config")
    p_run.add_argument("config")
    p_run.add_argument("--output-dir", default=None,
                       help="write outputs here (overrides config and "
                            f"${OUTPUT_ROOT_ENV})")
    p_sweep = sub.add_parser("sweep", help="repeat an experiment over values "
                                           "of one numeric config key")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True, help="dotted config key")
    p_sweep.add_argument("--values", required=True, nargs="+",
                         help="comma or space separated numbers")
    p_sweep.add_argument("--output-dir", default=None)
    p_val = sub.add_parser("validate", help="parse and validate a config, "
                                            "print the resolved values")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    try:
        cfg, user_keys = load_config(args.config)
        if args.command == "validate":
            for key in sorted(cfg):
                print(f"{key} = {cfg[key]}")
            print("config OK")
            return 0
        outdir = _output_dir(cfg, args.output_dir)
        if args.command == "run":
            metrics = run_experiment(cfg, user_keys, outdir)
            print(f"wrote {outdir}")
            for key, value in metrics.items():
                print(f"{key} = {value:.6g}")
            return 0
        values = _parse_values(args.values)
        run_sweep(cfg, user_keys, args.param, values, outdir)
        print(f"wrote {outdir / 'sweep.csv'}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (NotACombError, NoEchoError) as exc:
        print(f"analysis failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
