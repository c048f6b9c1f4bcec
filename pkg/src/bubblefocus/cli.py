"""Command-line entry point: ``bubblefocus <command> [options]``.

Every command writes its CSV products and a ``manifest.json`` into ``--out``.
On failure a single JSON error record is printed to stderr and the exit code
is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, with_overrides
from .errors import BubbleFocusError, ConfigError, ConfigMismatchError
from .experiments import (
    ExperimentConfig,
    Recordings,
    averaged_profiles,
    build_cloud,
    fwhm,
    green_map,
    native_omega_grid,
    run_forward,
    run_time_reversal,
)
from .products import RunManifest, read_csv, read_manifest, write_csv, write_field_map
from .single_bubble import (
    ScatteringModel,
    Variant,
    minnaert_frequency,
    minnaert_root,
    peak_scattering_arg,
    scattering_fn,
)
from .spectral import TimeSeries, band_indices, to_spectrum

logger = logging.getLogger("bubblefocus")

EXIT_ERROR = 2
EXIT_UNEXPECTED = 1


def parse_range(text: str, default_step: float | None = None) -> np.ndarray:
    """``lo:hi[:step]`` -> inclusive uniform grid."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"range {text!r} is not lo:hi[:step]", field="range")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else default_step
    except ValueError:
        raise ConfigError(f"range {text!r} has a malformed number", field="range") from None
    if step is None or step <= 0 or hi < lo:
        raise ConfigError(f"range {text!r} needs lo <= hi and a positive step", field="range")
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, lo + (n - 1) * step, n)


def parse_band(text: str) -> tuple[float, float]:
    parts = text.split(":")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"band {text!r} is not lo:hi", field="band") from None
    if not 0 < lo < hi:
        raise ConfigError(f"band {text!r} needs 0 < lo < hi", field="band")
    return lo, hi


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    try:
        return with_overrides(cfg, seed=args.seed, threads=args.threads)
    except (BubbleFocusError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _manifest(command: str, cfg: ExperimentConfig) -> RunManifest:
    return RunManifest(command=command, config=cfg.snapshot(), config_hash=cfg.hash(), seed=cfg.seed)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_minnaert(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("minnaert", cfg)
    t = time.perf_counter()
    media, R = cfg.media, cfg.radius
    x_M = minnaert_root(media.delta)
    omega_M = minnaert_frequency(media, R)
    exact = ScatteringModel.from_media(Variant.EXACT, media, R)
    gain = scattering_fn(exact, x_M) / R
    x_0 = peak_scattering_arg(exact)
    m.timings["minnaert"] = time.perf_counter() - t
    path = write_csv(
        out / "minnaert.csv",
        {
            "x_M": (np.array([x_M]), "1"),
            "omega_M": (np.array([omega_M]), "rad/s"),
            "f_M": (np.array([omega_M / (2 * math.pi)]), "Hz"),
            "fs_over_R": (np.array([gain]), "1"),
            "x_0": (np.array([x_0]), "1"),
        },
    )
    m.add_output(path)
    m.results = {
        "x_M": x_M,
        "omega_M": omega_M,
        "fs_over_R": [gain.real, gain.imag],
        "abs_fs_over_R": abs(gain),
        "x_0": x_0,
    }
    m.write(out)
    print(f"x_M        = {x_M:.12g}")
    print(f"omega_M    = {omega_M:.9g} rad/s  ({omega_M / (2 * math.pi):.6g} Hz)")
    print(f"f_s(x_M)/R = {gain.real:.6g} {gain.imag:+.9g}i  (|.| = {abs(gain):.6g})")
    print(f"x_0        = {x_0:.12g}  (x_M - x_0 = {x_M - x_0:.3e})")
    return m.results


def cmd_scatterfn(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("scatterfn", cfg)
    model = ScatteringModel.from_media(args.variant, cfg.media, cfg.radius)
    if args.range is None:
        hi = 0.1 if model.variant is not Variant.SIMPLIFIED else 2 * model.omega_M
        grid = np.linspace(0.0, hi, 1001)
    else:
        grid = parse_range(args.range)
    values = scattering_fn(model, grid)
    unit_arg = "rad/s" if model.variant is Variant.SIMPLIFIED else "1"
    cols = {("omega" if model.variant is Variant.SIMPLIFIED else "x_b"): (grid, unit_arg)}
    if model.variant is Variant.EXACT:
        cols["fs"] = (values, "m")
        cols["fs_over_R"] = (values / cfg.radius, "1")
        tilde = ScatteringModel.from_media(Variant.TILDE, cfg.media, cfg.radius)
        cols["fs_tilde"] = (scattering_fn(tilde, grid), "1")
    else:
        cols["fs"] = (values, "1")
    path = write_csv(out / f"scatterfn_{model.variant.value}.csv", cols)
    m.add_output(path)
    m.results = {"variant": model.variant.value, "points": int(len(grid))}
    m.write(out)
    print(path)
    return m.results


def _write_recordings(out: Path, rec: Recordings) -> Path:
    cols = {"t": (rec.signals.times, "s"), "s": (rec.pulse.samples, "Pa")}
    for j in range(rec.signals.samples.shape[0]):
        cols[f"r{j + 1}"] = (rec.signals.samples[j], "Pa")
    return write_csv(out / "recordings.csv", cols)


def cmd_forward(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("forward", cfg)
    t = time.perf_counter()
    cloud = build_cloud(cfg)
    m.timings["placement"] = time.perf_counter() - t
    rec = run_forward(cfg, cloud)
    m.timings.update(rec.timings)
    m.add_output(_write_recordings(out, rec))
    m.results = {
        "n_bubbles": cloud.n,
        "cloud_fingerprint": cloud.fingerprint(),
        "n_frequencies": int(len(rec.band)),
    }
    m.write(out)
    print(f"{len(rec.band)} frequencies, {cloud.n} bubbles -> {out / 'recordings.csv'}")
    return m.results


def _load_recordings(cfg: ExperimentConfig, src: Path, cloud) -> Recordings:
    manifest = read_manifest(src)
    fingerprint = manifest.get("results", {}).get("cloud_fingerprint")
    if fingerprint != cloud.fingerprint():
        raise ConfigMismatchError(f"recordings in {src} were made with a different bubble cloud")
    cols = read_csv(src / "recordings.csv")
    names = sorted((k for k in cols if k.startswith("r") and k[1:].isdigit()), key=lambda k: int(k[1:]))
    samples = np.vstack([cols[k] for k in names])
    signals = TimeSeries(samples, cfg.dt)
    pulse = TimeSeries(cols["s"], cfg.dt)
    band = band_indices(to_spectrum(pulse), *cfg.band)
    return Recordings(
        signals=signals,
        receivers=np.asarray(cfg.receivers),
        pulse=pulse,
        cloud_fingerprint=fingerprint,
        band=band,
        transfer=np.empty((len(names), 0), dtype=complex),
    )


def cmd_timereverse(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("timereverse", cfg)
    t = time.perf_counter()
    cloud = build_cloud(cfg)
    m.timings["placement"] = time.perf_counter() - t
    if args.recordings:
        rec = _load_recordings(cfg, Path(args.recordings), cloud)
    else:
        rec = run_forward(cfg, cloud)
        m.timings.update(rec.timings)
        m.add_output(_write_recordings(out, rec))
    result = run_time_reversal(cfg, rec, cloud)
    m.timings.update(result.timings)
    s = result.refocused
    m.add_output(write_csv(out / "refocused.csv", {"t": (s.times, "s"), "s_sharp": (s.samples, "Pa")}))
    m.add_output(write_field_map(out / "tr_field.csv", result.field, "Pa"))
    try:
        width = result.focal_width()
    except BubbleFocusError:
        width = None
    m.results = {
        "n_bubbles": cloud.n,
        "cloud_fingerprint": cloud.fingerprint(),
        "peak_time": result.peak_time,
        "expected_time": cfg.duration - cfg.t0,
        "focal_fwhm": width,
    }
    m.write(out)
    print(f"peak of |s#| at t = {result.peak_time:.6f} s (T - t0 = {cfg.duration - cfg.t0:.6f} s)")
    return m.results


def cmd_greenmap(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("greenmap", cfg)
    if args.range is None:
        grid = native_omega_grid(cfg, cfg.green_omega_min, cfg.green_omega_max)
    else:
        grid = parse_range(args.range, default_step=cfg.domega)
    maps = green_map(cfg, grid)
    m.timings.update(maps.timings)
    m.add_output(write_field_map(out / "green_bubbly.csv", maps.bubbly, "1/m"))
    m.add_output(write_field_map(out / "green_free.csv", maps.free, "1/m"))
    m.results = {"omega_M": maps.omega_M, "n_frequencies": int(len(grid)), "n_points": int(len(maps.bubbly.axis1))}
    m.write(out)
    print(f"{len(grid)} frequencies x {len(maps.bubbly.axis1)} points -> {out}")
    return m.results


def cmd_greenavg(args) -> dict:
    cfg = _config(args)
    out = _out_dir(args)
    m = _manifest("greenavg", cfg)
    lo, hi = parse_band(args.band)
    t = time.perf_counter()
    prof = averaged_profiles(cfg, lo, hi)
    m.timings["greenavg"] = time.perf_counter() - t

    def norm(p):
        peak = np.abs(p).max()
        return np.abs(p) / peak if peak > 0 else np.abs(p)

    path = write_csv(
        out / "greenavg.csv",
        {
            "x1": (prof.x, "m"),
            "avgImGm": (prof.bubbly, "1/m"),
            "avgImG": (prof.free, "1/m"),
            "avgImGm_norm": (norm(prof.bubbly), "1"),
            "avgImG_norm": (norm(prof.free), "1"),
        },
    )
    m.add_output(path)
    widths = {}
    for name, p in (("fwhm_bubbly", prof.bubbly), ("fwhm_free", prof.free)):
        try:
            widths[name] = fwhm(prof.x, p)
        except BubbleFocusError:
            widths[name] = None
    m.results = {"band": [lo, hi], "omega_M": prof.omega_M, **widths}
    m.write(out)
    print(f"band [{lo}, {hi}] omega_M: FWHM bubbly = {widths['fwhm_bubbly']}, free = {widths['fwhm_free']}")
    return m.results


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file (SI units)")
    common.add_argument("--seed", type=int, help="bubble placement seed (default 0)")
    common.add_argument("--out", default="out", help="output directory (default ./out)")
    common.add_argument("--threads", type=int, help="frequency-sweep worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bubblefocus", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("minnaert", parents=[common], help="Minnaert root, frequency and resonant gain").set_defaults(
        func=cmd_minnaert
    )
    p = sub.add_parser("scatterfn", parents=[common], help="tabulate a scattering function")
    p.add_argument("--variant", choices=[v.value for v in Variant], default="exact")
    p.add_argument("--range", help="lo:hi:step of the native argument (x_b, or omega for simplified)")
    p.set_defaults(func=cmd_scatterfn)

    sub.add_parser("forward", parents=[common], help="forward pulse experiment").set_defaults(func=cmd_forward)
    p = sub.add_parser("timereverse", parents=[common], help="time-reversal refocusing experiment")
    p.add_argument("--recordings", help="output directory of a previous `forward` run")
    p.set_defaults(func=cmd_timereverse)

    p = sub.add_parser("greenmap", parents=[common], help="Im G_m and Im G over the evaluation line and frequency")
    p.add_argument("--range", help="lo:hi[:step] angular frequencies in rad/s")
    p.set_defaults(func=cmd_greenmap)
    p = sub.add_parser("greenavg", parents=[common], help="frequency-averaged Im G_m and FWHM")
    p.add_argument("--band", default="0.8:0.99", help="lo:hi in units of omega_M (default 0.8:0.99)")
    p.set_defaults(func=cmd_greenavg)
    return parser


def _error_record(exc: BaseException) -> str:
    record = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("field", "line", "omega", "pivot"):
        value = getattr(exc, attr, None)
        if value is not None:
            record[attr] = value
    return json.dumps(record, default=repr)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    try:
        args.func(args)
    except BubbleFocusError as exc:
        print(_error_record(exc), file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - report anything else as a record too
        logger.debug("unexpected failure", exc_info=True)
        print(_error_record(exc), file=sys.stderr)
        return EXIT_UNEXPECTED
    return 0


if __name__ == "__main__":
    sys.exit(main())
