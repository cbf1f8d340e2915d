"""Command line entry point: ``chsrp <subcommand>``.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import bench
from .config import ConfigError, load_config, load_scene
from .filters import FilterDesignError, reciprocal_magnitude_curve, zero_frequencies
from .geometry import GeometryError, max_order, named_geometry
from .harmonics import OrderLimitError
from .pipeline import EmptyBandError, FrameConfigError, SampleRateMismatch, read_wav, write_wav
from .simulator import get_preset, synth_time_domain, with_overrides
from .srp import TemporalAverager, argmax_azimuth

log = logging.getLogger("chsrp")

CONFIG_ERRORS = (ConfigError, GeometryError, OrderLimitError, FrameConfigError, EmptyBandError,
                 FilterDesignError, SampleRateMismatch)


def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like f0:f1, got {text!r}") from None


def _add_overrides(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML experiment config")
    p.add_argument("--geometry", help="UCA_S, UCA_L or UCCA")
    p.add_argument("--max-order", type=int)
    p.add_argument("--band", type=_band, help="analysis band f0:f1 in Hz")
    p.add_argument("--method", choices=("minnorm", "tikhonov", "inverse"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--average-window", type=int)
    p.add_argument("--n-frames", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--snr", type=float)


def _experiment(args) -> bench.ExperimentConfig:
    overrides = {
        "geometry": args.geometry,
        "max_order": args.max_order,
        "band_hz": list(args.band) if args.band else None,
        "method": args.method,
        "alpha": args.alpha,
        "grid_step_deg": args.grid_step,
        "average_window": args.average_window,
        "n_frames": args.n_frames,
        "seed": args.seed,
        "snr_db": args.snr,
    }
    cfg = load_config(args.config, overrides)
    if args.geometry and not isinstance(cfg.geometry, str):
        # a --geometry name beats rings from the file
        cfg = replace(cfg, geometry=args.geometry)
    scene = getattr(args, "scene", None)
    if scene:
        cfg = replace(cfg, scene=_scene(scene))
    return cfg


def _scene(name_or_path: str):
    if Path(name_or_path).suffix in (".yaml", ".yml"):
        return load_scene(name_or_path)
    return get_preset(name_or_path)


def cmd_simulate(args) -> int:
    cfg = _experiment(args)
    scene = cfg.scene if not isinstance(cfg.scene, str) else get_preset(cfg.scene)
    scene = with_overrides(scene, duration_s=args.duration, seed=args.seed, snr_db=args.snr)
    est = cfg.localizer().fit()
    audio = synth_time_domain(scene, est.geometry_, est.frame_config_)
    fmt = args.format
    if fmt == "pcm16":
        peak = np.max(np.abs(audio))
        if peak > 1:
            audio = audio * (0.99 / peak)
    write_wav(args.out, audio, cfg.sample_rate, fmt)
    log.info("wrote %s: %d samples x %d channels", args.out, *audio.shape)
    return 0


def cmd_design_filters(args) -> int:
    cfg = _experiment(args)
    est = cfg.localizer().fit()
    bank = est.filter_bank_
    curve = reciprocal_magnitude_curve(bank)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "order", "freq_hz", "ring", "re", "im", "recip_mag"])
        for oi, l in enumerate(bank.orders):
            for b, f in enumerate(bank.freqs):
                for p in range(bank.values.shape[0]):
                    h = bank.values[p, oi, b]
                    w.writerow([bank.method, int(l), f"{f:.6g}", p, f"{h.real:.10g}",
                                f"{h.imag:.10g}", f"{curve[oi, b]:.10g}"])
    return 0


def cmd_localize(args) -> int:
    cfg = _experiment(args)
    est = cfg.localizer().fit()
    audio, _ = read_wav(args.input, expected_rate=cfg.sample_rate)
    if audio.shape[1] != est.geometry_.n_channels:
        raise ConfigError(
            f"{args.input} has {audio.shape[1]} channels, geometry needs {est.geometry_.n_channels}"
        )
    spectra = est.spectra(audio)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame_index", "angle_deg", "power"])
        for s in spectra:
            for a, v in zip(s.angles_deg, s.values):
                w.writerow([s.frame_index, f"{a:g}", f"{v:.10g}"])
    if args.estimates:
        averager = TemporalAverager(cfg.average_window)
        with open(args.estimates, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["estimate_index", "last_frame", "time_s", "azimuth_deg"])
            n = 0
            for s in spectra:
                avg = averager.push(s)
                if avg is None:
                    continue
                t = (avg.frame_index + 1) * est.frame_config_.frame_duration
                w.writerow([n, avg.frame_index, f"{t:.6f}", f"{argmax_azimuth(avg):g}"])
                n += 1
    return 0


def cmd_bench(args) -> int:
    cfg = _experiment(args)
    if args.sweep != "table1":
        report = bench.run_experiment(cfg)
        bench.write_report_csv(args.out, [report])
        return 0
    # the parameter grid is a per-frame analysis unless a window is asked for
    base = cfg if args.average_window is not None else replace(cfg, average_window=1)
    if args.scene is None and (args.config is None or cfg.scene == "near_source"):
        base = replace(base, scene="sweep_table1")
    entries = bench.sweep(bench.table1_configs(base), n_jobs=args.jobs)
    bench.write_report_csv(args.out, entries)
    for e in entries:
        if e.error:
            log.warning("%s L=%d %s: %s", e.config.geometry_name, e.config.max_order,
                        e.config.band, e.error)
    return 0


def cmd_zeros(args) -> int:
    geometry = named_geometry(args.geometry, args.sound_speed)
    L = max_order(geometry) if args.max_order is None else args.max_order
    f0, f1 = args.band
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(out)
        w.writerow(["order", "ring", "radius_m", "freq_hz"])
        for l, p, f in zero_frequencies(geometry, L, f0, f1):
            w.writerow([l, p, geometry.rings[p].radius, f"{f:.3f}"])
    finally:
        if args.out:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chsrp", description="Circular-harmonics SRP azimuth estimation")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="render a scene to a multichannel WAV")
    p.add_argument("--scene", required=True, help="preset name or YAML scene file")
    p.add_argument("--out", required=True)
    p.add_argument("--duration", type=float)
    p.add_argument("--format", choices=("float32", "pcm16"), default="float32")
    _add_overrides(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("design-filters", help="write the compensating filter bank as CSV")
    p.add_argument("--out", required=True)
    _add_overrides(p)
    p.set_defaults(func=cmd_design_filters)

    p = sub.add_parser("localize", help="spatial spectra and azimuths from a WAV file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--estimates")
    _add_overrides(p)
    p.set_defaults(func=cmd_localize)

    p = sub.add_parser("bench", help="run synthetic experiments")
    p.add_argument("--out", required=True)
    p.add_argument("--sweep", choices=("table1",))
    p.add_argument("--scene")
    p.add_argument("--jobs", type=int, default=1)
    _add_overrides(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("zeros", help="list Bessel-zero frequencies per order and ring")
    p.add_argument("--geometry", required=True)
    p.add_argument("--band", type=_band, required=True)
    p.add_argument("--max-order", type=int)
    p.add_argument("--sound-speed", type=float, default=343.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_zeros)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        log.error("configuration error: %s", exc)
        return 1
    except Exception as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
