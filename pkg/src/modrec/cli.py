"""Command-line front end: sweep, features, classify and calibrate commands."""

from __future__ import annotations

import argparse
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .channel import ChannelConfig, apply_awgn
from .classifier import (ABSTAIN, calibrate, classify, read_threshold_csv,
                         separation_report, table1_thresholds, write_threshold_csv)
from .constellation import (SUPPORTED_ORDERS, FrameMeta, ModulationClass,
                            SignalFrame, build_constellation, draw_symbols)
from .cumulants import FEATURE_LABELS, MIN_SAMPLES, frame_cumulants, log_magnitude
from .errors import CalibrationError, ConfigError, DataFileError, ModrecError
from .harness import (ExperimentConfig, cell_counts, collect_feature_cells,
                      confusion, run_sweep)
from .io import fmt17, parse_angle, parse_config, parse_grid, read_iq, write_manifest

_SCORINGS = ("oracle_or", "plurality")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _resolve_seed(cli_seed, config_seed=None) -> int:
    """Seed precedence: --seed flag, then config, then MODREC_SEED, then 0."""
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return int(config_seed)
    env = os.environ.get("MODREC_SEED")
    if env is not None:
        try:
            return _u64(env)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"MODREC_SEED: {exc}") from exc
    return 0


def _resolve_workers(text: str) -> int:
    if text == "auto":
        return os.cpu_count() or 1
    try:
        workers = int(text)
    except ValueError as exc:
        raise ConfigError(f"--threads must be an integer or 'auto', got {text!r}") from exc
    if workers < 1:
        raise ConfigError("--threads must be >= 1")
    return workers


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _load_thresholds(spec: str):
    return table1_thresholds() if spec == "table1" else read_threshold_csv(spec)


def _channel_from_config(values: dict) -> ChannelConfig:
    kwargs = {}
    if "channel" in values:
        kwargs["kind"] = values["channel"]
    if "symbol_rate" in values:
        kwargs["symbol_rate"] = values["symbol_rate"]
    if "path_delays" in values:
        kwargs["path_delays_s"] = values["path_delays"]
    if "path_gains_db" in values:
        kwargs["path_gains_db"] = values["path_gains_db"]
    if "max_doppler" in values:
        kwargs["max_doppler_hz"] = values["max_doppler"]
    if "rician_k_db" in values:
        kwargs["rician_k_db"] = values["rician_k_db"]
    return ChannelConfig(**kwargs)


def _config_echo(cfg: ExperimentConfig, thresholds_spec: str) -> dict:
    return {
        "classes": [c.order for c in cfg.classes],
        "snr_grid_db": list(cfg.snr_grid_db),
        "n_trials_per_class": cfg.n_trials_per_class,
        "frame_length": cfg.frame_length,
        "phase_offset": cfg.phase_offset,
        "freq_offset": cfg.freq_offset,
        "channel": cfg.channel.kind,
        "symbol_rate": cfg.channel.symbol_rate,
        "path_delays": list(cfg.channel.path_delays_s),
        "path_gains_db": list(cfg.channel.path_gains_db),
        "max_doppler": cfg.channel.max_doppler_hz,
        "rician_k_db": cfg.channel.rician_k_db,
        "thresholds": thresholds_spec,
        "fusion": cfg.fusion,
        "master_seed": cfg.master_seed,
    }


def _write_pcc_csv(path: Path, tset) -> None:
    counts = {scoring: cell_counts(tset, scoring) for scoring in _SCORINGS}
    lines = ["snr_db,scoring,class,n_trials,n_correct,pcc"]
    for snr in tset.config.snr_grid_db:
        for scoring in _SCORINGS:
            for mod in tset.config.classes:
                n, hits = counts[scoring][(float(snr), mod.order)]
                lines.append(f"{fmt17(snr)},{scoring},{mod.order},{n},{hits},{fmt17(hits / n)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_confusion_csv(path: Path, tset, snr_db: float) -> None:
    mat = confusion(tset, snr_db)
    cols = [str(o) for o in tset.config.thresholds.orders] + ["reject"]
    lines = ["true_class," + ",".join(cols)]
    for mod, row in zip(tset.config.classes, mat):
        lines.append(str(mod.order) + "," + ",".join(fmt17(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_frame_length(text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"--n must be an integer or 'exhaustive', got {text!r}") from exc


def cmd_sweep(args) -> int:
    values = {}
    if args.config:
        try:
            values = parse_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {args.config}: {exc}") from exc
    seed = _resolve_seed(args.seed, values.get("master_seed"))
    workers = _resolve_workers(args.threads)
    thresholds_spec = values.get("thresholds", "table1")
    try:
        thresholds = _load_thresholds(thresholds_spec)
        channel = _channel_from_config(values)
        lengths = values.get("frame_length", 4096)
        lengths = list(lengths) if isinstance(lengths, tuple) else [lengths]
        configs = [ExperimentConfig(
            classes=values.get("classes", SUPPORTED_ORDERS),
            snr_grid_db=values.get("snr_grid_db", tuple(float(s) for s in range(-5, 21))),
            n_trials_per_class=values.get("n_trials_per_class", 500),
            frame_length=length,
            phase_offset=values.get("phase_offset", math.pi / 6),
            freq_offset=values.get("freq_offset", 0.0),
            channel=channel,
            thresholds=thresholds,
            fusion=values.get("fusion", "plurality"),
            master_seed=seed,
        ) for length in lengths]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    base = Path(args.out or ".")
    for cfg in configs:
        out_dir = base / f"n{cfg.frame_length}" if len(configs) > 1 else base
        out_dir.mkdir(parents=True, exist_ok=True)
        started = _utc_now()
        tset = run_sweep(cfg, workers)
        outputs = {}
        pcc_path = out_dir / "pcc.csv"
        _write_pcc_csv(pcc_path, tset)
        outputs["pcc.csv"] = pcc_path
        for snr in cfg.snr_grid_db:
            name = f"confusion_{snr:g}.csv"
            _write_confusion_csv(out_dir / name, tset, snr)
            outputs[name] = out_dir / name
        write_manifest(out_dir / "manifest", config_echo=_config_echo(cfg, thresholds_spec),
                       master_seed=cfg.master_seed, started=started,
                       finished=_utc_now(), outputs=outputs)
        print(f"wrote {pcc_path} ({len(tset.records)} trials)")
    return 0


def _fmt_complex(value: complex) -> str:
    sign = "+" if value.imag >= 0 else "-"
    return f"{fmt17(value.real)} {sign} {fmt17(abs(value.imag))}j"


def _exhaustive_frame(order: int, phase: float) -> np.ndarray:
    points = build_constellation(order, phase).points
    reps = max(1, -(-MIN_SAMPLES // points.size))
    return np.tile(points, reps)


def cmd_features(args) -> int:
    if args.grid is not None:
        return _features_grid(args)
    if args.m is None:
        raise ConfigError("--m is required unless --grid is given")
    mod = ModulationClass(args.m)
    spec = build_constellation(args.m, args.phase)
    ss = np.random.SeedSequence(_resolve_seed(args.seed))
    sym_seed, noise_seed = ss.spawn(2)
    if args.n == "exhaustive":
        samples = _exhaustive_frame(args.m, args.phase)
        n_label = f"{samples.size} (exhaustive)"
    else:
        frame = draw_symbols(spec, _parse_frame_length(args.n), sym_seed)
        samples = frame.samples
        n_label = str(samples.size)
    if args.freq_offset:
        ramp = np.exp(2j * np.pi * args.freq_offset * np.arange(samples.size))
        samples = samples * ramp
    snr = math.inf if args.noiseless or args.snr is None else args.snr
    if not math.isinf(snr):
        noisy = apply_awgn(SignalFrame(samples, FrameMeta()), snr, spec.average_power, noise_seed)
        samples = noisy.samples
    cs = frame_cumulants(samples)
    feats, _ = log_magnitude(cs.as_array())
    print(f"{mod.name}: n = {n_label}, snr_db = {fmt17(snr) if not math.isinf(snr) else 'inf'}, "
          f"phase = {fmt17(args.phase)}, freq_offset = {fmt17(args.freq_offset)}")
    print(f"C2 = {fmt17(cs.c2)}")
    print(f"C4 = {_fmt_complex(cs.c4)}")
    print(f"C6 = {_fmt_complex(cs.c6)}")
    print(f"C8 = {_fmt_complex(cs.c8)}")
    for label, value in zip(FEATURE_LABELS, feats):
        print(f"f_{label} = {fmt17(value)}")
    return 0


def _features_grid(args) -> int:
    if args.n == "exhaustive":
        raise ConfigError("--grid needs a numeric --n")
    try:
        grid = parse_grid(args.grid)
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc
    classes = (args.m,) if args.m is not None else SUPPORTED_ORDERS
    try:
        cfg = ExperimentConfig(classes=classes, snr_grid_db=grid,
                               n_trials_per_class=args.trials,
                               frame_length=_parse_frame_length(args.n),
                               phase_offset=args.phase, freq_offset=args.freq_offset,
                               master_seed=_resolve_seed(args.seed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cells = collect_feature_cells(cfg, _resolve_workers(args.threads))
    lines = ["snr_db,class,n_trials," + ",".join(f"f_{x}" for x in FEATURE_LABELS)]
    for snr in cfg.snr_grid_db:
        for mod in cfg.classes:
            mean = cells[(mod.order, float(snr))].mean(axis=0)
            lines.append(f"{fmt17(snr)},{mod.order},{cfg.n_trials_per_class},"
                         + ",".join(fmt17(v) for v in mean))
    text = "\n".join(lines) + "\n"
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "features_grid.csv").write_text(text, encoding="utf-8")
        print(f"wrote {out_dir / 'features_grid.csv'}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_classify(args) -> int:
    thresholds = _load_thresholds(args.thresholds)
    samples = read_iq(args.infile)
    if samples.size < MIN_SAMPLES:
        raise DataFileError(f"{args.infile}: {samples.size} samples is too short to "
                            f"classify (need {MIN_SAMPLES})")
    cs = frame_cumulants(samples)
    feats, _ = log_magnitude(cs.as_array())
    decision = classify(feats, thresholds, args.fusion)
    for label, idx in zip(FEATURE_LABELS, decision.per_feature_index):
        shown = "abstain" if idx == ABSTAIN else str(idx)
        print(f"f_{label} index = {shown}")
    print(decision.fused_class.name if decision.fused_class is not None else "reject")
    return 0


def cmd_calibrate(args) -> int:
    try:
        grid = parse_grid(args.snr_grid)
        classes = tuple(int(t) for t in args.classes.split(",")) if args.classes \
            else SUPPORTED_ORDERS
        cfg = ExperimentConfig(classes=classes, snr_grid_db=grid,
                               n_trials_per_class=args.trials, frame_length=args.n,
                               phase_offset=args.phase,
                               master_seed=_resolve_seed(args.seed))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    started = _utc_now()
    cells = collect_feature_cells(cfg, _resolve_workers(args.threads))
    table = calibrate(cells)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    thresholds_path = out_dir / "thresholds.csv"
    write_threshold_csv(table, thresholds_path)
    report_path = out_dir / "separation.csv"
    lines = ["feature,low_class,high_class,band_top,band_bottom,gap"]
    for feat, low, high, top, bottom, gap in separation_report(cells):
        lines.append(f"{feat},{low},{high},{fmt17(top)},{fmt17(bottom)},{fmt17(gap)}")
    report_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_manifest(out_dir / "manifest",
                   config_echo=_config_echo(cfg, "calibrated"),
                   master_seed=cfg.master_seed, started=started,
                   finished=_utc_now(),
                   outputs={"thresholds.csv": thresholds_path,
                            "separation.csv": report_path})
    print(f"wrote {thresholds_path}")
    print(f"wrote {report_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=None,
                        help="master RNG seed (fallback: MODREC_SEED, then 0)")
    common.add_argument("--threads", default="1", metavar="N|auto",
                        help="worker threads for sweeps (default 1)")
    common.add_argument("--out", default=None, metavar="DIR",
                        help="output directory")
    parser = argparse.ArgumentParser(prog="modrec",
                                     description="M-QAM modulation classification "
                                                 "from logarithmic cumulant features")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", parents=[common],
                             help="run a Monte-Carlo PCC sweep and write CSVs")
    p_sweep.add_argument("--config", default=None, metavar="FILE",
                         help="key = value config file (defaults: 9 classes, "
                              "N=4096, phase pi/6, AWGN, -5..20 dB)")
    p_sweep.set_defaults(func=cmd_sweep)

    p_feat = sub.add_parser("features", parents=[common],
                            help="print cumulants and log features for one frame")
    p_feat.add_argument("--m", type=int, choices=SUPPORTED_ORDERS, default=None,
                        help="modulation order")
    p_feat.add_argument("--n", default="4096",
                        help="frame length, or 'exhaustive' for one pass over "
                             "the constellation")
    group = p_feat.add_mutually_exclusive_group()
    group.add_argument("--snr", type=float, default=None, help="SNR in dB")
    group.add_argument("--noiseless", action="store_true",
                       help="no noise at all (default)")
    p_feat.add_argument("--phase", type=parse_angle, default=0.0,
                        help="carrier phase offset in radians (accepts 'pi/6')")
    p_feat.add_argument("--freq-offset", dest="freq_offset", type=float, default=0.0,
                        help="carrier frequency offset in cycles/sample")
    p_feat.add_argument("--grid", default=None, metavar="LO:HI:STEP",
                        help="emit per-class mean features over this SNR grid as CSV")
    p_feat.add_argument("--trials", type=int, default=200,
                        help="trials per (class, SNR) cell in --grid mode")
    p_feat.set_defaults(func=cmd_features)

    p_cls = sub.add_parser("classify", parents=[common],
                           help="classify a raw IQ capture file")
    p_cls.add_argument("--in", dest="infile", required=True, metavar="FILE",
                       help="raw interleaved float32 I/Q file")
    p_cls.add_argument("--thresholds", default="table1", metavar="table1|FILE",
                       help="threshold table to use (default: published table)")
    p_cls.add_argument("--fusion", choices=("plurality", "oracle_or"),
                       default="plurality",
                       help="recorded fusion mode; file output always shows the "
                            "plurality vote")
    p_cls.set_defaults(func=cmd_classify)

    p_cal = sub.add_parser("calibrate", parents=[common],
                           help="fit thresholds empirically and write them as CSV")
    p_cal.add_argument("--snr-grid", dest="snr_grid", default="5:20:1",
                       metavar="LO:HI:STEP", help="calibration SNR grid in dB")
    p_cal.add_argument("--trials", type=int, default=200,
                       help="trials per (class, SNR) cell")
    p_cal.add_argument("--n", type=int, default=4096, help="frame length")
    p_cal.add_argument("--classes", default=None, metavar="M1,M2,...",
                       help="comma list of modulation orders (default: all nine)")
    p_cal.add_argument("--phase", type=parse_angle, default=math.pi / 6,
                       help="carrier phase offset in radians")
    p_cal.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"modrec: config error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(f"modrec: calibration failed: {exc}", file=sys.stderr)
        return 4
    except ModrecError as exc:
        print(f"modrec: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"modrec: unexpected error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
