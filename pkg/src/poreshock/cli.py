"""Command-line interface: run, sweep, export-dataset, analyze, compare, info.

Exit codes: 0 success, 1 partial sweep failure, 2 configuration/usage
error, 3 numerical abort.  Paper units at the flags (m/s, nm, ps), SI
inside.  The PORESHOCK_OUTDIR environment variable supplies the default
output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import multiprocessing
import os
import sys

import numpy as np

from . import analysis, dataset, report
from .config import load_config
from .solver import ConfigError, RunConfig, SolverAbort, run_simulation
from .units import m_to_nm, nm_to_m, pa_to_gpa, s_to_ps

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

PAPER_CUT_X_NM = 29.30
PAPER_CUT_Y_NM = (29.30, 175.79)


def _outdir(path=None):
    return path or os.environ.get("PORESHOCK_OUTDIR", ".")


def _progress_printer(every: int):
    def cb(state):
        info = state.step_info
        if info.step % every:
            return
        print(f"step={info.step} t={s_to_ps(state.t):.4f} "
              f"dt={s_to_ps(info.dt):.6f} Tmax={float(np.max(state.T)):.1f} "
              f"pmax={pa_to_gpa(float(np.max(state.p))):.4f}", file=sys.stderr)
    return cb


def _single_run(cfg: RunConfig, out_path: str, progress_every: int = 0,
                audit: bool = False):
    progress = _progress_printer(progress_every) if progress_every else None
    series, audit_report = run_simulation(cfg, audit=audit, progress=progress)
    os.makedirs(os.path.dirname(os.path.abspath(out_path)), exist_ok=True)
    dataset.write_series(series, out_path)
    return series, audit_report


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        cfg.up = args.v0
        cfg.validate()
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or os.path.join(_outdir(), f"v{args.v0:05.0f}.shrb")
    try:
        series, audit_report = _single_run(cfg, out, args.progress_every, args.audit)
    except SolverAbort as err:
        print(f"numerical abort: {err}", file=sys.stderr)
        return EXIT_NUMERICAL

    split = dataset.split_velocities(args.seed)
    dataset.write_manifest(out + ".manifest",
                           [{"path": os.path.basename(out), "v0": cfg.up,
                             "split": split.label(cfg.up)}],
                           seed=args.seed)
    if audit_report is not None:
        report.write_table(out + ".audit.tsv", ["quantity", "value"],
                           audit_report.rows())
    print(f"wrote {out} ({series.n_frames} frames)")
    return EXIT_OK


def _parse_velocities(spec: str, seed: int):
    split = dataset.split_velocities(seed)
    if spec == "paper-trainval":
        return [float(v) for v in split.pool]
    if spec == "paper-test":
        return [float(v) for v in split.test]
    try:
        velocities = [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"bad velocity list {spec!r}") from None
    if not velocities:
        raise ConfigError("empty velocity list")
    return velocities


def _sweep_worker(payload):
    cfg, out_path = payload
    try:
        _single_run(cfg, out_path)
        return out_path, "ok"
    except (SolverAbort, ConfigError, ValueError) as err:
        return out_path, f"failed: {err}"


def cmd_sweep(args) -> int:
    try:
        base = load_config(args.config)
        velocities = _parse_velocities(args.velocities, args.seed)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = _outdir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    jobs = []
    for v0 in velocities:
        cfg = dataclasses.replace(base, up=v0)
        try:
            cfg.validate()
        except ConfigError as err:
            print(f"error: v0={v0}: {err}", file=sys.stderr)
            return EXIT_CONFIG
        jobs.append((cfg, os.path.join(out_dir, f"v{v0:05.0f}.shrb")))

    if args.jobs > 1:
        with multiprocessing.Pool(args.jobs) as pool:
            results = pool.map(_sweep_worker, jobs)
    else:
        results = [_sweep_worker(j) for j in jobs]

    split = dataset.split_velocities(args.seed)
    entries = []
    any_failed = False
    for (cfg, path), (_, status) in zip(jobs, results):
        entries.append({"path": os.path.basename(path), "v0": cfg.up,
                        "split": split.label(cfg.up), "status": status})
        if status != "ok":
            any_failed = True
            print(f"{path}: {status}", file=sys.stderr)
    dataset.write_manifest(os.path.join(out_dir, "manifest.txt"), entries,
                           seed=args.seed)
    print(f"wrote {len(entries)} series to {out_dir}")
    return EXIT_PARTIAL if any_failed else EXIT_OK


def cmd_export_dataset(args) -> int:
    manifest_path = os.path.join(args.runs, "manifest.txt")
    try:
        if os.path.isfile(manifest_path):
            mani = dataset.read_manifest(manifest_path)
            entries = [e for e in mani["entries"] if e["status"] == "ok"]
        else:
            entries = []
            for name in sorted(os.listdir(args.runs)):
                if name.endswith(".shrb"):
                    head = dataset.read_header(os.path.join(args.runs, name))
                    entries.append({"path": name, "v0": head["v0_ms"],
                                    "split": "", "status": "ok"})
        if not entries:
            raise ConfigError(f"no usable series under {args.runs}")
    except (ConfigError, dataset.FormatError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    split = dataset.split_velocities(args.seed)
    for e in entries:
        e["split"] = split.label(e["v0"])

    train_entries = [e for e in entries if e["split"] == "train"]
    if not train_entries:
        print("error: no training-split series to fit normalization",
              file=sys.stderr)
        return EXIT_CONFIG

    def load(e):
        return dataset.read_series(os.path.join(args.runs, e["path"]))

    stats = dataset.fit_norm(load(e) for e in train_entries)

    out_dir = _outdir(args.out)
    os.makedirs(out_dir, exist_ok=True)
    for e in entries:
        series = dataset.normalize(load(e), stats)
        dataset.write_series(series, os.path.join(out_dir, e["path"]))
    dataset.write_manifest(os.path.join(out_dir, "manifest.txt"), entries,
                           stats=stats, seed=args.seed)
    print(f"exported {len(entries)} normalized series to {out_dir}")
    return EXIT_OK


def _load_series(path):
    try:
        return dataset.read_series(path)
    except (OSError, dataset.FormatError) as err:
        raise ConfigError(f"{path}: {err}") from None


def _resolve_frame(series, spec: str, x_m, y_range_m):
    if spec == "collapse":
        k = analysis.pore_collapse_time(series)
        if k is None:
            raise ConfigError("series never reaches pore collapse; "
                              "pass --frame explicitly")
        return k
    if spec == "peak-band":
        k = analysis.most_prominent_band_frame(series, x_m, y_range_m)
        if k is None:
            raise ConfigError("no frame shows a dominant band; "
                              "pass --frame explicitly")
        return k
    try:
        k = int(spec)
    except ValueError:
        raise ConfigError(f"bad frame spec {spec!r}") from None
    if not 0 <= k < series.n_frames:
        raise ConfigError(f"frame {k} out of range (0..{series.n_frames - 1})")
    return k


def _stem(metric, series, frame=None, channel=None):
    parts = [metric]
    if channel:
        parts.append(channel)
    parts.append(f"v{series.v0:05.0f}")
    if frame is not None:
        parts.append(f"f{frame:03d}")
    return "_".join(parts)


def cmd_analyze(args) -> int:
    try:
        series = _load_series(args.series)
        out_dir = _outdir(args.out)
        figures = not args.no_figures
        x_m = nm_to_m(args.x_nm)
        y_range_m = (nm_to_m(args.y_nm[0]), nm_to_m(args.y_nm[1]))

        if args.metric == "collapse":
            areas = analysis.pore_area_history(series)
            k = analysis.pore_collapse_time(series)
            paths = report.report_collapse(series.times(), areas, k, out_dir,
                                           _stem("collapse", series), figures)
        elif args.metric == "pdf":
            k = _resolve_frame(series, args.frame, x_m, y_range_m)
            edges, dens = analysis.field_pdf(series, args.channel, k, args.bins)
            paths = report.report_pdf(edges, {"series": dens}, args.channel,
                                      out_dir, _stem("pdf", series, k, args.channel),
                                      figures)
        elif args.metric == "vcut":
            k = _resolve_frame(series, args.frame, x_m, y_range_m)
            y, prof = analysis.vertical_cut(series, k, x_m, y_range_m, args.channel)
            paths = report.report_profile(y, {"series": prof}, args.channel,
                                          out_dir, _stem("vcut", series, k, args.channel),
                                          figures)
        elif args.metric == "band":
            k = _resolve_frame(series, args.frame, x_m, y_range_m)
            y, prof = analysis.vertical_cut(series, k, x_m, y_range_m)
            bm = analysis.dominant_band(y, prof)
            paths = report.report_band({"series": bm}, out_dir,
                                       _stem("band", series, k),
                                       profile=(y, {"series": prof}), figures=figures)
            if bm is None:
                print("band: Fail (no contrast above threshold)")
        elif args.metric == "shock-speed":
            u_wall, u_shock = analysis.measure_shock_speed(series)
            paths = report.report_shock_speed(u_wall, u_shock, series.v0, out_dir,
                                              _stem("shock_speed", series))
        elif args.metric == "spectrum":
            k = _resolve_frame(series, args.frame, x_m, y_range_m)
            frame = series.channel(args.channel, k)
            kk, power = analysis.radial_power_spectrum(frame, series.dx)
            tsv = os.path.join(out_dir, _stem("spectrum", series, k, args.channel) + ".tsv")
            os.makedirs(out_dir, exist_ok=True)
            report.write_table(tsv, ["k_rad_per_m", "scale_nm", "power"],
                               [(kk[i], m_to_nm(2 * np.pi / kk[i]), power[i])
                                for i in range(len(kk))])
            paths = [tsv]
        else:  # pragma: no cover - argparse restricts choices
            raise ConfigError(f"unknown metric {args.metric}")
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        pred = _load_series(args.pred)
        truth = _load_series(args.truth)
        out_dir = _outdir(args.out)
        figures = not args.no_figures
        x_m = nm_to_m(args.x_nm)
        y_range_m = (nm_to_m(args.y_nm[0]), nm_to_m(args.y_nm[1]))

        if args.metric == "rmse":
            rmse = analysis.rollout_rmse(pred, truth)
            paths = report.report_rmse(rmse, out_dir, _stem("rmse", truth), figures)
        elif args.metric == "pdf":
            k = _resolve_frame(truth, args.frame, x_m, y_range_m)
            vals_t = truth.channel(args.channel, k)
            vals_p = pred.channel(args.channel, k)
            lo = float(min(vals_t.min(), vals_p.min()))
            hi = float(max(vals_t.max(), vals_p.max()))
            edges, dens_t = analysis.field_pdf(truth, args.channel, k, args.bins, lo, hi)
            _, dens_p = analysis.field_pdf(pred, args.channel, k, args.bins, lo, hi)
            paths = report.report_pdf(edges, {"truth": dens_t, "pred": dens_p},
                                      args.channel, out_dir,
                                      _stem("pdf", truth, k, args.channel), figures)
        elif args.metric == "vcut":
            k = _resolve_frame(truth, args.frame, x_m, y_range_m)
            y, prof_t = analysis.vertical_cut(truth, k, x_m, y_range_m, args.channel)
            _, prof_p = analysis.vertical_cut(pred, k, x_m, y_range_m, args.channel)
            paths = report.report_profile(y, {"truth": prof_t, "pred": prof_p},
                                          args.channel, out_dir,
                                          _stem("vcut", truth, k, args.channel), figures)
        elif args.metric == "band":
            k = _resolve_frame(truth, args.frame, x_m, y_range_m)
            y, prof_t = analysis.vertical_cut(truth, k, x_m, y_range_m)
            _, prof_p = analysis.vertical_cut(pred, k, x_m, y_range_m)
            bands = {"truth": analysis.dominant_band(y, prof_t),
                     "pred": analysis.dominant_band(y, prof_p)}
            paths = report.report_band(bands, out_dir, _stem("band", truth, k),
                                       profile=(y, {"truth": prof_t, "pred": prof_p}),
                                       figures=figures)
        elif args.metric == "spectrum":
            k = _resolve_frame(truth, args.frame, x_m, y_range_m)
            spec = analysis.spectrum_relative_error(
                pred.channel(args.channel, k), truth.channel(args.channel, k),
                truth.dx)
            paths = report.report_spectrum(spec, out_dir,
                                           _stem("spectrum", truth, k, args.channel),
                                           figures)
        elif args.metric in ("haar", "lp"):
            k = _resolve_frame(truth, args.frame, x_m, y_range_m)
            fp = pred.channel(args.channel, k)
            ft = truth.channel(args.channel, k)
            if args.metric == "haar":
                values = {"haar_loss": analysis.haar_loss(fp, ft),
                          "haar_energy_pred": analysis.haar_highfreq_energy(fp),
                          "haar_energy_truth": analysis.haar_highfreq_energy(ft)}
            else:
                values = {f"l{args.p:g}_error": analysis.lp_error(fp, ft, args.p),
                          "l1_error": analysis.lp_error(fp, ft, 1.0)}
            paths = report.report_scalars(values, out_dir,
                                          _stem(args.metric, truth, k, args.channel))
        else:  # pragma: no cover
            raise ConfigError(f"unknown metric {args.metric}")
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_info(args) -> int:
    try:
        head = dataset.read_header(args.path)
    except (OSError, dataset.FormatError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for key, value in head.items():
        print(f"{key} = {value}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="poreshock",
        description="Pore-collapse shock simulator and analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one simulation")
    p_run.add_argument("config", help="run configuration file")
    p_run.add_argument("--v0", type=float, required=True,
                       help="impact velocity, m/s")
    p_run.add_argument("--out", help="output .shrb path")
    p_run.add_argument("--audit", action="store_true",
                       help="conservation bookkeeping; writes an .audit.tsv")
    p_run.add_argument("--progress-every", type=int, default=200, metavar="N",
                       help="stderr progress cadence in steps (0 = quiet)")
    p_run.add_argument("--seed", type=int, default=dataset.DEFAULT_SPLIT_SEED,
                       help="train/val split seed for the manifest label")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a velocity sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--velocities", required=True,
                         help="comma list (m/s) or preset: paper-trainval, paper-test")
    p_sweep.add_argument("--out", help="output directory")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--seed", type=int, default=dataset.DEFAULT_SPLIT_SEED)
    p_sweep.set_defaults(func=cmd_sweep)

    p_exp = sub.add_parser("export-dataset",
                           help="normalize a sweep into an ML-ready dataset")
    p_exp.add_argument("--runs", required=True, help="directory of sweep output")
    p_exp.add_argument("--out", help="output directory")
    p_exp.add_argument("--seed", type=int, default=dataset.DEFAULT_SPLIT_SEED)
    p_exp.set_defaults(func=cmd_export_dataset)

    def add_metric_options(p, metrics):
        p.add_argument("--metric", required=True, choices=metrics)
        p.add_argument("--channel", default="T", choices=list(dataset.CHANNELS))
        p.add_argument("--frame", default="collapse",
                       help="frame index, 'collapse', or 'peak-band'")
        p.add_argument("--bins", type=int, default=100)
        p.add_argument("--x-nm", type=float, default=PAPER_CUT_X_NM,
                       help="vertical-cut x position (nm)")
        p.add_argument("--y-nm", type=float, nargs=2, default=list(PAPER_CUT_Y_NM),
                       metavar=("LO", "HI"), help="vertical-cut y range (nm)")
        p.add_argument("--out", help="report directory")
        p.add_argument("--no-figures", action="store_true")

    p_an = sub.add_parser("analyze", help="single-series metrics")
    p_an.add_argument("series")
    add_metric_options(p_an, ["pdf", "vcut", "band", "collapse", "shock-speed",
                              "spectrum"])
    p_an.set_defaults(func=cmd_analyze)

    p_cmp = sub.add_parser("compare", help="prediction-vs-truth metrics")
    p_cmp.add_argument("pred")
    p_cmp.add_argument("truth")
    add_metric_options(p_cmp, ["rmse", "pdf", "vcut", "band", "spectrum",
                               "haar", "lp"])
    p_cmp.add_argument("--p", type=float, default=10.0,
                       help="exponent for the lp metric")
    p_cmp.set_defaults(func=cmd_compare)

    p_info = sub.add_parser("info", help="print SHRB header fields")
    p_info.add_argument("path")
    p_info.set_defaults(func=cmd_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
