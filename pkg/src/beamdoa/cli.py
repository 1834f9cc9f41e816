"""Command-line entry point: ``beamdoa {scan,train,eval,table}``.

Exit codes: 0 success, 2 input/config/I-O error, 3 numeric fault.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .config import ConfigError, RunConfig, build_config, parse_pairs
from .errors import InvalidArgumentError, NumericFaultError
from .signal_synth import ChannelParams, calibration_scan
from .train_eval import compare, evaluate_model, train

log = logging.getLogger("beamdoa")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--beams", type=int, help="scan-beam count B for train/eval")
    p.add_argument("--snr", help="comma-separated peak SNRs in dB")
    p.add_argument("--trials", type=int)
    p.add_argument("--out", help="output directory")
    p.add_argument("--jobs", type=int, help="worker processes for per-B training")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamdoa", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("scan", help="simulate the 64-beam calibration scan"))
    p = sub.add_parser("train", help="train the network for one B on a scan file")
    _common(p)
    p.add_argument("--scan", type=Path, help="scan CSV (default OUT/scan.csv)")
    p = sub.add_parser("eval", help="compare corr and mlp for one trained model")
    _common(p)
    p.add_argument("--model", type=Path, help="model file (default OUT/model_bB.txt)")
    _common(sub.add_parser("table", help="scan, train every B in b_list, and compare"))
    return parser


def resolve_config(args) -> RunConfig:
    pairs = parse_pairs(args.config.read_text()) if args.config else {}
    for flag, key in (("seed", "seed"), ("beams", "beams"), ("snr", "snr"),
                      ("trials", "trials"), ("out", "out"), ("jobs", "jobs")):
        value = getattr(args, flag)
        if value is not None:
            pairs[key] = str(value)
    return build_config(pairs)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scan(cfg: RunConfig):
    ch = ChannelParams(snr_db=cfg.scan_snr_db)
    return calibration_scan(cfg.geom, ch, cfg.alpha_step, cfg.samples_per_beam, cfg.seed, cfg.full_beams)


def cmd_scan(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    scan = _scan(cfg)
    path = out / "scan.csv"
    io.write_scan(scan, path)
    print(f"wrote {path}: {scan.shape[0]} angles x {scan.shape[1]} beams at {scan.snr_db:g} dB")
    return EXIT_OK


def _write_run(out: Path, b: int, model, run) -> Path:
    model_path = out / f"model_b{b}.txt"
    io.write_model(model, model_path)
    io.write_loss_history(run.lr_history, run.loss_history, out / f"loss_b{b}.csv")
    return model_path


def cmd_train(cfg: RunConfig, scan_path: Path | None) -> int:
    out = _out_dir(cfg)
    scan = io.read_scan(scan_path or out / "scan.csv")
    model, run = train(scan, cfg.hyper, cfg.aug, cfg.beams, cfg.seed)
    path = _write_run(out, cfg.beams, model, run)
    smoothed = run.smoothed_loss()
    final = f"{smoothed[-1]:.6g}" if smoothed.size else "n/a"
    print(f"wrote {path}; final smoothed loss {final}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig, model_path: Path | None) -> int:
    out = _out_dir(cfg)
    model = io.read_model(model_path or out / f"model_b{cfg.beams}.txt")
    if model.input_dim != cfg.beams:
        print(f"error: model expects B={model.input_dim}, config has B={cfg.beams}", file=sys.stderr)
        return EXIT_INPUT
    records = evaluate_model(model, cfg.beams, cfg.snr_list, cfg.trials, cfg.seed, cfg.geom,
                             cfg.grid_step, cfg.full_beams)
    path = out / f"report_b{cfg.beams}.csv"
    io.write_report(records, path)
    for r in records:
        print(f"B={r.b} snr={r.snr_db:g} {r.method}: {r.mean_abs_error_deg:.2f} deg ({r.trials} trials)")
    return EXIT_OK


def cmd_table(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    scan = _scan(cfg)
    io.write_scan(scan, out / "scan.csv")
    report = compare(scan, cfg.b_list, cfg.snr_list, cfg.trials, cfg.seed, cfg.hyper, cfg.aug,
                     cfg.geom, cfg.grid_step, cfg.jobs)
    for b, model in report.models.items():
        _write_run(out, b, model, report.runs[b])
    io.write_report(report.records, out / "table.csv")
    print(format_table(report, cfg))
    failed = [r for r in report.records if r.failures]
    if len(report.models) < len(cfg.b_list):
        print("warning: training failed for some B; see log", file=sys.stderr)
    if failed:
        print(f"warning: {len(failed)} cells had estimator failures", file=sys.stderr)
    return EXIT_OK


def format_table(report, cfg: RunConfig) -> str:
    header = "B   " + "  ".join(f"{s:>6g}dB corr/mlp" for s in cfg.snr_list)
    lines = [header]
    for b in cfg.b_list:
        cells = []
        for s in cfg.snr_list:
            vals = []
            for m in ("corr", "mlp"):
                try:
                    vals.append(f"{report.lookup(b, float(s), m).mean_abs_error_deg:6.2f}")
                except KeyError:
                    vals.append("   n/a")
            cells.append("/".join(vals))
        lines.append(f"{b:<3} " + "  ".join(f"{c:>17}" for c in cells))
    return "\n".join(lines)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "scan":
            return cmd_scan(cfg)
        if args.command == "train":
            return cmd_train(cfg, args.scan)
        if args.command == "eval":
            return cmd_eval(cfg, args.model)
        return cmd_table(cfg)
    except NumericFaultError as exc:
        where = f" at iteration {exc.iteration}" if exc.iteration is not None else ""
        print(f"numeric fault{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidArgumentError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
