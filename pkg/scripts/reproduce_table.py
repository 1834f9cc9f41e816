"""Full comparison over B in {3, 4, 6, 8, 12, 16} and SNR in {0, 5, 10, 15} dB.

Writes table.csv (mean |error| per method), per-B loss curves and model
files, and errors_vs_b.csv / errors_vs_snr.csv in long form for plotting.

    python scripts/reproduce_table.py --out out/table --trials 100 --jobs 4
"""

import argparse
import csv
import sys
from pathlib import Path

from beamdoa.cli import main as cli_main


def pivot(table: Path, out_dir: Path) -> None:
    with open(table, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for name, key, other in (("errors_vs_b.csv", "b", "snr_db"), ("errors_vs_snr.csv", "snr_db", "b")):
        with open(out_dir / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([other, "method", key, "mean_abs_error_deg"])
            for r in sorted(rows, key=lambda r: (float(r[other]), r["method"], float(r[key]))):
                w.writerow([r[other], r["method"], r[key], r["mean_abs_error_deg"]])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/table")
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--config", help="extra key=value overrides")
    args = ap.parse_args()
    argv = ["table", "--out", args.out, "--trials", str(args.trials), "--seed", str(args.seed),
            "--jobs", str(args.jobs)]
    if args.config:
        argv += ["--config", args.config]
    code = cli_main(argv)
    if code == 0:
        pivot(Path(args.out) / "table.csv", Path(args.out))
    return code


if __name__ == "__main__":
    sys.exit(main())
