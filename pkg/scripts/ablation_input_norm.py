"""Network error for each input normalization and layer-norm placement at one B.

    python scripts/ablation_input_norm.py --beams 8 --trials 100
"""

import argparse
from dataclasses import replace

from beamdoa.mlp import INPUT_NORMS, PLACEMENTS, TrainHyper
from beamdoa.signal_synth import calibration_scan
from beamdoa.train_eval import evaluate_model, train


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beams", type=int, default=8)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--iters", type=int, default=TrainHyper().total_iters)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    snrs = (0.0, 5.0, 10.0, 15.0)
    scan = calibration_scan(seed=args.seed)
    corr = {r.snr_db: r for r in evaluate_model(None, args.beams, snrs, args.trials, args.seed)}
    print("variant        " + "  ".join(f"{s:>5g}dB" for s in snrs))
    print("corr           " + "  ".join(f"{corr[s].mean_abs_error_deg:7.2f}" for s in snrs))
    for norm in INPUT_NORMS:
        for placement in PLACEMENTS:
            hyper = replace(TrainHyper(), input_norm=norm, ln_placement=placement, total_iters=args.iters)
            model, _ = train(scan, hyper, b=args.beams, seed=args.seed)
            recs = [r for r in evaluate_model(model, args.beams, snrs, args.trials, args.seed) if r.method == "mlp"]
            print(f"{norm:>6}/{placement:<7} " + "  ".join(f"{r.mean_abs_error_deg:7.2f}" for r in recs))


if __name__ == "__main__":
    main()
