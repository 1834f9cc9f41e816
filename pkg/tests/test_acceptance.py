"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
The default-config training for B = 3, 8, 16 runs once per session (a few
minutes on one core).
"""

import time

import numpy as np
import pytest

from beamdoa.array_model import ArrayGeometry, make_beambook, slice_beambook
from beamdoa.augmentation import AugmentationConfig, rician_mix
from beamdoa.cli import main
from beamdoa.correlation import build_grid, estimate
from beamdoa.mlp import backward, forward, mse_grad
from beamdoa.signal_synth import ChannelParams, calibration_scan, capture_profile
from beamdoa.train_eval import evaluate_model, train
from test_augmentation import ALPHAS, BEAMS, beam_lag1_autocorr, nlos_profile, rayleigh_limit_pvalue
from test_mlp import max_rel_error, numeric_grads, perturbed_model
from test_signal_synth import _noiseless_identity_error

GEOM = ArrayGeometry()
SNRS = (0.0, 5.0, 10.0, 15.0)
TRIALS = 100
SEED = 0


@pytest.fixture(scope="session")
def trained():
    """Default-config models and 100-trial reports for B = 3, 8, 16."""
    scan = calibration_scan(GEOM, seed=SEED)
    out = {}
    for b in (3, 8, 16):
        t0 = time.perf_counter()
        model, _ = train(scan, b=b, seed=SEED)
        t_train = time.perf_counter() - t0
        t0 = time.perf_counter()
        records = evaluate_model(model, b, SNRS, TRIALS, SEED, GEOM)
        t_eval = time.perf_counter() - t0
        out[b] = {"records": {(r.snr_db, r.method): r for r in records}, "t_train": t_train, "t_eval": t_eval}
    return out


def err(trained, b, snr, method):
    return trained[b]["records"][(snr, method)].mean_abs_error_deg


def test_1_noiseless_recovery(record):
    t0 = time.perf_counter()
    book = slice_beambook(make_beambook(64, GEOM), 16)
    grid = build_grid(book, GEOM, 0.25)
    errors = []
    for i, alpha in enumerate(np.arange(-45.0, 46.0)):
        prof = capture_profile(float(alpha), book, ChannelParams(), GEOM, seed=i)
        errors.append(abs(estimate(prof, grid).alpha_hat - alpha))
    elapsed = time.perf_counter() - t0
    mean = float(np.mean(errors))
    ok = mean <= 0.25 and elapsed < 5.0
    assert record(1, "noiseless recovery", ok, f"mean |err| {mean:.4f} deg (<= 0.25), {elapsed:.2f} s (< 5)")


def test_2_gradient_oracle(record):
    worst = 0.0
    for seed in range(10):
        m, rng = perturbed_model(100 + seed, b=8, h=16)
        x = rng.random((8, 8))
        y = rng.uniform(-0.5, 0.5, 8)
        pred, cache = forward(m, x)
        grads = backward(m, cache, mse_grad(pred, y), l2_coeff=1e-5)
        num = numeric_grads(m, x, y, 1e-5)
        worst = max(worst, max(max_rel_error(grads[k], num[k]) for k in m.params))
    assert record(2, "gradient oracle", worst < 1e-4, f"max rel error {worst:.2e} (< 1e-4)")


def test_3_power_identity(record):
    worst = max(_noiseless_identity_error(1000 + s) for s in range(100))
    assert record(3, "segment power identity", worst < 1e-10, f"max rel error {worst:.2e} (< 1e-10)")


def test_4_ordering(trained, record):
    lines, ok = [], True
    for b in (3, 8):
        for snr in (0.0, 5.0):
            m, c = err(trained, b, snr, "mlp"), err(trained, b, snr, "corr")
            ok &= m <= c + 0.5
            lines.append(f"B={b} {snr:g}dB mlp {m:.2f} corr {c:.2f}")
    assert record(4, "mlp <= corr at low SNR", ok, "; ".join(lines))


def test_5_trends(trained, record):
    jitter, bad = 1.5, []
    for method in ("corr", "mlp"):
        for snr in SNRS:
            lo, hi = err(trained, 16, snr, method), err(trained, 3, snr, method)
            if lo > hi + jitter:
                bad.append(f"{method} {snr:g}dB B16 {lo:.2f} > B3 {hi:.2f}")
        for b in (3, 8, 16):
            hi_snr, lo_snr = err(trained, b, 15.0, method), err(trained, b, 0.0, method)
            if hi_snr > lo_snr + jitter:
                bad.append(f"{method} B={b} 15dB {hi_snr:.2f} > 0dB {lo_snr:.2f}")
    assert record(5, "trends in B and SNR", not bad, "; ".join(bad) or "all monotone within 1.5 deg")


def test_6_augmentation_statistics(record):
    rng = np.random.default_rng(0)
    convex = True
    for _ in range(1000):
        a, b = rng.random((2, 6, 5)) * rng.uniform(0, 100)
        k = rng.choice([0.0, np.inf]) if rng.random() < 0.05 else rng.exponential(5.0)
        out = rician_mix(a, b, k)
        tol = 1e-12 * np.maximum(np.maximum(a, b), 1)
        convex &= bool(np.all(out >= np.minimum(a, b) - tol) and np.all(out <= np.maximum(a, b) + tol))
    pvalue = rayleigh_limit_pvalue(seed=0)
    s = 2 * (BEAMS[1] - BEAMS[0])
    rho = min(beam_lag1_autocorr(nlos_profile(AugmentationConfig(sigma_beta_range=(s, s)), ALPHAS, BEAMS,
                                              np.random.default_rng(seed))) for seed in range(5))
    ok = convex and pvalue > 0.01 and rho > 0.5
    assert record(6, "augmentation statistics", ok,
                  f"convex bound {'ok' if convex else 'violated'}, KS p={pvalue:.3f} (> 0.01), lag-1 rho={rho:.3f} (> 0.5)")


def test_7_table_determinism(tmp_path, record):
    cfg = tmp_path / "c.txt"
    # reduced iteration count and b_list keep this check to seconds
    cfg.write_text("b_list=3,8\niters=200\ntrials=20\n")
    for name in ("a", "b"):
        assert main(["table", "--config", str(cfg), "--out", str(tmp_path / name)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir() if p.suffix == ".csv")
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    assert record(7, "table determinism", same, f"{len(files)} CSVs byte-identical: {same}")


def test_8_runtime(trained, record):
    t_train, t_eval = trained[8]["t_train"], trained[8]["t_eval"]
    ok = t_train < 600 and t_eval < 60
    assert record(8, "runtime budget", ok, f"B=8 training {t_train:.0f} s (< 600), eval {t_eval:.1f} s (< 60)")
