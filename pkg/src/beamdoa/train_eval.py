"""Training loop on freshly augmented scans, test-set synthesis and the
corr-vs-mlp comparison harness."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .array_model import ArrayGeometry, make_beambook, slice_beambook, slice_indices
from .augmentation import AugmentationConfig, augment_scan
from .correlation import CorrelationEstimator, build_grid
from .errors import InvalidArgumentError, NumericFaultError
from .mlp import (
    ANGLE_SCALE,
    MlpEstimator,
    MlpModel,
    OptimizerState,
    TrainHyper,
    adam_step,
    backward,
    forward,
    init_model,
    lr_schedule,
    mse_grad,
    mse_loss,
    normalize_profile,
)
from .signal_synth import (
    FULL_BOOK_SIZE,
    ChannelParams,
    PowerProfile,
    ScanDataset,
    capture_profile,
    derive_rng,
)

log = logging.getLogger(__name__)

TEST_SAMPLES = 512
SNR_LABELS = {0.0: "Low SNR", 5.0: "Mid-Low SNR", 10.0: "Mid SNR", 15.0: "Mid-High SNR"}


@dataclass
class TrainRun:
    base_scan: ScanDataset
    hyper: TrainHyper
    aug_cfg: AugmentationConfig
    b: int
    seed: int
    loss_history: list[float] = field(default_factory=list)
    lr_history: list[float] = field(default_factory=list)

    def smoothed_loss(self, window: int = 100) -> np.ndarray:
        """Trailing moving average; entry ``i`` averages iterations ``max(0, i-window+1)..i``."""
        losses = np.asarray(self.loss_history)
        if losses.size == 0:
            return losses
        csum = np.concatenate([[0.0], np.cumsum(losses)])
        idx = np.arange(1, losses.size + 1)
        lo = np.maximum(idx - window, 0)
        return (csum[idx] - csum[lo]) / (idx - lo)


@dataclass(frozen=True)
class EvalRecord:
    b: int
    snr_db: float
    method: str
    mean_abs_error_deg: float
    trials: int
    seed: int
    failures: int = 0


@dataclass
class EvalReport:
    records: list[EvalRecord] = field(default_factory=list)
    models: dict[int, MlpModel] = field(default_factory=dict)
    runs: dict[int, TrainRun] = field(default_factory=dict)

    def lookup(self, b: int, snr_db: float, method: str) -> EvalRecord:
        for r in self.records:
            if r.b == b and r.snr_db == snr_db and r.method == method:
                return r
        raise KeyError((b, snr_db, method))


@dataclass
class EvalResult:
    mean_abs_error_deg: float
    errors: np.ndarray
    labels: np.ndarray
    failures: list[str] = field(default_factory=list)

    @property
    def trials(self) -> int:
        return int(self.errors.size)


def make_batch(scan: ScanDataset, aug_cfg: AugmentationConfig, b: int, batch_size: int,
               rng: np.random.Generator, input_norm: str = "minmax"):
    """Normalized ``b``-beam training rows from fresh augmented scan copies.

    Returns ``(inputs, targets)`` with targets ``alpha / 90``.
    """
    n_alpha = scan.alpha_grid.size
    copies = math.ceil(batch_size / n_alpha)
    idx = slice_indices(scan.full_beam_angles.size, b)
    rows = [augment_scan(scan, aug_cfg, rng).powers[:, idx] for _ in range(copies)]
    inputs = normalize_profile(np.concatenate(rows), input_norm)
    targets = np.tile(scan.alpha_grid / ANGLE_SCALE, copies)
    order = rng.permutation(inputs.shape[0])[:batch_size]
    return inputs[order], targets[order]


def train(scan: ScanDataset, hyper: TrainHyper = TrainHyper(),
          aug_cfg: AugmentationConfig = AugmentationConfig(), b: int = 8, seed: int = 0):
    """Fit one network for ``b`` scan beams; returns ``(model, TrainRun)``.

    Every iteration draws a new batch from newly augmented scan copies, so
    no two iterations see the same data.
    """
    model = init_model(b, hyper.hidden_dim, derive_rng(seed, b, 0), hyper.ln_placement, hyper.input_norm)
    state = OptimizerState.zeros_like(model.params)
    rng = derive_rng(seed, b, 1)
    run = TrainRun(scan, hyper, aug_cfg, b, seed)
    for it in range(hyper.total_iters):
        lr = lr_schedule(it, hyper)
        x, y = make_batch(scan, aug_cfg, b, hyper.batch_size, rng, hyper.input_norm)
        pred, cache = forward(model, x, "train", rng, hyper.dropout_rate)
        loss = mse_loss(pred, y)
        if not np.isfinite(loss):
            raise NumericFaultError(f"non-finite loss at iteration {it}", iteration=it)
        grads = backward(model, cache, mse_grad(pred, y), hyper.l2_coeff)
        try:
            adam_step(model, grads, state, lr, hyper.adam_beta1, hyper.adam_beta2, hyper.adam_eps)
        except NumericFaultError as exc:
            raise NumericFaultError(f"{exc} at iteration {it}", iteration=it) from None
        run.loss_history.append(loss)
        run.lr_history.append(lr)
    return model, run


def generate_test_set(b: int, snr_db: float, trials: int, geom: ArrayGeometry = ArrayGeometry(),
                      seed: int = 0, total_samples: int = TEST_SAMPLES,
                      full_beams: int = FULL_BOOK_SIZE, qam_order: int = 16) -> list[PowerProfile]:
    """``trials`` labeled captures at uniformly drawn angles.

    Each trial uses ``total_samples // b`` samples per beam (512 does not
    split evenly for every ``b``), a random channel phase and peak SNR
    ``snr_db``; ``inf`` gives noiseless captures.
    """
    if trials < 1:
        raise InvalidArgumentError("trials must be >= 1")
    book = slice_beambook(make_beambook(full_beams, geom), b)
    per_beam = total_samples // b
    out = []
    for t in range(trials):
        rng = derive_rng(seed, t)
        alpha = float(rng.uniform(geom.scan_min, geom.scan_max))
        h = np.exp(2j * np.pi * rng.random())
        ch = ChannelParams(gamma=1.0, h=h, snr_db=None if np.isposinf(snr_db) else snr_db)
        out.append(capture_profile(alpha, book, ch, geom, per_beam * b, rng, qam_order))
    return out


def evaluate(estimator: Callable, test_set: Sequence[PowerProfile]) -> EvalResult:
    """Mean ``|alpha - alpha_hat|`` over trials; trials whose estimator raises are excluded."""
    if not test_set:
        raise InvalidArgumentError("empty test set")
    errors, labels, failures = [], [], []
    for i, prof in enumerate(test_set):
        try:
            alpha_hat = float(estimator(prof))
        except Exception as exc:  # noqa: BLE001 - failures are reported, not fatal
            failures.append(f"trial {i}: {type(exc).__name__}: {exc}")
            continue
        errors.append(prof.label_alpha - alpha_hat)
        labels.append(prof.label_alpha)
    errors = np.asarray(errors)
    mean = float(np.mean(np.abs(errors))) if errors.size else float("nan")
    if failures:
        log.warning("%d of %d trials failed", len(failures), len(test_set))
    return EvalResult(mean, errors, np.asarray(labels), failures)


def seed_for_snr(master_seed: int, snr_index: int) -> int:
    """Integer seed of the shared test set for one SNR (same angles for every ``b``)."""
    return int(np.random.SeedSequence([int(master_seed), 2, int(snr_index)]).generate_state(1)[0])


def evaluate_model(model: MlpModel | None, b: int, snr_list: Sequence[float], trials: int, seed: int,
                   geom: ArrayGeometry = ArrayGeometry(), grid_step: float = 0.25,
                   full_beams: int = FULL_BOOK_SIZE) -> list[EvalRecord]:
    """Records for the correlation baseline and (if given) the network at one ``b``."""
    book = slice_beambook(make_beambook(full_beams, geom), b)
    estimators = [CorrelationEstimator(build_grid(book, geom, grid_step))]
    if model is not None:
        estimators.append(MlpEstimator(model))
    records = []
    for k, snr in enumerate(snr_list):
        tests = generate_test_set(b, snr, trials, geom, seed_for_snr(seed, k), full_beams=full_beams)
        for est in estimators:
            res = evaluate(est, tests)
            records.append(EvalRecord(b, float(snr), est.name, res.mean_abs_error_deg,
                                      res.trials, int(seed), len(res.failures)))
    return records


def _train_job(args):
    scan, hyper, aug_cfg, b, seed = args
    return train(scan, hyper, aug_cfg, b, seed)


def compare(scan: ScanDataset, b_list: Sequence[int], snr_list: Sequence[float], trials: int = 20,
            seed: int = 0, hyper: TrainHyper = TrainHyper(),
            aug_cfg: AugmentationConfig = AugmentationConfig(), geom: ArrayGeometry | None = None,
            grid_step: float = 0.25, jobs: int = 1) -> EvalReport:
    """Train one network per ``b`` and score both methods on shared test sets.

    If training for some ``b`` fails, its mlp rows are dropped and the corr
    rows are still reported; the failure is logged.
    """
    if not b_list or not snr_list:
        raise InvalidArgumentError("b_list and snr_list must be non-empty")
    geom = geom or scan.geom
    full = scan.full_beam_angles.size
    jobs_args = [(scan, hyper, aug_cfg, int(b), int(seed)) for b in b_list]
    if jobs > 1 and len(b_list) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_train_job, a) for a in jobs_args]
            results = []
            for f in futures:
                try:
                    results.append(f.result())
                except NumericFaultError as exc:
                    results.append(exc)
    else:
        results = []
        for a in jobs_args:
            try:
                results.append(_train_job(a))
            except NumericFaultError as exc:
                results.append(exc)
    report = EvalReport()
    for b, res in zip(b_list, results):
        b = int(b)
        if isinstance(res, Exception):
            log.error("training for b=%d failed: %s", b, res)
            model = None
        else:
            model, run = res
            report.models[b] = model
            report.runs[b] = run
        report.records.extend(evaluate_model(model, b, snr_list, trials, seed, geom, grid_step, full))
    return report
