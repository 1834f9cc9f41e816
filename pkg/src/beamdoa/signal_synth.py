"""Beam-switched capture simulation.

A QAM stream is cut into ``B`` contiguous segments, each received through a
different beam. Segment powers form the power profile used by both
estimators. Receiver noise is complex white Gaussian with variance set
relative to the noiseless power on the best-aligned beam of the full
beambook ("peak SNR").
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .array_model import ArrayGeometry, Beambook, beam_gain, make_beambook
from .errors import InvalidArgumentError

QAM_ORDERS = (4, 16, 64)
FULL_BOOK_SIZE = 64


def derive_rng(master_seed: int, *indices: int) -> np.random.Generator:
    """Generator for a sub-task, seeded from ``SeedSequence([master_seed, *indices])``."""
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, indices)]))


@dataclass(frozen=True)
class TxSignal:
    samples: np.ndarray
    qam_order: int


@dataclass(frozen=True)
class ChannelParams:
    """Transmit scale ``gamma``, channel coefficient ``h`` and peak SNR in dB.

    ``snr_db=None`` (or ``inf``) means a noiseless receiver.
    """

    gamma: float = 1.0
    h: complex = 1.0 + 0.0j
    snr_db: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma <= 0:
            raise InvalidArgumentError(f"gamma must be > 0, got {self.gamma}")
        if not np.isfinite(abs(self.h)) or abs(self.h) == 0:
            raise InvalidArgumentError(f"|h| must be > 0, got {self.h}")
        if self.snr_db is not None and np.isnan(self.snr_db):
            raise InvalidArgumentError("snr_db must not be NaN")

    @property
    def noiseless(self) -> bool:
        return self.snr_db is None or np.isposinf(self.snr_db)


@dataclass
class PowerProfile:
    values: np.ndarray
    beam_angles: np.ndarray
    label_alpha: float | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.beam_angles = np.asarray(self.beam_angles, dtype=float)
        if self.values.shape != self.beam_angles.shape or self.values.ndim != 1:
            raise InvalidArgumentError("values and beam_angles must be aligned 1-D arrays")
        if self.values.size < 2:
            raise InvalidArgumentError("a power profile needs at least 2 beams")
        if np.any(self.values < 0):
            raise InvalidArgumentError("power values must be non-negative")

    def __len__(self) -> int:
        return self.values.size


@dataclass
class ScanDataset:
    """Calibration powers on an (alpha, beam) grid."""

    alpha_grid: np.ndarray
    full_beam_angles: np.ndarray
    powers: np.ndarray
    snr_db: float
    seed: int
    geom: ArrayGeometry = field(default_factory=ArrayGeometry)

    def __post_init__(self):
        self.alpha_grid = np.asarray(self.alpha_grid, dtype=float)
        self.full_beam_angles = np.asarray(self.full_beam_angles, dtype=float)
        self.powers = np.asarray(self.powers, dtype=float)
        if self.alpha_grid.size == 0 or np.any(np.diff(self.alpha_grid) <= 0):
            raise InvalidArgumentError("alpha grid must be non-empty and strictly increasing")
        if self.powers.shape != (self.alpha_grid.size, self.full_beam_angles.size):
            raise InvalidArgumentError(
                f"powers shape {self.powers.shape} does not match grid "
                f"{self.alpha_grid.size}x{self.full_beam_angles.size}"
            )
        if np.any(self.powers < 0) or not np.all(np.isfinite(self.powers)):
            raise InvalidArgumentError("scan powers must be finite and non-negative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.powers.shape


def generate_qam(n: int, order: int, seed) -> TxSignal:
    """``n`` uniformly drawn symbols of a square QAM constellation with unit mean power.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if order not in QAM_ORDERS:
        raise InvalidArgumentError(f"unsupported QAM order {order}; choose from {QAM_ORDERS}")
    if int(n) != n or n <= 0:
        raise InvalidArgumentError(f"sample count must be positive, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    side = int(round(np.sqrt(order)))
    levels = 2 * np.arange(side) - (side - 1)
    # mean |I + jQ|^2 over the square grid is 2 (order - 1) / 3
    scale = np.sqrt(2.0 * (order - 1) / 3.0)
    i = levels[rng.integers(0, side, size=int(n))]
    q = levels[rng.integers(0, side, size=int(n))]
    return TxSignal(samples=(i + 1j * q) / scale, qam_order=order)


def peak_rx_power(alpha: float, ch: ChannelParams, geom: ArrayGeometry, reference: Beambook | None = None) -> float:
    """Noiseless received power on the best-aligned beam of the reference book.

    Assumes unit-power transmit symbols. The reference defaults to the full
    64-beam book so the resulting SNR does not depend on ``B``.
    """
    if reference is None:
        reference = make_beambook(FULL_BOOK_SIZE, geom)
    g = beam_gain(alpha, reference.angles, geom)
    return float(abs(ch.gamma * ch.h) ** 2 * np.max(np.abs(g) ** 2))


def noise_variance(peak_power: float, snr_db: float) -> float:
    return peak_power / 10.0 ** (snr_db / 10.0)


def complex_noise(shape, variance: float, rng: np.random.Generator) -> np.ndarray:
    std = np.sqrt(variance / 2.0)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def beam_switched_receive(
    sig: TxSignal,
    alpha: float,
    book: Beambook,
    ch: ChannelParams,
    geom: ArrayGeometry,
    rng: np.random.Generator | None = None,
    reference: Beambook | None = None,
) -> list[np.ndarray]:
    """Split the stream into ``len(book)`` segments and apply each beam's gain.

    Segment ``n`` is ``gamma * h * g(alpha, beta_n) * s_n``. If the channel
    has a finite SNR, complex white Gaussian noise is added using ``rng``.
    """
    b = len(book)
    n = sig.samples.size
    if n % b:
        raise InvalidArgumentError(f"signal length {n} is not divisible by the beam count {b}")
    gains = ch.gamma * ch.h * beam_gain(alpha, book.angles, geom)
    segments = sig.samples.reshape(b, n // b) * gains[:, None]
    if not ch.noiseless:
        if rng is None:
            raise InvalidArgumentError("a noisy channel needs an rng")
        var = noise_variance(peak_rx_power(alpha, ch, geom, reference), ch.snr_db)
        segments = segments + complex_noise(segments.shape, var, rng)
    return list(segments)


def segment_power(segment) -> float:
    """Mean squared magnitude of a segment."""
    seg = np.asarray(segment)
    if seg.size == 0:
        raise InvalidArgumentError("cannot take the power of an empty segment")
    return float(np.mean(np.abs(seg) ** 2))


def capture_profile(
    alpha: float,
    book: Beambook,
    ch: ChannelParams,
    geom: ArrayGeometry,
    total_samples: int = 512,
    seed=0,
    qam_order: int = 16,
) -> PowerProfile:
    """One beam-switched capture of ``total_samples`` samples, reduced to a profile."""
    b = len(book)
    if total_samples % b:
        raise InvalidArgumentError(f"total_samples {total_samples} is not divisible by the beam count {b}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sig = generate_qam(total_samples, qam_order, rng)
    segments = beam_switched_receive(sig, alpha, book, ch, geom, rng)
    values = np.array([segment_power(s) for s in segments])
    return PowerProfile(values=values, beam_angles=book.angles, label_alpha=float(alpha))


def alpha_grid(geom: ArrayGeometry, step: float) -> np.ndarray:
    if not np.isfinite(step) or step <= 0:
        raise InvalidArgumentError(f"alpha step must be > 0, got {step}")
    count = int(np.floor((geom.scan_max - geom.scan_min) / step + 1e-9)) + 1
    return geom.scan_min + step * np.arange(count)


def calibration_scan(
    geom: ArrayGeometry = ArrayGeometry(),
    ch: ChannelParams = ChannelParams(snr_db=40.0),
    alpha_step: float = 1.0,
    samples_per_beam: int = 512,
    seed: int = 0,
    full_beams: int = FULL_BOOK_SIZE,
    qam_order: int = 16,
) -> ScanDataset:
    """Exhaustive sweep: every grid angle times every beam of the full book.

    Each cell is the power of ``samples_per_beam`` fresh received samples.
    Row ``i`` uses ``derive_rng(seed, i)`` so rows are independent of each
    other's sample counts.
    """
    if int(samples_per_beam) != samples_per_beam or samples_per_beam < 1:
        raise InvalidArgumentError(f"samples_per_beam must be >= 1, got {samples_per_beam}")
    grid = alpha_grid(geom, alpha_step)
    if grid.size == 0:
        raise InvalidArgumentError("empty alpha grid")
    book = make_beambook(full_beams, geom)
    powers = np.empty((grid.size, len(book)))
    for i, alpha in enumerate(grid):
        rng = derive_rng(seed, i)
        sig = generate_qam(samples_per_beam * len(book), qam_order, rng)
        segments = beam_switched_receive(sig, alpha, book, ch, geom, rng, reference=book)
        powers[i] = np.mean(np.abs(np.asarray(segments)) ** 2, axis=1)
    snr = float("inf") if ch.noiseless else float(ch.snr_db)
    return ScanDataset(grid, book.angles, powers, snr, int(seed), geom)
