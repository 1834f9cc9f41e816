"""Multipath and noise augmentation of a calibration scan.

Each augmented copy of the (alpha, beam) power grid gets

1. a sum of ``M`` 2-D Gaussian bumps standing in for scattered NLOS paths,
2. Rician mixing with the clean scan at a drawn K-factor,
3. white Gaussian noise in the power domain at a drawn SNR, clamped at zero.

A bump spreads over neighbouring beams and angles, which keeps the
multipath distortion spatially correlated instead of i.i.d. per cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .signal_synth import ScanDataset


def _interval(name, value, lower_bound=None, strict=False):
    lo, hi = value
    if not (lo <= hi) or np.isnan(lo) or np.isnan(hi):
        raise InvalidArgumentError(f"{name}: need lower <= upper, got {value}")
    if lower_bound is not None:
        bad = lo <= lower_bound if strict else lo < lower_bound
        if bad:
            op = ">" if strict else ">="
            raise InvalidArgumentError(f"{name}: lower bound must be {op} {lower_bound}, got {lo}")
    return (lo, hi)


@dataclass(frozen=True)
class AugmentationConfig:
    """Sampling ranges for one augmented scan copy.

    ``p_rel_range`` is relative to the peak power of the clean scan. Infinite
    ``k_range`` / ``snr_range_db`` bounds switch the respective stage off.
    """

    m_range: tuple[int, int] = (1, 8)
    p_rel_range: tuple[float, float] = (0.05, 1.0)
    alpha_i_range: tuple[float, float] = (-45.0, 45.0)
    beta_i_range: tuple[float, float] = (-45.0, 45.0)
    sigma_alpha_range: tuple[float, float] = (2.0, 10.0)
    sigma_beta_range: tuple[float, float] = (2.0, 10.0)
    k_range: tuple[float, float] = (1.0, 10.0)
    snr_range_db: tuple[float, float] = (0.0, 20.0)

    def __post_init__(self):
        _interval("m_range", self.m_range, 0)
        if any(int(m) != m for m in self.m_range):
            raise InvalidArgumentError(f"m_range must hold integers, got {self.m_range}")
        _interval("p_rel_range", self.p_rel_range, 0)
        _interval("alpha_i_range", self.alpha_i_range)
        _interval("beta_i_range", self.beta_i_range)
        _interval("sigma_alpha_range", self.sigma_alpha_range, 0, strict=True)
        _interval("sigma_beta_range", self.sigma_beta_range, 0, strict=True)
        _interval("k_range", self.k_range, 0)
        _interval("snr_range_db", self.snr_range_db)

    @classmethod
    def disabled(cls) -> "AugmentationConfig":
        """No NLOS peaks, pure LOS, no noise: augmentation is the identity."""
        inf = float("inf")
        return cls(m_range=(0, 0), k_range=(inf, inf), snr_range_db=(inf, inf))


@dataclass(frozen=True)
class NlosPeaks:
    """Drawn parameters of the NLOS bumps; widths are shared by all bumps."""

    powers: np.ndarray
    alpha_centers: np.ndarray
    beta_centers: np.ndarray
    sigma_alpha: float
    sigma_beta: float

    @property
    def count(self) -> int:
        return int(self.powers.size)


@dataclass
class AugmentedScan:
    powers: np.ndarray
    peaks: NlosPeaks
    k: float
    snr_db: float

    @property
    def m(self) -> int:
        return self.peaks.count


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(lo) if lo == hi else float(rng.uniform(lo, hi))


def sample_nlos_peaks(cfg: AugmentationConfig, rng: np.random.Generator, peak_power: float = 1.0) -> NlosPeaks:
    m = int(rng.integers(cfg.m_range[0], cfg.m_range[1] + 1))
    lo, hi = cfg.p_rel_range
    powers = peak_power * (np.full(m, float(lo)) if lo == hi else rng.uniform(lo, hi, m))
    lo, hi = cfg.alpha_i_range
    alphas = np.full(m, float(lo)) if lo == hi else rng.uniform(lo, hi, m)
    lo, hi = cfg.beta_i_range
    betas = np.full(m, float(lo)) if lo == hi else rng.uniform(lo, hi, m)
    return NlosPeaks(
        powers=powers,
        alpha_centers=alphas,
        beta_centers=betas,
        sigma_alpha=_uniform(rng, cfg.sigma_alpha_range),
        sigma_beta=_uniform(rng, cfg.sigma_beta_range),
    )


def render_nlos_peaks(peaks: NlosPeaks, alpha_grid, beam_angles) -> np.ndarray:
    """Evaluate the sum of Gaussian bumps on the (alpha, beam) grid."""
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    beam_angles = np.asarray(beam_angles, dtype=float)
    if alpha_grid.size == 0 or beam_angles.size == 0:
        raise InvalidArgumentError("grids must be non-empty")
    if not (peaks.sigma_alpha > 0 and peaks.sigma_beta > 0):
        raise InvalidArgumentError(
            f"spread parameters must be > 0, got {peaks.sigma_alpha}, {peaks.sigma_beta}"
        )
    out = np.zeros((alpha_grid.size, beam_angles.size))
    for p, ac, bc in zip(peaks.powers, peaks.alpha_centers, peaks.beta_centers):
        ea = np.exp(-((alpha_grid - ac) ** 2) / (2.0 * peaks.sigma_alpha**2))
        eb = np.exp(-((beam_angles - bc) ** 2) / (2.0 * peaks.sigma_beta**2))
        out += p * np.outer(ea, eb)
    return out


def nlos_profile(cfg: AugmentationConfig, alpha_grid, beam_angles, rng: np.random.Generator, peak_power: float = 1.0) -> np.ndarray:
    """Draw NLOS peaks from ``cfg`` and render them on the grid."""
    return render_nlos_peaks(sample_nlos_peaks(cfg, rng, peak_power), alpha_grid, beam_angles)


def rician_mix(p_los, p_nlos, k: float) -> np.ndarray:
    """``K/(K+1) * p_los + 1/(K+1) * p_nlos``; ``K = inf`` returns ``p_los``."""
    p_los = np.asarray(p_los, dtype=float)
    p_nlos = np.asarray(p_nlos, dtype=float)
    if p_los.shape != p_nlos.shape:
        raise InvalidArgumentError(f"shape mismatch: {p_los.shape} vs {p_nlos.shape}")
    if np.isnan(k) or k < 0:
        raise InvalidArgumentError(f"Rician factor must be >= 0, got {k}")
    if np.isposinf(k):
        return p_los.copy()
    w_nlos = 1.0 / (k + 1.0)
    return (1.0 - w_nlos) * p_los + w_nlos * p_nlos


def power_noise_std(p, snr_db: float) -> float:
    return float(np.max(p)) / 10.0 ** (snr_db / 10.0)


def add_power_noise(p, snr_db: float, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. Gaussian noise with std ``max(p) / 10^(snr_db/10)``, then clamp at 0."""
    p = np.asarray(p, dtype=float)
    if p.size == 0:
        raise InvalidArgumentError("empty power matrix")
    if np.isposinf(snr_db):
        return p.copy()
    noisy = p + power_noise_std(p, snr_db) * rng.standard_normal(p.shape)
    return np.maximum(noisy, 0.0)


def augment_scan(scan: ScanDataset, cfg: AugmentationConfig, rng: np.random.Generator) -> AugmentedScan:
    peak = float(np.max(scan.powers))
    peaks = sample_nlos_peaks(cfg, rng, peak)
    p_nlos = render_nlos_peaks(peaks, scan.alpha_grid, scan.full_beam_angles)
    k = _uniform(rng, cfg.k_range)
    snr = _uniform(rng, cfg.snr_range_db)
    mixed = rician_mix(scan.powers, p_nlos, k)
    return AugmentedScan(add_power_noise(mixed, snr, rng), peaks, k, snr)
