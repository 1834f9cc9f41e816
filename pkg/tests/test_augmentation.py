import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from beamdoa.augmentation import (
    AugmentationConfig,
    NlosPeaks,
    add_power_noise,
    augment_scan,
    nlos_profile,
    power_noise_std,
    render_nlos_peaks,
    rician_mix,
    sample_nlos_peaks,
)
from beamdoa.errors import InvalidArgumentError
from beamdoa.signal_synth import calibration_scan

ALPHAS = np.arange(-45.0, 46.0)
BEAMS = np.linspace(-45, 45, 64)


def single_peak_cfg(alpha_c, beta_c, sigma_a=4.0, sigma_b=3.0):
    return AugmentationConfig(
        m_range=(1, 1), p_rel_range=(1.0, 1.0), alpha_i_range=(alpha_c, alpha_c),
        beta_i_range=(beta_c, beta_c), sigma_alpha_range=(sigma_a, sigma_a),
        sigma_beta_range=(sigma_b, sigma_b),
    )


@pytest.fixture(scope="module")
def scan():
    return calibration_scan(seed=1)


def test_single_peak_is_one_at_its_center():
    P = nlos_profile(single_peak_cfg(10.0, BEAMS[20]), ALPHAS, BEAMS, np.random.default_rng(0))
    assert P[55, 20] == pytest.approx(1.0, abs=1e-15)
    assert P.max() == P[55, 20]


def test_single_peak_one_sigma_offset():
    # centre at alpha=10 with sigma_alpha=4: alpha=14 is one sigma away along alpha
    P = nlos_profile(single_peak_cfg(10.0, BEAMS[20]), ALPHAS, BEAMS, np.random.default_rng(0))
    assert P[59, 20] == pytest.approx(np.exp(-0.5), rel=1e-12)
    assert np.exp(-0.5) == pytest.approx(0.60653, abs=1e-5)


def test_zero_components_give_zero_matrix():
    cfg = AugmentationConfig(m_range=(0, 0))
    P = nlos_profile(cfg, ALPHAS, BEAMS, np.random.default_rng(0))
    assert P.shape == (91, 64) and not P.any()


def test_degenerate_sigma_rejected():
    with pytest.raises(InvalidArgumentError):
        AugmentationConfig(sigma_alpha_range=(0.0, 1.0))
    peaks = NlosPeaks(np.ones(1), np.zeros(1), np.zeros(1), sigma_alpha=0.0, sigma_beta=1.0)
    with pytest.raises(InvalidArgumentError):
        render_nlos_peaks(peaks, ALPHAS, BEAMS)


def test_config_interval_validation():
    with pytest.raises(InvalidArgumentError):
        AugmentationConfig(m_range=(3, 1))
    with pytest.raises(InvalidArgumentError):
        AugmentationConfig(k_range=(-1.0, 2.0))


@settings(max_examples=40)
@given(st.integers(0, 2**32 - 1))
def test_nlos_nonnegative_and_bounded_by_total_power(seed):
    rng = np.random.default_rng(seed)
    cfg = AugmentationConfig()
    peaks = sample_nlos_peaks(cfg, rng, peak_power=3.0)
    P = render_nlos_peaks(peaks, ALPHAS, BEAMS)
    assert np.all(P >= 0)
    assert np.all(P <= peaks.powers.sum() + 1e-12)


def test_rician_examples():
    a = np.array([[1.0, 4.0], [0.0, 2.0]])
    b = np.array([[3.0, 0.0], [2.0, 2.0]])
    np.testing.assert_allclose(rician_mix(a, b, 1.0), (a + b) / 2, rtol=1e-15)
    np.testing.assert_array_equal(rician_mix(a, b, 0.0), b)
    np.testing.assert_allclose(rician_mix(a + 1, b, 1e9), a + 1, rtol=1e-8)
    np.testing.assert_array_equal(rician_mix(a, b, np.inf), a)
    with pytest.raises(InvalidArgumentError):
        rician_mix(a, b[:1], 1.0)


@settings(max_examples=200)
@given(st.floats(0, 1e6), st.integers(0, 2**32 - 1))
def test_rician_convex_combination(k, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((2, 5, 7)) * 10
    out = rician_mix(a, b, k)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    tol = 1e-12 * np.maximum(hi, 1)
    assert np.all(out >= lo - tol) and np.all(out <= hi + tol)


def test_power_noise_noiseless_sentinel():
    p = np.arange(6.0).reshape(2, 3)
    np.testing.assert_array_equal(add_power_noise(p, np.inf, np.random.default_rng(0)), p)


def test_power_noise_std_matches_definition():
    # large offset keeps clamping inactive so the raw noise std is observable
    p = 100.0 + np.random.default_rng(1).random((91, 64))
    out = add_power_noise(p, 20.0, np.random.default_rng(2))
    sigma = power_noise_std(p, 20.0)
    assert sigma == pytest.approx(p.max() / 100)
    assert np.std(out - p) == pytest.approx(sigma, rel=0.1)


def test_power_noise_clamps(scan):
    out = add_power_noise(scan.powers, 0.0, np.random.default_rng(0))
    assert np.all(out >= 0)


def test_identity_augmentation(scan):
    aug = augment_scan(scan, AugmentationConfig.disabled(), np.random.default_rng(0))
    np.testing.assert_array_equal(aug.powers, scan.powers)
    assert aug.m == 0 and np.isinf(aug.k) and np.isinf(aug.snr_db)


def test_augmentation_deterministic(scan):
    a = augment_scan(scan, AugmentationConfig(), np.random.default_rng(5))
    b = augment_scan(scan, AugmentationConfig(), np.random.default_rng(5))
    np.testing.assert_array_equal(a.powers, b.powers)
    assert (a.m, a.k, a.snr_db) == (b.m, b.k, b.snr_db)


def test_default_augmentation_changes_almost_everything(scan):
    aug = augment_scan(scan, AugmentationConfig(), np.random.default_rng(9))
    assert np.mean(aug.powers != scan.powers) >= 0.99
    assert 1 <= aug.m <= 8 and 1 <= aug.k <= 10 and 0 <= aug.snr_db <= 20


def rayleigh_limit_pvalue(seed=0, n_points=200):
    """One-sided KS of NLOS power at random cells vs an exponential of fitted mean.

    ``alternative="less"`` rejects when the empirical CDF drops below the
    exponential one, i.e. when deep fades are rarer than under Rayleigh fading.
    """
    cfg = AugmentationConfig(m_range=(200, 200), sigma_alpha_range=(2.0, 2.0), sigma_beta_range=(2.0, 2.0))
    rng = np.random.default_rng(seed)
    P = nlos_profile(cfg, ALPHAS, BEAMS, rng)
    pts = P[rng.integers(0, ALPHAS.size, n_points), rng.integers(0, BEAMS.size, n_points)]
    return stats.kstest(pts, "expon", args=(0, pts.mean()), alternative="less").pvalue


def test_rayleigh_limit_ks():
    assert rayleigh_limit_pvalue(seed=0) > 0.01


def beam_lag1_autocorr(P):
    x = P[:, :-1].ravel() - P.mean()
    y = P[:, 1:].ravel() - P.mean()
    return float(np.dot(x, y) / np.sqrt(np.dot(x, x) * np.dot(y, y)))


@pytest.mark.parametrize("seed", range(5))
def test_spatial_correlation_along_beams(seed):
    spacing = BEAMS[1] - BEAMS[0]
    s = 2 * spacing
    cfg = AugmentationConfig(sigma_beta_range=(s, s))
    P = nlos_profile(cfg, ALPHAS, BEAMS, np.random.default_rng(seed))
    assert beam_lag1_autocorr(P) > 0.5
