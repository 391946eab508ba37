#!/usr/bin/env python3
# tests/test_metrics.py
"""Image quality metrics and improvement percentages."""

import numpy as np
import pytest

from chuk_memristor_ica.config.models import MetricsConfig
from chuk_memristor_ica.core.base import MetricError
from chuk_memristor_ica.core.metrics import (
    QualityReport,
    evaluate_pair,
    gaussian_window,
    gradient_magnitude,
    gsm,
    improvement_pct,
    improvement_row,
    mse,
    psnr,
    ssim,
    summarize,
)

def report(ssim_value=0.5, gsm_value=0.9, psnr_db=20.0, mse_value=10.0, pipeline="p") -> QualityReport:
    return QualityReport(pipeline=pipeline, image="mean", mse=mse_value, psnr_db=psnr_db,
                         ssim=ssim_value, gsm=gsm_value)

@pytest.fixture
def image(rng) -> np.ndarray:
    return rng.uniform(0, 255, size=(24, 24))

class TestMse:
    def test_identical(self, image):
        assert mse(image, image) == 0.0

    def test_constant_offset(self, image):
        assert mse(image, image + 3.0) == pytest.approx(9.0)

    def test_matches_loop(self, rng):
        a = rng.uniform(0, 255, size=(6, 9))
        b = rng.uniform(0, 255, size=(6, 9))
        total = sum((a[i, j] - b[i, j]) ** 2 for i in range(6) for j in range(9))
        assert mse(a, b) == pytest.approx(total / 54, rel=1e-12)

    def test_size_mismatch(self):
        with pytest.raises(MetricError):
            mse(np.zeros((4, 4)), np.zeros((4, 5)))

class TestPsnr:
    def test_identical_is_undefined(self, image):
        assert psnr(image, image) is None

    def test_unit_error(self):
        a = np.zeros((16, 16))
        assert psnr(a, a + 1.0) == pytest.approx(48.1308, abs=1e-4)

    def test_full_scale_error(self):
        assert psnr(np.zeros((8, 8)), np.full((8, 8), 255.0)) == pytest.approx(0.0, abs=1e-12)

class TestSsim:
    def test_window(self):
        window = gaussian_window(11, 1.5)
        assert window.shape == (11, 11)
        assert window.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(window, window.T)
        assert window.argmax() == 60

    def test_identical(self, image):
        assert ssim(image, image) == 1.0

    def test_constant_images(self):
        a = np.full((16, 16), 100.0)
        assert ssim(a, a) == 1.0

    def test_inverted_is_worse(self, image):
        assert ssim(image, 255.0 - image) < 1.0
        assert ssim(image, 255.0 - image) < ssim(image, image + 5.0)

    def test_symmetric(self, rng):
        a = rng.uniform(0, 255, size=(20, 20))
        b = rng.uniform(0, 255, size=(20, 20))
        assert ssim(a, b) == pytest.approx(ssim(b, a), rel=1e-12)

    def test_matches_explicit_windows(self, rng):
        cfg = MetricsConfig()
        a = rng.uniform(0, 255, size=(13, 14))
        b = 0.6 * a + rng.uniform(0, 80, size=(13, 14))
        w = gaussian_window(11, 1.5)
        c1, c2 = (0.01 * 255) ** 2, (0.03 * 255) ** 2
        values = []
        for i in range(3):
            for j in range(4):
                pa, pb = a[i:i + 11, j:j + 11], b[i:i + 11, j:j + 11]
                mu_a, mu_b = (w * pa).sum(), (w * pb).sum()
                var_a = (w * (pa - mu_a) ** 2).sum()
                var_b = (w * (pb - mu_b) ** 2).sum()
                cov = (w * (pa - mu_a) * (pb - mu_b)).sum()
                values.append((2 * mu_a * mu_b + c1) * (2 * cov + c2)
                              / ((mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)))
        assert ssim(a, b, cfg) == pytest.approx(np.mean(values), rel=1e-9)

    def test_too_small(self):
        with pytest.raises(MetricError):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))

class TestGsm:
    def test_identical(self, image):
        assert gsm(image, image) == 1.0

    def test_constant_images(self):
        assert gsm(np.full((8, 8), 10.0), np.full((8, 8), 200.0)) == 1.0

    def test_gradient_matches_explicit_sobel(self, rng):
        a = rng.uniform(0, 255, size=(7, 9))
        padded = np.pad(a, 1, mode="symmetric")
        smooth = np.array([1.0, 2.0, 1.0])
        expected = np.empty_like(a)
        for i in range(7):
            for j in range(9):
                block = padded[i:i + 3, j:j + 3]
                gx = smooth @ (block[:, 2] - block[:, 0])
                gy = smooth @ (block[2, :] - block[0, :])
                expected[i, j] = np.hypot(gx, gy)
        np.testing.assert_allclose(gradient_magnitude(a), expected, rtol=1e-12, atol=1e-9)

    def test_edges_lost(self):
        a = np.zeros((10, 10))
        a[:, 5:] = 255.0
        assert gsm(a, np.full((10, 10), 128.0)) < 0.9

    def test_too_small(self):
        with pytest.raises(MetricError):
            gsm(np.zeros((2, 2)), np.zeros((2, 2)))

class TestReports:
    def test_evaluate_pair(self, image):
        result = evaluate_pair("fastica_ideal", "source_0", image, image)
        assert result.mse == 0.0
        assert result.psnr_db is None
        assert result.ssim == 1.0 and result.gsm == 1.0
        assert result.value("psnr") is None

    def test_summarize(self):
        rows = [report(0.4, 0.8, 20.0, 10.0), report(0.6, 1.0, None, 0.0)]
        mean = summarize(rows, "acy_ideal")
        assert (mean.pipeline, mean.image) == ("acy_ideal", "mean")
        assert mean.ssim == pytest.approx(0.5)
        assert mean.gsm == pytest.approx(0.9)
        assert mean.mse == pytest.approx(5.0)
        assert mean.psnr_db == 20.0

    def test_summarize_empty(self):
        with pytest.raises(MetricError):
            summarize([])

class TestImprovement:
    def test_identical_pipelines(self):
        pct = improvement_pct(report(), report())
        assert pct == {'ssim': 0.0, 'gsm': 0.0, 'psnr': 0.0, 'mse': 0.0}

    def test_ssim_gain(self):
        pct = improvement_pct(report(ssim_value=0.836), report(ssim_value=0.5))
        assert pct['ssim'] == pytest.approx(67.2)

    def test_mse_halved(self):
        pct = improvement_pct(report(mse_value=5.0), report(mse_value=10.0))
        assert pct['mse'] == pytest.approx(50.0)

    def test_swapping_flips_sign(self):
        a = report(0.7, 0.95, 25.0, 4.0)
        b = report(0.6, 0.90, 22.0, 6.0)
        forward, backward = improvement_pct(a, b), improvement_pct(b, a)
        for metric in forward:
            assert forward[metric] > 0 > backward[metric]

    def test_undefined_psnr(self):
        pct = improvement_pct(report(psnr_db=None), report())
        assert pct['psnr'] is None

    def test_zero_software_value(self):
        pct = improvement_pct(report(mse_value=1.0), report(mse_value=0.0))
        assert pct['mse'] is None

    def test_row_layout(self):
        row = improvement_row("fastica", report(), report())
        assert list(row) == ['algorithm', 'ssim_impr', 'gsm_impr', 'psnr_impr', 'mse_impr']
