#!/usr/bin/env python3
# chuk_memristor_ica/core/metrics.py
"""
Image quality measures: MSE, PSNR, SSIM and gradient similarity (GSM),
plus the percentage improvement of one pipeline over another.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from scipy import ndimage, signal

from ..config.models import MetricsConfig
from .base import MetricError

logger = logging.getLogger(__name__)

METRIC_NAMES = ("ssim", "gsm", "psnr", "mse")

@dataclass
class QualityReport:
    """Quality of one output image (or the mean over a pipeline's images)."""
    pipeline: str
    image: str
    mse: float
    psnr_db: Optional[float]    # None: images identical
    ssim: float
    gsm: float

    def value(self, metric: str) -> Optional[float]:
        return self.psnr_db if metric == "psnr" else getattr(self, metric)

    def as_row(self) -> dict:
        return asdict(self)

def _pixels(image) -> np.ndarray:
    return np.asarray(getattr(image, "pixels", image), dtype=np.float64)

def _pair(a, b, min_side: int = 1) -> tuple[np.ndarray, np.ndarray]:
    a, b = _pixels(a), _pixels(b)
    if a.shape != b.shape:
        raise MetricError(f"Image sizes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2 or min(a.shape) < min_side:
        raise MetricError(f"Images of shape {a.shape} are too small (need at least {min_side}x{min_side})")
    return a, b

# ═══════════════════════════════════════════════════════════════════════════
# MEASURES
# ═══════════════════════════════════════════════════════════════════════════

def mse(a, b) -> float:
    a, b = _pair(a, b)
    return float(np.mean((a - b) ** 2))

def psnr(a, b, data_range: float = 255.0) -> Optional[float]:
    """Peak signal-to-noise ratio in dB, or None when the images are identical."""
    error = mse(a, b)
    if error == 0.0:
        return None
    return float(10.0 * np.log10(data_range ** 2 / error))

def gaussian_window(size: int, sigma: float) -> np.ndarray:
    axis = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-axis ** 2 / (2.0 * sigma ** 2))
    window = np.outer(g, g)
    return window / window.sum()

def ssim(a, b, cfg: MetricsConfig | None = None) -> float:
    """Mean structural similarity over Gaussian-weighted local windows."""
    cfg = cfg or MetricsConfig()
    a, b = _pair(a, b, cfg.ssim_window)
    window = gaussian_window(cfg.ssim_window, cfg.ssim_sigma)
    c1 = (cfg.ssim_k1 * cfg.data_range) ** 2
    c2 = (cfg.ssim_k2 * cfg.data_range) ** 2

    def local(x):
        return signal.convolve2d(x, window, mode="valid")

    mu_a, mu_b = local(a), local(b)
    var_a = local(a * a) - mu_a * mu_a
    var_b = local(b * b) - mu_b * mu_b
    cov_ab = local(a * b) - mu_a * mu_b
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov_ab + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return float(ssim_map.mean())

def gradient_magnitude(image) -> np.ndarray:
    """Sobel gradient magnitude with reflected borders."""
    pixels = _pixels(image)
    gx = ndimage.sobel(pixels, axis=1, mode="reflect")
    gy = ndimage.sobel(pixels, axis=0, mode="reflect")
    return np.hypot(gx, gy)

def gsm(a, b, cfg: MetricsConfig | None = None) -> float:
    """Mean gradient-magnitude similarity (2 g_a g_b + C) / (g_a² + g_b² + C)."""
    cfg = cfg or MetricsConfig()
    a, b = _pair(a, b, 3)
    ga, gb = gradient_magnitude(a), gradient_magnitude(b)
    similarity = (2.0 * ga * gb + cfg.gsm_c) / (ga * ga + gb * gb + cfg.gsm_c)
    return float(similarity.mean())

# ═══════════════════════════════════════════════════════════════════════════
# REPORTS
# ═══════════════════════════════════════════════════════════════════════════

def evaluate_pair(pipeline: str, image: str, output, reference,
                  cfg: MetricsConfig | None = None) -> QualityReport:
    cfg = cfg or MetricsConfig()
    return QualityReport(
        pipeline=pipeline,
        image=image,
        mse=mse(output, reference),
        psnr_db=psnr(output, reference, cfg.data_range),
        ssim=ssim(output, reference, cfg),
        gsm=gsm(output, reference, cfg),
    )

def summarize(reports: list[QualityReport], pipeline: str | None = None) -> QualityReport:
    """Average per-image reports into one row (PSNR over the non-identical images)."""
    if not reports:
        raise MetricError("No reports to summarize")
    psnrs = [r.psnr_db for r in reports if r.psnr_db is not None]
    return QualityReport(
        pipeline=pipeline or reports[0].pipeline,
        image="mean",
        mse=float(np.mean([r.mse for r in reports])),
        psnr_db=float(np.mean(psnrs)) if psnrs else None,
        ssim=float(np.mean([r.ssim for r in reports])),
        gsm=float(np.mean([r.gsm for r in reports])),
    )

def improvement_pct(memristive: QualityReport, software: QualityReport) -> dict[str, Optional[float]]:
    """
    Percentage by which the memristive pipeline beats the software one.
    Positive means better: higher SSIM/GSM/PSNR, lower MSE. None when the
    software value is zero or PSNR is undefined.
    """
    result: dict[str, Optional[float]] = {}
    for metric in METRIC_NAMES:
        mem, sw = memristive.value(metric), software.value(metric)
        if mem is None or sw is None or sw == 0.0:
            result[metric] = None
        elif metric == "mse":
            result[metric] = 100.0 * (sw - mem) / abs(sw)
        else:
            result[metric] = 100.0 * (mem - sw) / abs(sw)
    return result

def improvement_row(algorithm: str, memristive: QualityReport, software: QualityReport) -> dict:
    """One row of the improvement table: ``algorithm, ssim_impr, gsm_impr, psnr_impr, mse_impr``."""
    pct = improvement_pct(memristive, software)
    return {'algorithm': algorithm, **{f"{m}_impr": pct[m] for m in METRIC_NAMES}}
