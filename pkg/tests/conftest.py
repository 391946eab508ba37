#!/usr/bin/env python3
# tests/conftest.py
"""Shared fixtures: device profiles, the synthetic image pair and small run configs."""

import numpy as np
import pytest

from chuk_memristor_ica.config.loader import load_config
from chuk_memristor_ica.core.imaging import flatten, mix, quantize, synthetic_sources
from chuk_memristor_ica.devices.memristor import DeviceParams

DEFAULT_MIXING = [[0.7, 0.3], [0.3, 0.7]]

@pytest.fixture
def demo_params() -> DeviceParams:
    return DeviceParams(r_on=40e3, r_off=152e6)

@pytest.fixture
def mc_params() -> DeviceParams:
    return DeviceParams(r_on=150e3, r_off=152e6)

@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)

@pytest.fixture(scope="session")
def sources64():
    return synthetic_sources(64)

@pytest.fixture(scope="session")
def mixtures64(sources64):
    mixtures, _ = mix(sources64, DEFAULT_MIXING)
    return [quantize(m) for m in mixtures]

@pytest.fixture(scope="session")
def source_signals64(sources64) -> np.ndarray:
    return np.stack([flatten(s) for s in sources64])

@pytest.fixture
def run_config(tmp_path):
    """Default configuration writing into a temporary directory, with 32x32 images."""
    cfg = load_config()
    return cfg.model_copy(update={'output_dir': str(tmp_path / "results"), 'image_size': 32})
