#!/usr/bin/env python3
# src/chuk_memristor_ica/config/__init__.py
"""
Run configuration: pydantic models and the JSON loader.
"""

from .loader import apply_overrides, config_hash, load_config
from .models import CrossbarConfig, IcaConfig, MetricsConfig, RunConfig, VariationSpec

__all__ = [
    'apply_overrides',
    'config_hash',
    'load_config',
    'CrossbarConfig',
    'IcaConfig',
    'MetricsConfig',
    'RunConfig',
    'VariationSpec'
]
