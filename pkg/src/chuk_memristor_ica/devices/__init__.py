#!/usr/bin/env python3
# src/chuk_memristor_ica/devices/__init__.py
"""
Memristor device models.

Provides the VTEAM single-device model and the crossbar array built from it.
"""

from .memristor import DeviceParams, MemristorState, Pulse, TraceSample
from .crossbar import Crossbar, CrossbarCell

__all__ = [
    'DeviceParams',
    'MemristorState',
    'Pulse',
    'TraceSample',
    'Crossbar',
    'CrossbarCell'
]
