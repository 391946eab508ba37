# chuk_memristor_ica/__init__.py
"""Memristor crossbar simulator for ICA-based blind image separation."""

__version__ = "0.1.0"
