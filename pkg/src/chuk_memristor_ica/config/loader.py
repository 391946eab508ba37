#!/usr/bin/env python3
# chuk_memristor_ica/config/loader.py
"""
Configuration loading.

A user JSON file is merged over the packaged ``default_config.json`` (nested
sections merge key by key), validated into a RunConfig, and then adjusted by
command-line overrides.
"""

import hashlib
import json
import logging
from importlib import resources
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError

from ..core.base import ConfigError
from .models import RunConfig

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = "default_config.json"
PAPER_SCALE_TRACE_EVERY = 10

def load_defaults() -> dict[str, Any]:
    """The packaged default configuration as plain data."""
    text = resources.files("chuk_memristor_ica").joinpath(DEFAULT_CONFIG).read_text(encoding="utf-8")
    return json.loads(text)

def merge(base: dict, override: dict) -> dict:
    """Recursive merge; dictionaries merge, everything else is replaced."""
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = value
    return merged

def load_config(path: Optional[str | Path] = None) -> RunConfig:
    """Load ``path`` over the defaults (defaults only when ``path`` is None)."""
    data = load_defaults()
    source = "defaults"
    if path is not None:
        path = Path(path)
        try:
            override = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise ConfigError(f"Config file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(override, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")
        data = merge(data, override)
        source = str(path)
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration in {source}:\n{e}") from e
    logger.debug("Loaded configuration from %s", source)
    return cfg

def apply_overrides(cfg: RunConfig, seed: Optional[int] = None, output_dir: Optional[str] = None,
                    paper_scale: bool = False) -> RunConfig:
    """
    Command-line overrides. ``seed`` replaces the master seed and every
    derived seed (FastICA initialization, Monte Carlo draws).
    """
    update: dict[str, Any] = {}
    if seed is not None:
        update.update(
            seed=seed,
            acy=cfg.acy.model_copy(update={'seed': seed}),
            fastica=cfg.fastica.model_copy(update={'seed': seed}),
            variation=cfg.variation.model_copy(update={'seed': seed}),
        )
    if output_dir is not None:
        update['output_dir'] = str(output_dir)
    if paper_scale:
        update['image_size'] = cfg.paper_scale_size
        update['trace_every'] = max(cfg.trace_every, PAPER_SCALE_TRACE_EVERY)
    return cfg.model_copy(update=update) if update else cfg

def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the canonical JSON form."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
