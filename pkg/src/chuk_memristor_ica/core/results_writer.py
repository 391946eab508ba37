#!/usr/bin/env python3
# chuk_memristor_ica/core/results_writer.py
"""
Single writer for every output file of a run.

CSV tables start with a provenance comment recording the configuration hash
and seed. Writes go through one lock so concurrent pipelines never
interleave files.
"""

import logging
import threading
from pathlib import Path
from typing import Optional

import pandas as pd

from .imaging import GrayImage, save_pgm

class ResultsWriter:
    """Writes CSV tables and PGM images into one output directory."""

    def __init__(self, output_dir: str | Path, config_sha256: str, seed: int):
        self.output_dir = Path(output_dir)
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.config_sha256 = config_sha256
        self.seed = seed
        self.created_files: list[Path] = []
        self.logger = logging.getLogger(__name__)
        self._lock = threading.Lock()

    @property
    def provenance(self) -> str:
        return f"# config_sha256={self.config_sha256} seed={self.seed}"

    def write_table(self, name: str, rows: list[dict], columns: Optional[list[str]] = None) -> Path:
        """Write ``rows`` as ``<name>.csv`` (header row always present)."""
        frame = pd.DataFrame(rows, columns=columns)
        path = self.output_dir / f"{name}.csv"
        with self._lock:
            with open(path, 'w', newline='', encoding='utf-8') as f:
                f.write(self.provenance + "\n")
                frame.to_csv(f, index=False, float_format="%.12g", lineterminator="\n")
            self.created_files.append(path)
        self.logger.debug("Wrote %d rows to %s", len(frame), path)
        return path

    def write_image(self, name: str, image: GrayImage) -> Path:
        """Write ``image`` as ``<name>.pgm``."""
        path = self.output_dir / f"{name}.pgm"
        with self._lock:
            save_pgm(image, path)
            self.created_files.append(path)
        self.logger.debug("Wrote %s", path)
        return path
