#!/usr/bin/env python3
# chuk_memristor_ica/core/imaging.py
"""
Grayscale image handling for blind image separation.

Images are binary PGM files (P5, maxval 255). They are flattened row-major
into 1 x (w*h) signals, mixed linearly, and after separation the outputs
are matched back to the reference images (ICA leaves order, sign and scale
undetermined).
"""

import io
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .base import (
    AlignmentError,
    DimensionError,
    ImageError,
    ImageFormatError,
    MixingError,
    pearson,
)

logger = logging.getLogger(__name__)

PIXEL_MAX = 255.0
SINGULAR_DET = 1e-9

@dataclass
class GrayImage:
    """Height x width grid of real intensities."""
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ImageError(f"Image must be a non-empty 2-D grid, got shape {self.pixels.shape}")
        if not np.all(np.isfinite(self.pixels)):
            raise ImageError("Image contains non-finite intensities")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

@dataclass
class MixRecord:
    """Mixing matrix and the global affine rescale applied to the mixtures."""
    matrix: np.ndarray
    scale: float = 1.0
    offset: float = 0.0

    def apply(self, sources: list[GrayImage]) -> list[GrayImage]:
        """Recompute the mixtures from the sources."""
        mixed = self.matrix @ np.stack([flatten(s) for s in sources])
        height, width = sources[0].shape
        return [unflatten(row * self.scale + self.offset, width, height) for row in mixed]

    def to_rows(self) -> list[dict]:
        rows = [
            {'entry': f"a[{i}][{j}]", 'value': float(self.matrix[i, j])}
            for i in range(self.matrix.shape[0])
            for j in range(self.matrix.shape[1])
        ]
        rows.append({'entry': 'scale', 'value': self.scale})
        rows.append({'entry': 'offset', 'value': self.offset})
        return rows

@dataclass
class AlignmentRecord:
    """How one output was matched to its reference."""
    reference: int
    output: int
    sign: int
    slope: float
    intercept: float
    correlation: float

# ═══════════════════════════════════════════════════════════════════════════
# PGM I/O
# ═══════════════════════════════════════════════════════════════════════════

def _parse_pgm_header(raw: bytes) -> tuple[int, int, int]:
    """Return ``(width, height, payload_offset)`` of a binary PGM."""
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos:pos + 1].isspace():
            pos += 1
        if raw[pos:pos + 1] == b"#":
            newline = raw.find(b"\n", pos)
            pos = len(raw) if newline < 0 else newline + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise ImageFormatError("PGM header is truncated")
        tokens.append(raw[start:pos])
        if len(tokens) == 1 and tokens[0] != b"P5":
            raise ImageFormatError(f"Unsupported image format {tokens[0][:8]!r}; only binary PGM (P5) is read")

    if not raw[pos:pos + 1].isspace():
        raise ImageFormatError("PGM header is not followed by whitespace")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise ImageFormatError(f"Malformed PGM header: {e}") from e
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"Invalid PGM dimensions {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"Unsupported PGM maxval {maxval}; only 255 is read")
    return width, height, pos + 1

def load_pgm(path: str | Path) -> GrayImage:
    """Read a binary PGM (P5, maxval 255)."""
    raw = Path(path).read_bytes()
    try:
        width, height, offset = _parse_pgm_header(raw)
    except ImageFormatError as e:
        raise ImageFormatError(f"{path}: {e}") from e
    payload = raw[offset:offset + width * height]
    if len(payload) < width * height:
        raise ImageFormatError(f"{path}: truncated payload ({len(payload)} of {width * height} bytes)")
    image = Image.frombytes("L", (width, height), payload)
    logger.debug("Loaded %s (%dx%d)", path, width, height)
    return GrayImage(np.asarray(image, dtype=np.float64))

def save_pgm(image: GrayImage, path: str | Path) -> Path:
    """Write ``image`` as binary PGM, clamping and rounding to 0..255."""
    path = Path(path)
    pixels = quantize(image).pixels.astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PPM")
    path.write_bytes(buffer.getvalue())
    return path

# ═══════════════════════════════════════════════════════════════════════════
# SIGNALS
# ═══════════════════════════════════════════════════════════════════════════

def flatten(image: GrayImage) -> np.ndarray:
    """Row-major 1-D signal of length w*h."""
    return image.pixels.reshape(-1).copy()

def unflatten(signal, width: int, height: int) -> GrayImage:
    signal = np.asarray(signal, dtype=np.float64).ravel()
    if signal.size != width * height:
        raise DimensionError(f"Signal of length {signal.size} cannot fill a {width}x{height} image")
    return GrayImage(signal.reshape(height, width))

def quantize(image: GrayImage) -> GrayImage:
    """Clamp and round to 8-bit levels, as stored in a PGM file."""
    return GrayImage(np.rint(np.clip(image.pixels, 0.0, PIXEL_MAX)))

def rescale_to_range(signal, low: float = 0.0, high: float = PIXEL_MAX) -> np.ndarray:
    """Affinely map min -> ``low`` and max -> ``high`` (for display without references)."""
    signal = np.asarray(signal, dtype=np.float64)
    lo, hi = float(signal.min()), float(signal.max())
    if hi == lo:
        return np.full_like(signal, min(max(lo, low), high))
    return low + (signal - lo) * (high - low) / (hi - lo)

# ═══════════════════════════════════════════════════════════════════════════
# MIXING AND ALIGNMENT
# ═══════════════════════════════════════════════════════════════════════════

def mix(sources: list[GrayImage], a) -> tuple[list[GrayImage], MixRecord]:
    """
    x_k = sum_i a_ki s_i pixelwise.

    If any mixed intensity leaves [0, 255], all mixtures are rescaled with
    one common affine map; the map is reported in the returned record.
    """
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    n = len(sources)
    if a.shape != (n, n):
        raise MixingError(f"Mixing matrix {a.shape} does not match {n} source images")
    if abs(np.linalg.det(a)) <= SINGULAR_DET:
        raise MixingError(f"Mixing matrix is singular (det={np.linalg.det(a):.3e})")
    shapes = {s.shape for s in sources}
    if len(shapes) != 1:
        raise MixingError(f"Source images differ in size: {sorted(shapes)}")

    mixed = a @ np.stack([flatten(s) for s in sources])
    lo, hi = float(mixed.min()), float(mixed.max())
    record = MixRecord(matrix=a)
    if lo < 0.0 or hi > PIXEL_MAX:
        if hi == lo:
            record.offset = min(max(lo, 0.0), PIXEL_MAX) - lo
        else:
            record.scale = PIXEL_MAX / (hi - lo)
            record.offset = -lo * record.scale
        logger.info("Rescaling mixtures by %.6f with offset %.6f", record.scale, record.offset)
        mixed = mixed * record.scale + record.offset

    height, width = sources[0].shape
    return [unflatten(row, width, height) for row in mixed], record

def align_outputs(outputs, references) -> tuple[np.ndarray, list[AlignmentRecord]]:
    """
    Match each reference with an output by greedy max-|correlation|, fix the
    sign, then least-squares fit the output affinely onto the reference.

    Returns the aligned outputs in reference order and one record per pair.
    """
    outputs = np.atleast_2d(np.asarray(outputs, dtype=np.float64))
    references = np.atleast_2d(np.asarray(references, dtype=np.float64))
    if outputs.shape != references.shape:
        raise AlignmentError(f"Outputs {outputs.shape} and references {references.shape} differ")
    if np.any(outputs.std(axis=1) == 0.0):
        raise AlignmentError("An output is constant and cannot be aligned")

    n = outputs.shape[0]
    corr = np.array([[pearson(o, r) for r in references] for o in outputs])
    pairs = sorted(((abs(corr[i, j]), i, j) for i in range(n) for j in range(n)), key=lambda p: (-p[0], p[1], p[2]))
    used_out: set[int] = set()
    used_ref: set[int] = set()
    assignment: dict[int, int] = {}
    for _, i, j in pairs:
        if i in used_out or j in used_ref:
            continue
        assignment[j] = i
        used_out.add(i)
        used_ref.add(j)

    aligned = np.empty_like(references)
    records = []
    for j in range(n):
        i = assignment[j]
        sign = 1 if corr[i, j] >= 0 else -1
        signal = sign * outputs[i]
        slope, intercept = np.polyfit(signal, references[j], 1)
        aligned[j] = slope * signal + intercept
        records.append(AlignmentRecord(j, i, sign, float(slope), float(intercept), abs(float(corr[i, j]))))
        logger.debug("Output %d -> reference %d (sign %+d, |r|=%.4f)", i, j, sign, abs(corr[i, j]))
    return aligned, records

def synthetic_sources(size: int) -> list[GrayImage]:
    """
    Default pair of independent test images: horizontal sinusoidal stripes
    (period 16 rows) and a vertical sawtooth ramp (period 32 columns).
    One depends only on the row and the other only on the column, so
    their joint pixel histogram factorizes exactly.
    """
    if size < 1:
        raise ImageError(f"Image size must be positive, got {size}")
    rows = np.arange(size, dtype=np.float64)
    cols = np.arange(size, dtype=np.float64)
    stripes = 128.0 + 100.0 * np.sin(2.0 * np.pi * rows / 16.0)
    period = 32
    # amplitude giving the ramp the same variance as the stripes
    amplitude = 100.0 * np.sqrt(1.5 * (period - 1) / (period + 1))
    ramp = 128.0 + amplitude * (2.0 * (cols % period) / (period - 1) - 1.0)
    return [
        GrayImage(np.repeat(stripes[:, None], size, axis=1)),
        GrayImage(np.repeat(ramp[None, :], size, axis=0)),
    ]
